//! PNG and binary PPM/PGM files. Samples are quantized to 8 bits here and
//! nowhere else.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ImageBuffer;

/// Loads an image. Grayscale files give 1 channel, everything else 3;
/// alpha is dropped.
pub fn read_image(path: &Path) -> Result<ImageBuffer> {
    let img = image::open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray = matches!(img.color(), image::ColorType::L8 | image::ColorType::L16 | image::ColorType::La8 | image::ColorType::La16);
    if gray {
        let px = img.to_luma8().into_raw().into_iter().map(|v| v as f64 / 255.0).collect();
        ImageBuffer::new(w, h, 1, px)
    } else {
        let px = img.to_rgb8().into_raw().into_iter().map(|v| v as f64 / 255.0).collect();
        ImageBuffer::new(w, h, 3, px)
    }
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes by extension: `.png`, `.ppm` (color) or `.pgm` (gray).
pub fn write_image(path: &Path, img: &ImageBuffer) -> Result<()> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).unwrap_or_default();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let bytes: Vec<u8> = img.pixels().iter().map(|&v| quantize(v)).collect();
    let dynamic = if img.channels() == 1 {
        DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, bytes).expect("buffer length matches"))
    } else {
        DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, bytes).expect("buffer length matches"))
    };
    match ext.as_str() {
        "png" => dynamic.save_with_format(path, ImageFormat::Png)?,
        "ppm" => DynamicImage::ImageRgb8(dynamic.to_rgb8()).save_with_format(path, ImageFormat::Pnm)?,
        "pgm" => {
            if img.channels() != 1 {
                return Err(Error::Shape("PGM output needs a 1-channel image".into()));
            }
            dynamic.save_with_format(path, ImageFormat::Pnm)?
        }
        other => return Err(Error::Invalid(format!("unsupported image extension {other:?}"))),
    }
    Ok(())
}

/// Rounds every sample to the 8-bit grid, as a write-read cycle would.
pub fn quantize_image(img: &ImageBuffer) -> ImageBuffer {
    let px = img.pixels().iter().map(|&v| quantize(v) as f64 / 255.0).collect();
    ImageBuffer::new(img.width(), img.height(), img.channels(), px).expect("quantized samples are in range")
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&std::fs::read(path)?)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn png_and_pnm_round_trip_on_the_8bit_grid() {
        let dir = tempfile::tempdir().unwrap();
        let color = quantize_image(&synth::photo(31, 17, 1));
        for name in ["a.png", "a.ppm"] {
            let p = dir.path().join(name);
            write_image(&p, &color).unwrap();
            assert_eq!(read_image(&p).unwrap(), color);
        }
        let gray = quantize_image(&color.luminance().to_image());
        for name in ["g.png", "g.pgm"] {
            let p = dir.path().join(name);
            write_image(&p, &gray).unwrap();
            assert_eq!(read_image(&p).unwrap(), gray);
        }
        assert!(write_image(&dir.path().join("x.pgm"), &color).is_err());
        assert!(write_image(&dir.path().join("x.bmp"), &color).is_err());
    }
}
