use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::model::{validate_spec, ImageBuffer, RingLayout, WatermarkSpec};
use crate::spectral::{inverse_dft, mirror_bin, Spectrum};

/// Stream selectors so pattern phases and embedding phases never share draws.
pub(crate) const PATTERN_STREAM: u64 = 0x7061_7474;
pub(crate) const EMBED_STREAM: u64 = 0x656d_6264;

pub(crate) fn phase_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// DC-centered bin nearest to the center of `(ring, sector)` that still
/// lies inside that cell.
pub(crate) fn cell_peak_bin(layout: &RingLayout, ring: usize, sector: usize, width: usize, height: usize) -> Option<(usize, usize)> {
    let (fx, fy) = layout.cell_center(ring, sector);
    let (cu, cv) = (fx * width as f64, fy * height as f64);
    let (ox, oy) = ((width / 2) as i64, (height / 2) as i64);
    let mut best: Option<((usize, usize), f64)> = None;
    let reach = 3i64;
    for dv in -reach..=reach {
        for du in -reach..=reach {
            let u = cu.round() as i64 + du;
            let v = cv.round() as i64 + dv;
            let (x, y) = (u + ox, v + oy);
            if x < 0 || y < 0 || x >= width as i64 || y >= height as i64 {
                continue;
            }
            let (bfx, bfy) = (u as f64 / width as f64, v as f64 / height as f64);
            if layout.locate(bfx, bfy, 0.0) != Some((ring, sector)) {
                continue;
            }
            let d = (u as f64 - cu).powi(2) + (v as f64 - cv).powi(2);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some(((x as usize, y as usize), d));
            }
        }
    }
    best.map(|(b, _)| b).or_else(|| {
        // Tiny cells: fall back to the closest member bin anywhere.
        let mut best: Option<((usize, usize), f64)> = None;
        for y in 0..height {
            for x in 0..width {
                let (u, v) = (x as i64 - ox, y as i64 - oy);
                if layout.locate(u as f64 / width as f64, v as f64 / height as f64, 0.0) != Some((ring, sector)) {
                    continue;
                }
                let d = (u as f64 - cu).powi(2) + (v as f64 - cv).powi(2);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some(((x, y), d));
                }
            }
        }
        best.map(|(b, _)| b)
    })
}

/// Sum of cosines, one per 1-bit at its cell center, rescaled to `[0, 1]`
/// with mean 0.5. An all-zero payload gives a constant 0.5 plane.
///
/// Cosine phases are drawn from the spec seed so patterns for different
/// seeds do not all peak at the origin.
pub fn synthesize_pattern(spec: &WatermarkSpec, width: usize, height: usize) -> Result<ImageBuffer> {
    validate_spec(spec, width, height)?;
    let layout = spec.layout();
    let mut coeffs = vec![Complex64::default(); width * height];
    let mut rng = phase_rng(spec.seed(), PATTERN_STREAM);
    let amplitude = (width * height) as f64 / 2.0;
    let mut any = false;
    for (k, &bit) in spec.payload().bits().iter().enumerate() {
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        if !bit {
            continue;
        }
        let (ring, sector) = layout.bit_cell(k);
        let (x, y) = cell_peak_bin(layout, ring, sector, width, height)
            .expect("validate_spec guarantees populated cells");
        let (mx, my) = mirror_bin(x, y, width, height);
        coeffs[y * width + x] = Complex64::from_polar(amplitude, phase);
        coeffs[my * width + mx] = Complex64::from_polar(amplitude, -phase);
        any = true;
    }
    if !any {
        return ImageBuffer::filled(width, height, &[0.5]);
    }
    let field = inverse_dft(&Spectrum::new(width, height, coeffs)?)?;
    let peak = field.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let p = field.map(|v| 0.5 + v / (2.0 * peak));
    Ok(p.to_image())
}
