use crate::error::{Error, Result};

/// A raster with 1 or 3 channels and pixel values in `[0, 1]`.
///
/// Pixels are stored row-major with channels interleaved. Quantization to
/// 8 bits only happens at file I/O.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Shape(format!("channels must be 1 or 3, got {channels}")));
        }
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!("empty image {width}x{height}")));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::Shape(format!(
                "expected {} samples for {width}x{height}x{channels}, got {}",
                width * height * channels,
                pixels.len()
            )));
        }
        if let Some((i, v)) = pixels.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Invalid(format!("pixel {i} = {v} outside [0, 1]")));
        }
        Ok(Self { width, height, channels, pixels })
    }

    pub fn filled(width: usize, height: usize, color: &[f64]) -> Result<Self> {
        let channels = color.len();
        let pixels = color.iter().copied().cycle().take(width * height * channels).collect();
        Self::new(width, height, channels, pixels)
    }

    /// Builds an image from a per-pixel closure, clamping every sample into `[0, 1]`.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    pixels.push(f(x, y, c).clamp(0.0, 1.0));
                }
            }
        }
        Self::new(width, height, channels, pixels)
    }

    /// Stacks single-channel planes into an image, clamping into `[0, 1]`.
    pub fn from_planes(planes: &[&Plane]) -> Result<Self> {
        let first = planes.first().ok_or_else(|| Error::Shape("no planes".into()))?;
        let (w, h) = (first.width(), first.height());
        if planes.iter().any(|p| p.width() != w || p.height() != h) {
            return Err(Error::Shape("planes differ in size".into()));
        }
        let n = planes.len();
        let mut pixels = Vec::with_capacity(w * h * n);
        for i in 0..w * h {
            for p in planes {
                pixels.push(p.data()[i].clamp(0.0, 1.0));
            }
        }
        Self::new(w, h, n, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.pixels[(y * self.width + x) * self.channels + c]
    }

    /// Index of the plane that carries the watermark: blue for color, the
    /// only plane otherwise.
    pub fn carrier_channel(&self) -> usize {
        if self.channels == 3 {
            2
        } else {
            0
        }
    }

    pub fn plane(&self, channel: usize) -> Plane {
        assert!(channel < self.channels, "channel {channel} out of range");
        let data = self.pixels.iter().skip(channel).step_by(self.channels).copied().collect();
        Plane::new(self.width, self.height, data).expect("plane dimensions follow the image")
    }

    /// The watermark-carrying plane, see [`ImageBuffer::carrier_channel`].
    pub fn carrier_plane(&self) -> Plane {
        self.plane(self.carrier_channel())
    }

    /// Rec. 601 luma for color images, the single plane otherwise.
    pub fn luminance(&self) -> Plane {
        if self.channels == 1 {
            return self.plane(0);
        }
        let data = self
            .pixels
            .chunks_exact(3)
            .map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2])
            .collect();
        Plane::new(self.width, self.height, data).expect("plane dimensions follow the image")
    }

    /// Returns a copy with one channel replaced by `plane` (clamped into `[0, 1]`).
    pub fn with_plane(&self, channel: usize, plane: &Plane) -> Result<Self> {
        if plane.width() != self.width || plane.height() != self.height {
            return Err(Error::Shape(format!(
                "plane {}x{} does not match image {}x{}",
                plane.width(),
                plane.height(),
                self.width,
                self.height
            )));
        }
        if channel >= self.channels {
            return Err(Error::Shape(format!("channel {channel} out of range")));
        }
        let mut out = self.clone();
        for (i, v) in plane.data().iter().enumerate() {
            out.pixels[i * self.channels + channel] = v.clamp(0.0, 1.0);
        }
        Ok(out)
    }

    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 || x0 + width > self.width || y0 + height > self.height {
            return Err(Error::Shape(format!(
                "crop {width}x{height}+{x0}+{y0} outside {}x{}",
                self.width, self.height
            )));
        }
        let mut pixels = Vec::with_capacity(width * height * self.channels);
        for y in y0..y0 + height {
            let start = (y * self.width + x0) * self.channels;
            pixels.extend_from_slice(&self.pixels[start..start + width * self.channels]);
        }
        Self::new(width, height, self.channels, pixels)
    }

    pub fn max_abs_diff(&self, other: &ImageBuffer) -> f64 {
        assert_eq!(self.pixels.len(), other.pixels.len());
        self.pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A single-channel real raster without range restriction.
///
/// Used for spectra magnitudes, inverse transforms before clamping and
/// other intermediate planes.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::Shape(format!(
                "plane {width}x{height} with {} samples",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self { width, height, data: vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn sum_squares(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Clamps into `[0, 1]` and wraps as a 1-channel image.
    pub fn to_image(&self) -> ImageBuffer {
        let pixels = self.data.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        ImageBuffer::new(self.width, self.height, 1, pixels).expect("clamped plane is a valid image")
    }

    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Plane> {
        if width == 0 || height == 0 || x0 + width > self.width || y0 + height > self.height {
            return Err(Error::Shape("crop outside plane".into()));
        }
        Ok(Plane::from_fn(width, height, |x, y| self.get(x0 + x, y0 + y)))
    }
}
