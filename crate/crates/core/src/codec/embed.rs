use rand::Rng;
use rustfft::num_complex::Complex64;

use super::pattern::{phase_rng, EMBED_STREAM};
use crate::error::{Error, Result};
use crate::model::{validate_spec, ImageBuffer, Plane, WatermarkSpec};
use crate::spectral::{forward_dft_plane, inverse_dft, mirror_bin};

/// Magnitudes at or below this fraction of `|DC| + 1` have no usable phase.
const PHASELESS: f64 = 1e-12;

/// Embedding strength from `calibrate_strength` on twenty 567x390
/// synthetic photos with the default detector: the smallest passing value
/// (40) doubled.
pub const WORKING_STRENGTH: f64 = 80.0;

/// Adds `strength` to the DFT magnitude of every bin in a 1-bit cell of the
/// blue channel, keeping phase, and clamps the result into `[0, 1]`.
/// Red and green are returned untouched.
pub fn embed_digital(cover: &ImageBuffer, spec: &WatermarkSpec) -> Result<ImageBuffer> {
    if cover.channels() != 3 {
        return Err(Error::Shape(format!("embedding needs a 3-channel cover, got {}", cover.channels())));
    }
    let blue = embed_plane(&cover.plane(2), spec)?;
    cover.with_plane(2, &blue)
}

/// Additive magnitude embedding on a single plane, without clamping.
pub fn embed_plane(plane: &Plane, spec: &WatermarkSpec) -> Result<Plane> {
    let (w, h) = (plane.width(), plane.height());
    validate_spec(spec, w, h)?;
    let layout = spec.layout();
    let cells = spec.cell_bits();
    let a = spec.strength();
    let mut spectrum = forward_dft_plane(plane);
    let phaseless = PHASELESS * (spectrum.dc().norm() + 1.0);
    let mut rng = phase_rng(spec.seed(), EMBED_STREAM);
    let coeffs = spectrum.coeffs_mut();
    for y in 0..h {
        for x in 0..w {
            let (mx, my) = mirror_bin(x, y, w, h);
            // Visit each conjugate pair once, from its lower-index member.
            if (my, mx) <= (y, x) {
                continue;
            }
            let (fx, fy) = ((x as f64 - (w / 2) as f64) / w as f64, (y as f64 - (h / 2) as f64) / h as f64);
            let Some((i, j)) = layout.locate(fx, fy, 0.0) else { continue };
            if !cells[i * layout.num_sectors() + j] {
                continue;
            }
            let c = coeffs[y * w + x];
            let m = (c.re * c.re + c.im * c.im).sqrt();
            let phase = if m <= phaseless { rng.random_range(0.0..std::f64::consts::TAU) } else { c.arg() };
            let v = Complex64::from_polar(m + a, phase);
            coeffs[y * w + x] = v;
            coeffs[my * w + mx] = v.conj();
        }
    }
    inverse_dft(&spectrum)
}
