use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::DetectorConfig;
use crate::error::{Error, Result};
use crate::model::{DetectionMode, DetectionReport, ImageBuffer, Plane, RingLayout, WatermarkSpec};
use crate::spectral::{carrier_magnitude, forward_dft_plane, magnitude_plane, sample_cells};
use crate::synth;

/// One value per cell of a layout, ring-major over all sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct WatermarkSequence {
    layout: RingLayout,
    values: Vec<f64>,
}

impl WatermarkSequence {
    pub fn new(layout: RingLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.num_cells() {
            return Err(Error::Shape(format!(
                "sequence of {} values for a layout of {} cells",
                values.len(),
                layout.num_cells()
            )));
        }
        Ok(Self { layout, values })
    }

    /// The binary indicator of a spec's 1-bit cells.
    pub fn expected(spec: &WatermarkSpec) -> Self {
        let values = spec.cell_bits().into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect();
        Self { layout: *spec.layout(), values }
    }

    pub fn layout(&self) -> &RingLayout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Values as `num_rings` rows of `num_sectors`.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.layout.num_sectors()).map(|r| r.to_vec()).collect()
    }
}

/// Correlation similarity `eta . eta' / sqrt(eta' . eta')`.
pub fn similarity(eta: &WatermarkSequence, eta_prime: &WatermarkSequence) -> Result<f64> {
    similarity_values(eta.values(), eta_prime.values())
}

pub fn similarity_values(eta: &[f64], eta_prime: &[f64]) -> Result<f64> {
    if eta.len() != eta_prime.len() {
        return Err(Error::Shape(format!("sequence lengths {} and {}", eta.len(), eta_prime.len())));
    }
    let energy: f64 = eta_prime.iter().map(|v| v * v).sum();
    if energy == 0.0 {
        return Err(Error::Degenerate("extracted sequence is all zero".into()));
    }
    let dot: f64 = eta.iter().zip(eta_prime).map(|(a, b)| a * b).sum();
    Ok(dot / energy.sqrt())
}

/// Per-cell mean of `|M_watermarked| - |M_original|` on the carrier plane.
pub fn extract_sequence(watermarked: &ImageBuffer, original: &ImageBuffer, layout: &RingLayout) -> Result<WatermarkSequence> {
    if watermarked.width() != original.width() || watermarked.height() != original.height() {
        return Err(Error::Shape(format!(
            "watermarked {}x{} vs original {}x{}",
            watermarked.width(),
            watermarked.height(),
            original.width(),
            original.height()
        )));
    }
    extract_from_planes(&watermarked.carrier_plane(), &original.carrier_plane(), layout)
}

pub(crate) fn extract_from_planes(watermarked: &Plane, original: &Plane, layout: &RingLayout) -> Result<WatermarkSequence> {
    let mw = magnitude_plane(&forward_dft_plane(watermarked));
    let mo = magnitude_plane(&forward_dft_plane(original));
    let diff = Plane::new(mw.width(), mw.height(), mw.data().iter().zip(mo.data()).map(|(a, b)| a - b).collect())?;
    let grid = sample_cells(&diff, layout)?;
    WatermarkSequence::new(*layout, grid.flat())
}

/// Correlation detector with the original available.
///
/// `report.threshold` is the effective level `cfg.threshold * |eta|`, so
/// `present == similarity > threshold` holds literally.
pub fn detect_nonblind(
    watermarked: &ImageBuffer,
    original: &ImageBuffer,
    spec: &WatermarkSpec,
    cfg: &DetectorConfig,
) -> Result<DetectionReport> {
    cfg.validate()?;
    let eta = WatermarkSequence::expected(spec);
    let eta_prime = extract_sequence(watermarked, original, spec.layout())?;
    let sim = match similarity(&eta, &eta_prime) {
        Ok(s) => s,
        Err(Error::Degenerate(_)) => 0.0,
        Err(e) => return Err(e),
    };
    let mag = carrier_magnitude(watermarked);
    let grid = sample_cells(&mag, spec.layout())?;
    let mut report = DetectionReport::new(DetectionMode::Nonblind, sim, cfg.threshold * eta.norm(), grid.energies.clone());
    report.estimated_rotation_deg = None;
    match crate::attack::snr_from_grid(&grid, spec) {
        Ok(snr) => report.set_snr(snr),
        Err(Error::Degenerate(_)) => report.set_snr(f64::INFINITY),
        Err(e) => return Err(e),
    }
    Ok(report)
}

/// Size of the procedurally generated covers used for null runs.
pub const CALIBRATION_SIZE: (usize, usize) = (192, 132);

/// Normalized null similarities `sim(eta, eta') / |eta|`, each from a fresh
/// pair of unrelated covers and a random 24-bit eta.
pub fn null_similarities(layout: &RingLayout, trials: usize, rng_seed: u64, size: (usize, usize)) -> Result<Vec<f64>> {
    let bits = layout.capacity().min(crate::model::MAX_PAYLOAD_BITS);
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(t as u64);
            let a = synth::photo_plane(size.0, size.1, rng.random());
            let b = synth::photo_plane(size.0, size.1, rng.random());
            let eta_prime = extract_from_planes(&a, &b, layout)?;
            let eta = loop {
                let mut cells = vec![0.0; layout.num_cells()];
                for k in 0..bits {
                    if rng.random::<bool>() {
                        let (i, j) = layout.bit_cell(k);
                        cells[i * layout.num_sectors() + j] = 1.0;
                        cells[i * layout.num_sectors() + j + layout.num_sectors() / 2] = 1.0;
                    }
                }
                if cells.iter().any(|v| *v > 0.0) {
                    break cells;
                }
            };
            let norm = eta.iter().sum::<f64>().sqrt();
            match similarity_values(&eta, eta_prime.values()) {
                Ok(s) => Ok(s / norm),
                Err(Error::Degenerate(_)) => Ok(0.0),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Empirical `(1 - target_far)` quantile of the normalized null similarity
/// at [`CALIBRATION_SIZE`].
pub fn calibrate_threshold(layout: &RingLayout, target_far: f64, trials: usize, rng_seed: u64) -> Result<f64> {
    calibrate_threshold_at(layout, target_far, trials, rng_seed, CALIBRATION_SIZE)
}

pub fn calibrate_threshold_at(
    layout: &RingLayout,
    target_far: f64,
    trials: usize,
    rng_seed: u64,
    size: (usize, usize),
) -> Result<f64> {
    if !(target_far > 0.0 && target_far <= 0.5) {
        return Err(Error::Param(format!("target_far {target_far} outside (0, 0.5]")));
    }
    if (trials as f64) < (1.0 / target_far).ceil() {
        return Err(Error::Param(format!("{trials} trials cannot resolve a false-alarm rate of {target_far}")));
    }
    let mut sims = null_similarities(layout, trials, rng_seed, size)?;
    Ok(upper_quantile(&mut sims, target_far))
}

/// Smallest sample value exceeded by at most `tail * n` samples.
pub fn upper_quantile(samples: &mut [f64], tail: f64) -> f64 {
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len();
    let keep = ((1.0 - tail) * n as f64).ceil() as usize;
    samples[keep.clamp(1, n) - 1]
}
