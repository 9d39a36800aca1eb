use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MAX_PAYLOAD_BITS, MIN_PAYLOAD_BITS};

/// Inclusive linear range of rotation candidates in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSearch {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl RotationSearch {
    pub fn fixed(deg: f64) -> Self {
        Self { min: deg, max: deg, step: 1.0 }
    }

    pub fn candidates(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.min + i as f64 * self.step).collect()
    }
}

impl Default for RotationSearch {
    fn default() -> Self {
        Self { min: -15.0, max: 15.0, step: 0.5 }
    }
}

/// Inclusive log-spaced range of image scale factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSearch {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl ScaleSearch {
    pub fn candidates(&self) -> Vec<f64> {
        if self.steps <= 1 || self.min == self.max {
            return vec![self.min];
        }
        let (a, b) = (self.min.ln(), self.max.ln());
        (0..self.steps).map(|i| (a + (b - a) * i as f64 / (self.steps - 1) as f64).exp()).collect()
    }
}

impl Default for ScaleSearch {
    fn default() -> Self {
        Self { min: 0.5, max: 2.0, steps: 81 }
    }
}

/// Per-cell statistic used by the blind decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatistic {
    /// Mean bin magnitude; suits spread (digitally embedded) marks.
    Mean,
    /// Largest bin magnitude; suits single-sinusoid (projected) marks.
    Peak,
    /// Both, keeping whichever separates better.
    Auto,
}

/// Pixel levels the blind decoder treats as occluders (ink, scratches,
/// clipped highlights) and inpaints before the transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcclusionFill {
    /// Pixels at or below this level are occluded.
    pub dark: f64,
    /// Pixels at or above `1 - bright` are occluded.
    pub bright: f64,
}

impl Default for OcclusionFill {
    fn default() -> Self {
        Self { dark: 0.11, bright: 0.02 }
    }
}

/// Detector settings shared by the non-blind and blind paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, try_from = "RawConfig")]
pub struct DetectorConfig {
    /// Decision level for the length-normalized correlation similarity
    /// `sim / |eta|`; the effective threshold is this times `|eta|`.
    pub threshold: f64,
    /// Apply a raised-cosine window before the blind decoder's transform.
    pub window: bool,
    pub rotation_search: RotationSearch,
    pub scale_search: Option<ScaleSearch>,
    pub statistic: CellStatistic,
    /// Smallest blind class separation accepted as a payload.
    pub min_separation: f64,
    pub occlusion_fill: Option<OcclusionFill>,
    /// Number of leading layout bits reported by the blind decoder.
    pub payload_bits: usize,
}

/// Normalized similarity at a 1e-3 false-alarm rate: `calibrate_threshold`
/// over 10000 null pairs gave 0.8612; a held-out 10000 exceeded it 8 times.
pub const DEFAULT_THRESHOLD: f64 = 0.86;
/// Blind separation exceeded by 4 of 5000 null decodes (rate 8e-4) of the
/// default search on unwatermarked 567x390 synthetic photos.
pub const DEFAULT_MIN_SEPARATION: f64 = 10.0;

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            window: false,
            rotation_search: RotationSearch::default(),
            scale_search: None,
            statistic: CellStatistic::Auto,
            min_separation: DEFAULT_MIN_SEPARATION,
            occlusion_fill: Some(OcclusionFill::default()),
            payload_bits: MAX_PAYLOAD_BITS,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.threshold.is_finite() {
            return Err(Error::Invalid(format!("threshold must be finite, got {}", self.threshold)));
        }
        let r = &self.rotation_search;
        if !(r.step > 0.0 && r.min.is_finite() && r.max.is_finite() && r.min <= r.max) {
            return Err(Error::Invalid(format!("rotation search {r:?} needs step > 0 and min <= max")));
        }
        if let Some(s) = &self.scale_search {
            if !(s.min > 0.0 && s.min <= s.max && s.max.is_finite() && s.steps >= 1) {
                return Err(Error::Invalid(format!("scale search {s:?} needs 0 < min <= max and steps >= 1")));
            }
        }
        if !(self.min_separation.is_finite() && self.min_separation >= 0.0) {
            return Err(Error::Invalid("min_separation must be finite and >= 0".into()));
        }
        if let Some(f) = self.occlusion_fill {
            if !((0.0..0.5).contains(&f.dark) && (0.0..0.5).contains(&f.bright)) {
                return Err(Error::Invalid(format!("occlusion_fill {f:?} levels outside [0, 0.5)")));
            }
        }
        if !(MIN_PAYLOAD_BITS..=MAX_PAYLOAD_BITS).contains(&self.payload_bits) {
            return Err(Error::Invalid(format!("payload_bits {} outside 16..=24", self.payload_bits)));
        }
        Ok(())
    }

    /// Only the given rotation, no scale search.
    pub fn at_rotation(mut self, deg: f64) -> Self {
        self.rotation_search = RotationSearch::fixed(deg);
        self
    }
}

#[derive(Deserialize)]
#[serde(default)]
struct RawConfig {
    threshold: f64,
    window: bool,
    rotation_search: RotationSearch,
    scale_search: Option<ScaleSearch>,
    statistic: CellStatistic,
    min_separation: f64,
    occlusion_fill: Option<OcclusionFill>,
    payload_bits: usize,
}

impl Default for RawConfig {
    fn default() -> Self {
        let d = DetectorConfig::default();
        Self {
            threshold: d.threshold,
            window: d.window,
            rotation_search: d.rotation_search,
            scale_search: d.scale_search,
            statistic: d.statistic,
            min_separation: d.min_separation,
            occlusion_fill: d.occlusion_fill,
            payload_bits: d.payload_bits,
        }
    }
}

impl TryFrom<RawConfig> for DetectorConfig {
    type Error = Error;

    fn try_from(r: RawConfig) -> Result<Self> {
        let cfg = DetectorConfig {
            threshold: r.threshold,
            window: r.window,
            rotation_search: r.rotation_search,
            scale_search: r.scale_search,
            statistic: r.statistic,
            min_separation: r.min_separation,
            occlusion_fill: r.occlusion_fill,
            payload_bits: r.payload_bits,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_candidates_cover_range() {
        let c = RotationSearch::default().candidates();
        assert_eq!(c.len(), 61);
        assert_eq!(c[0], -15.0);
        assert!((c[60] - 15.0).abs() < 1e-12);
        assert_eq!(RotationSearch::fixed(3.0).candidates(), vec![3.0]);
    }

    #[test]
    fn scale_candidates_are_log_spaced() {
        let c = ScaleSearch::default().candidates();
        assert_eq!(c.len(), 81);
        assert!((c[40] - 1.0).abs() < 1e-12);
        assert!((c[0] * c[80] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_defaults_and_validation() {
        let cfg: DetectorConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, DetectorConfig::default());
        assert!(serde_json::from_str::<DetectorConfig>(r#"{"rotation_search":{"min":0,"max":1,"step":0}}"#).is_err());
        let back: DetectorConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
