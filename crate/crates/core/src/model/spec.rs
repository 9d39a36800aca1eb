use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::layout::RingLayout;
use crate::error::{Error, Result};

pub const MIN_PAYLOAD_BITS: usize = 16;
pub const MAX_PAYLOAD_BITS: usize = 24;

/// Owner ID bits, 16 to 24 of them. Serializes as a `"0101..."` string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Payload {
    bits: Vec<bool>,
}

impl Payload {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if !(MIN_PAYLOAD_BITS..=MAX_PAYLOAD_BITS).contains(&bits.len()) {
            return Err(Error::Invalid(format!(
                "payload length {} outside {MIN_PAYLOAD_BITS}..={MAX_PAYLOAD_BITS}",
                bits.len()
            )));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Number of differing positions; the shorter payload is padded with zeros.
    pub fn hamming(&self, other: &Payload) -> usize {
        let n = self.len().max(other.len());
        (0..n)
            .filter(|&i| self.bits.get(i).copied().unwrap_or(false) != other.bits.get(i).copied().unwrap_or(false))
            .count()
    }

    /// Fraction of differing bits, over the length of `self`.
    pub fn bit_error_rate(&self, decoded: &Payload) -> f64 {
        self.hamming(decoded) as f64 / self.len() as f64
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Payload {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Invalid(format!("payload character {other:?} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Payload::new(bits)
    }
}

impl TryFrom<String> for Payload {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Payload> for String {
    fn from(p: Payload) -> String {
        p.to_string()
    }
}

/// Payload, layout, embedding strength and seed: everything needed to
/// reproduce an embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct WatermarkSpec {
    layout: RingLayout,
    payload: Payload,
    strength: f64,
    seed: u64,
}

#[derive(Deserialize)]
struct RawSpec {
    layout: RingLayout,
    payload: Payload,
    strength: f64,
    seed: u64,
}

impl TryFrom<RawSpec> for WatermarkSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        WatermarkSpec::new(raw.layout, raw.payload, raw.strength, raw.seed)
    }
}

impl WatermarkSpec {
    pub fn new(layout: RingLayout, payload: Payload, strength: f64, seed: u64) -> Result<Self> {
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::Invalid(format!("strength must be finite and >= 0, got {strength}")));
        }
        if payload.len() > layout.capacity() {
            return Err(Error::Capacity { needed: payload.len(), available: layout.capacity() });
        }
        Ok(Self { layout, payload, strength, seed })
    }

    pub fn layout(&self) -> &RingLayout {
        &self.layout
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_strength(&self, strength: f64) -> Result<Self> {
        Self::new(self.layout, self.payload.clone(), strength, self.seed)
    }

    pub fn with_payload(&self, payload: Payload) -> Result<Self> {
        Self::new(self.layout, payload, self.strength, self.seed)
    }

    /// Per-cell bit indicator, ring-major over all sectors (both halves).
    pub fn cell_bits(&self) -> Vec<bool> {
        let l = &self.layout;
        let mut out = vec![false; l.num_cells()];
        for (k, &b) in self.payload.bits().iter().enumerate() {
            let (i, j) = l.bit_cell(k);
            out[i * l.num_sectors() + j] = b;
            out[i * l.num_sectors() + j + l.num_sectors() / 2] = b;
        }
        out
    }
}

/// Minimum number of DFT bins each cell must receive for a layout to be usable.
pub const MIN_BINS_PER_CELL: usize = 4;

/// Checks that the payload fits the layout and that every cell receives at
/// least [`MIN_BINS_PER_CELL`] bins on a `width` x `height` spectrum.
pub fn validate_spec(spec: &WatermarkSpec, width: usize, height: usize) -> Result<()> {
    let layout = spec.layout();
    if spec.payload().len() > layout.capacity() {
        return Err(Error::Capacity { needed: spec.payload().len(), available: layout.capacity() });
    }
    let counts = bin_counts(layout, width, height);
    if let Some((idx, n)) = counts.iter().enumerate().find(|(_, n)| **n < MIN_BINS_PER_CELL) {
        let (i, j) = (idx / layout.num_sectors(), idx % layout.num_sectors());
        return Err(Error::Geometry(format!(
            "cell (ring {i}, sector {j}) gets {n} bins at {width}x{height}, need {MIN_BINS_PER_CELL}"
        )));
    }
    Ok(())
}

/// Bins per cell, ring-major, for a DC-centered `width` x `height` spectrum.
fn bin_counts(layout: &RingLayout, width: usize, height: usize) -> Vec<usize> {
    let mut counts = vec![0usize; layout.num_cells()];
    let (cx, cy) = ((width / 2) as f64, (height / 2) as f64);
    for y in 0..height {
        let fy = (y as f64 - cy) / height as f64;
        for x in 0..width {
            let fx = (x as f64 - cx) / width as f64;
            if let Some((i, j)) = layout.locate(fx, fy, 0.0) {
                counts[i * layout.num_sectors() + j] += 1;
            }
        }
    }
    counts
}

/// Outcome of a detection run.
///
/// For non-blind runs `similarity` is the correlation of the extracted
/// sequence with the expected one and `threshold` the effective decision
/// level. For blind runs they are the decoder's class separation and its
/// minimum. In both modes `present == (similarity > threshold)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub mode: DetectionMode,
    pub similarity: f64,
    pub threshold: f64,
    pub present: bool,
    pub decoded_bits: Option<Payload>,
    pub cell_energies: Vec<Vec<f64>>,
    pub estimated_rotation_deg: Option<f64>,
    #[serde(default)]
    pub estimated_scale: Option<f64>,
    #[serde(default)]
    pub confidence: Option<f64>,
    /// `None` with `snr_infinite` set when the 0-bit cells carry no energy.
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub snr_infinite: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionMode {
    Nonblind,
    Blind,
}

impl DetectionReport {
    pub fn new(mode: DetectionMode, similarity: f64, threshold: f64, cell_energies: Vec<Vec<f64>>) -> Self {
        Self {
            mode,
            similarity,
            threshold,
            present: similarity > threshold,
            decoded_bits: None,
            cell_energies,
            estimated_rotation_deg: None,
            estimated_scale: None,
            confidence: None,
            snr_db: None,
            snr_infinite: false,
        }
    }

    /// Stores an SNR value, mapping `+inf` to the flagged sentinel.
    pub fn set_snr(&mut self, snr_db: f64) {
        if snr_db.is_infinite() && snr_db > 0.0 {
            self.snr_db = None;
            self.snr_infinite = true;
        } else {
            self.snr_db = Some(snr_db);
            self.snr_infinite = false;
        }
    }
}
