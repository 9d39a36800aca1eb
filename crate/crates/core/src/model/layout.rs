use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ring/sector cell grid in normalized frequency.
///
/// Radii are fractions of the sampling rate (Nyquist is 0.5). Rings split
/// `[r_min, r_max)` into equal widths; sectors split the full circle into
/// equal angles counterclockwise from the positive horizontal axis. Sector
/// `j` and sector `j + num_sectors / 2` are conjugate mirrors and carry the
/// same bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLayout")]
pub struct RingLayout {
    r_min: f64,
    r_max: f64,
    num_rings: usize,
    num_sectors: usize,
}

#[derive(Deserialize)]
struct RawLayout {
    r_min: f64,
    r_max: f64,
    num_rings: usize,
    num_sectors: usize,
}

impl TryFrom<RawLayout> for RingLayout {
    type Error = Error;

    fn try_from(raw: RawLayout) -> Result<Self> {
        RingLayout::new(raw.r_min, raw.r_max, raw.num_rings, raw.num_sectors)
    }
}

impl Default for RingLayout {
    fn default() -> Self {
        Self::new(0.08, 0.20, 6, 8).expect("default layout is valid")
    }
}

impl RingLayout {
    pub fn new(r_min: f64, r_max: f64, num_rings: usize, num_sectors: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_min < r_max && r_max < 0.5) {
            return Err(Error::Geometry(format!(
                "need 0 < r_min < r_max < 0.5, got r_min={r_min} r_max={r_max}"
            )));
        }
        if num_rings == 0 {
            return Err(Error::Geometry("at least one ring required".into()));
        }
        if num_sectors < 2 || num_sectors % 2 != 0 {
            return Err(Error::Geometry(format!(
                "sector count must be even and at least 2, got {num_sectors}"
            )));
        }
        Ok(Self { r_min, r_max, num_rings, num_sectors })
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn num_rings(&self) -> usize {
        self.num_rings
    }

    pub fn num_sectors(&self) -> usize {
        self.num_sectors
    }

    pub fn num_cells(&self) -> usize {
        self.num_rings * self.num_sectors
    }

    pub fn ring_width(&self) -> f64 {
        (self.r_max - self.r_min) / self.num_rings as f64
    }

    /// Number of independent bits: one per conjugate sector pair.
    pub fn capacity(&self) -> usize {
        self.num_rings * self.num_sectors / 2
    }

    /// Cell `(ring, sector)` of bit `k` in the canonical half; its mirror is
    /// at `sector + num_sectors / 2`.
    pub fn bit_cell(&self, k: usize) -> (usize, usize) {
        let half = self.num_sectors / 2;
        (k / half, k % half)
    }

    /// Bit index carried by a cell.
    pub fn cell_bit(&self, ring: usize, sector: usize) -> usize {
        let half = self.num_sectors / 2;
        ring * half + sector % half
    }

    /// Center of a cell as normalized frequency `(fx, fy)`, where `fy` grows
    /// downward in spectrum index space.
    pub fn cell_center(&self, ring: usize, sector: usize) -> (f64, f64) {
        let r = self.r_min + (ring as f64 + 0.5) * self.ring_width();
        let theta = (sector as f64 + 0.5) * std::f64::consts::TAU / self.num_sectors as f64;
        (r * theta.cos(), -r * theta.sin())
    }

    /// Cell containing normalized frequency `(fx, fy)` with the sector grid
    /// turned counterclockwise by `rotation` radians.
    pub fn locate(&self, fx: f64, fy: f64, rotation: f64) -> Option<(usize, usize)> {
        let grid = PolarGrid {
            inner: self.r_min,
            width: self.ring_width(),
            rings: self.num_rings,
            sectors: self.num_sectors,
            rotation,
        };
        grid.locate(fx, fy)
    }
}

/// Equal-width rings starting at `inner`, `sectors` equal angular sectors
/// turned by `rotation` radians.
///
/// Assignment is computed on the canonical half-plane representative and
/// mirrored, so `(fx, fy)` and `(-fx, -fy)` always land in the same ring and
/// in sectors exactly `sectors / 2` apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGrid {
    pub inner: f64,
    pub width: f64,
    pub rings: usize,
    pub sectors: usize,
    pub rotation: f64,
}

impl PolarGrid {
    pub fn locate(&self, fx: f64, fy: f64) -> Option<(usize, usize)> {
        let r = (fx * fx + fy * fy).sqrt();
        let ring = self.ring_of(r)?;
        Some((ring, self.sector_of(fx, fy)))
    }

    pub fn ring_of(&self, r: f64) -> Option<usize> {
        let outer = self.inner + self.width * self.rings as f64;
        if r < self.inner || r >= outer {
            return None;
        }
        Some((((r - self.inner) / self.width) as usize).min(self.rings - 1))
    }

    pub fn sector_of(&self, fx: f64, fy: f64) -> usize {
        let (theta, mirrored) = canonical_angle(fx, fy);
        sector_index(theta, mirrored, self.rotation, self.sectors)
    }
}

/// Angle in `[0, pi)` of the half-plane representative of `(fx, fy)` and
/// whether the bin itself is the mirrored one. Angles are counterclockwise
/// with the vertical axis pointing up, i.e. against the index direction.
pub fn canonical_angle(fx: f64, fy: f64) -> (f64, bool) {
    let (mut x, mut y) = (fx, -fy);
    let mirrored = y < 0.0 || (y == 0.0 && x < 0.0);
    if mirrored {
        x = -x;
        y = -y;
    }
    (y.atan2(x), mirrored)
}

/// Sector of a bin given its canonical angle, for a grid turned by `rotation`.
pub fn sector_index(theta: f64, mirrored: bool, rotation: f64, sectors: usize) -> usize {
    use std::f64::consts::PI;
    let half = sectors / 2;
    let step = PI / half as f64;
    let t = theta - rotation;
    let turns = (t / PI).floor();
    let within = t - turns * PI;
    let h = ((within / step) as usize).min(half - 1);
    let upper = (turns as i64 + mirrored as i64).rem_euclid(2) as usize;
    h + upper * half
}
