//! Blind payload decoding from ring-cell energy statistics.
//!
//! For every (scale, rotation) candidate the magnitude spectrum is binned
//! into the payload rings plus guard rings on either side. A smooth
//! per-sector baseline `log E = alpha_sector + beta ln r + gamma r^2` is
//! fitted on the guard cells only, so natural spectral fall-off and blur
//! do not leak into the payload cells. The excess over the baseline,
//! averaged over conjugate sector pairs, is split into two classes with a
//! Fisher criterion anchored at zero excess. The scale is chosen by class
//! separation, the rotation by contrast with the bits of the best candidate.

use rayon::prelude::*;

use super::config::{CellStatistic, DetectorConfig, OcclusionFill};
use crate::error::{Error, Result};
use crate::model::{canonical_angle, sector_index, DetectionMode, DetectionReport, ImageBuffer, Payload, Plane, RingLayout};
use crate::spectral::{forward_dft_plane, magnitude_plane, normalized_frequency, raised_cosine_window};

/// Guard rings fitted on each side of the payload band.
const GUARD_RINGS: usize = 2;
/// Floor on the pooled within-class spread of normalized excess.
const MIN_SPREAD: f64 = 0.02;
/// Relative floor on cell energies before taking logs.
const ENERGY_FLOOR: f64 = 1e-12;
/// Largest Gaussian fall-off `d` in `exp(-d r^2)` the level refinement
/// removes; `2 pi^2 sigma^2` for a blur of sigma 1.5 px.
const MAX_FALLOFF: f64 = 44.4;
const INPAINT_SWEEPS: usize = 400;
const INPAINT_RELAX: f64 = 1.9;
const INPAINT_TOL: f64 = 1e-4;

/// Result of a successful blind decode.
#[derive(Debug, Clone, PartialEq)]
pub struct BlindDecode {
    pub payload: Payload,
    /// Fisher separation of the chosen two-class split.
    pub confidence: f64,
    /// Difference of class means of the normalized excess.
    pub contrast: f64,
    pub estimated_rotation_deg: f64,
    /// Estimated image scale factor relative to the embedding size.
    pub estimated_scale: f64,
    pub statistic: CellStatistic,
    /// Payload-band cell energies at the chosen candidate.
    pub cell_energies: Vec<Vec<f64>>,
    /// Decoded bit per layout capacity slot, beyond `payload` too.
    pub cell_bits: Vec<bool>,
}

impl BlindDecode {
    /// Report form: `similarity` is the separation and `threshold` the
    /// configured minimum.
    pub fn report(&self, cfg: &DetectorConfig) -> DetectionReport {
        let mut r = DetectionReport::new(DetectionMode::Blind, self.confidence, cfg.min_separation, self.cell_energies.clone());
        r.decoded_bits = Some(self.payload.clone());
        r.estimated_rotation_deg = Some(self.estimated_rotation_deg);
        r.estimated_scale = Some(self.estimated_scale);
        r.confidence = Some(self.confidence);
        if let Some(snr) = self.snr_db() {
            r.set_snr(snr);
        }
        r
    }

    /// 1-cell to 0-cell energy ratio under the decoded bits, in dB.
    pub fn snr_db(&self) -> Option<f64> {
        let half = self.cell_energies.first()?.len() / 2;
        let (mut s1, mut n1, mut s0, mut n0) = (0.0, 0usize, 0.0, 0usize);
        for (i, row) in self.cell_energies.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if self.cell_bits[i * half + j % half] {
                    s1 += e;
                    n1 += 1;
                } else {
                    s0 += e;
                    n0 += 1;
                }
            }
        }
        if n1 == 0 || n0 == 0 {
            return None;
        }
        let (m1, m0) = (s1 / n1 as f64, s0 / n0 as f64);
        Some(if m0 == 0.0 { f64::INFINITY } else { 10.0 * (m1 / m0).log10() })
    }
}

/// Blind detection as a report; decode failures become `present = false`.
pub fn detect_blind(photo: &ImageBuffer, layout: &RingLayout, cfg: &DetectorConfig) -> Result<DetectionReport> {
    match decode_payload(photo, layout, cfg) {
        Ok(d) => Ok(d.report(cfg)),
        Err(Error::Decode { separation, required }) => {
            Ok(DetectionReport::new(DetectionMode::Blind, separation, required, vec![]))
        }
        Err(e) => Err(e),
    }
}

/// Recovers the payload from the carrier plane alone.
pub fn decode_payload(photo: &ImageBuffer, layout: &RingLayout, cfg: &DetectorConfig) -> Result<BlindDecode> {
    decode_plane(&photo.carrier_plane(), layout, cfg)
}

pub fn decode_plane(plane: &Plane, layout: &RingLayout, cfg: &DetectorConfig) -> Result<BlindDecode> {
    cfg.validate()?;
    if cfg.payload_bits > layout.capacity() {
        return Err(Error::Capacity { needed: cfg.payload_bits, available: layout.capacity() });
    }
    let mut work = match &cfg.occlusion_fill {
        Some(f) => fill_occluded(plane, f),
        None => plane.clone(),
    };
    if cfg.window {
        let m = work.mean();
        work = raised_cosine_window(&work.map(|v| v - m));
    }
    let mag = magnitude_plane(&forward_dft_plane(&work));
    let scales: Vec<f64> = cfg.scale_search.map(|s| s.candidates()).unwrap_or_else(|| vec![1.0]);
    let rotations = cfg.rotation_search.candidates();
    let stats: &[CellStatistic] = match cfg.statistic {
        CellStatistic::Auto => &[CellStatistic::Mean, CellStatistic::Peak],
        CellStatistic::Mean => &[CellStatistic::Mean],
        CellStatistic::Peak => &[CellStatistic::Peak],
    };
    let bins = Bins::collect(&mag, layout, &scales);
    if bins.radius.is_empty() {
        return Err(Error::Geometry("no spectrum bins fall in the decoding band".into()));
    }
    check_band_populated(&bins, layout)?;

    let mut best: Option<Selection> = None;
    for &stat in stats {
        let sel = search(&bins, layout, stat, &scales, &rotations, mag.width().min(mag.height()));
        if let Some(sel) = sel {
            if best.as_ref().is_none_or(|b| sel.peak_separation > b.peak_separation) {
                best = Some(sel);
            }
        }
    }
    let best = best.ok_or_else(|| Error::Geometry("no scale candidate keeps the band below Nyquist".into()))?;
    if best.peak_separation < cfg.min_separation {
        return Err(Error::Decode { separation: best.peak_separation, required: cfg.min_separation });
    }
    let c = &best.chosen;
    let payload = Payload::new(c.bits[..cfg.payload_bits].to_vec())?;
    Ok(BlindDecode {
        payload,
        confidence: c.separation,
        contrast: c.contrast,
        estimated_rotation_deg: best.rotation_deg,
        estimated_scale: 1.0 / c.k,
        statistic: best.statistic,
        cell_energies: c.energies.clone(),
        cell_bits: c.bits.clone(),
    })
}

/// Inpaints occluded pixels (see [`OcclusionFill`]) with the harmonic
/// interpolation of their surroundings, so occluders leave no edges in the
/// spectrum.
pub fn fill_occluded(plane: &Plane, fill: &OcclusionFill) -> Plane {
    let occluded = |v: f64| v <= fill.dark || v >= 1.0 - fill.bright;
    let (sum, n) = plane.data().iter().filter(|v| !occluded(**v)).fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 || n == plane.data().len() {
        return plane.clone();
    }
    let (w, h) = (plane.width(), plane.height());
    let holes: Vec<usize> = (0..w * h).filter(|&i| occluded(plane.data()[i])).collect();
    let mut out = plane.clone();
    let mean = sum / n as f64;
    let px = out.data_mut();
    for &i in &holes {
        px[i] = mean;
    }
    // Gauss-Seidel with over-relaxation on the hole pixels only.
    for _ in 0..INPAINT_SWEEPS {
        let mut change = 0.0f64;
        for &i in &holes {
            let (x, y) = (i % w, i / w);
            let (mut acc, mut k) = (0.0, 0.0);
            if x > 0 {
                acc += px[i - 1];
                k += 1.0;
            }
            if x + 1 < w {
                acc += px[i + 1];
                k += 1.0;
            }
            if y > 0 {
                acc += px[i - w];
                k += 1.0;
            }
            if y + 1 < h {
                acc += px[i + w];
                k += 1.0;
            }
            let step = INPAINT_RELAX * (acc / k - px[i]);
            px[i] += step;
            change = change.max(step.abs());
        }
        if change < INPAINT_TOL {
            break;
        }
    }
    out
}

/// Band bins with precomputed polar coordinates.
struct Bins {
    radius: Vec<f64>,
    theta: Vec<f64>,
    mirrored: Vec<bool>,
    magnitude: Vec<f64>,
}

impl Bins {
    fn collect(mag: &Plane, layout: &RingLayout, scales: &[f64]) -> Self {
        let w = layout.ring_width();
        let kmin = scales.iter().fold(f64::INFINITY, |a, s| a.min(1.0 / s));
        let kmax = scales.iter().fold(0.0f64, |a, s| a.max(1.0 / s));
        let lo = ((layout.r_min() - GUARD_RINGS as f64 * w) * kmin).max(0.0);
        let hi = ((layout.r_max() + GUARD_RINGS as f64 * w) * kmax).min(0.5);
        let (width, height) = (mag.width(), mag.height());
        let mut b = Bins { radius: vec![], theta: vec![], mirrored: vec![], magnitude: vec![] };
        for y in 0..height {
            for x in 0..width {
                let (fx, fy) = normalized_frequency(x, y, width, height);
                let r = (fx * fx + fy * fy).sqrt();
                if r > 0.0 && r >= lo && r < hi {
                    let (t, m) = canonical_angle(fx, fy);
                    b.radius.push(r);
                    b.theta.push(t);
                    b.mirrored.push(m);
                    b.magnitude.push(mag.get(x, y));
                }
            }
        }
        b
    }
}

fn check_band_populated(bins: &Bins, layout: &RingLayout) -> Result<()> {
    let ns = layout.num_sectors();
    let mut counts = vec![0usize; layout.num_cells()];
    for i in 0..bins.radius.len() {
        let r = bins.radius[i];
        if r >= layout.r_min() && r < layout.r_max() {
            let ring = (((r - layout.r_min()) / layout.ring_width()) as usize).min(layout.num_rings() - 1);
            counts[ring * ns + sector_index(bins.theta[i], bins.mirrored[i], 0.0, ns)] += 1;
        }
    }
    if counts.contains(&0) {
        return Err(Error::Geometry("payload band has cells without spectrum bins".into()));
    }
    Ok(())
}

/// One evaluated (scale, rotation) candidate.
#[derive(Debug, Clone)]
struct Candidate {
    k: f64,
    phi: f64,
    separation: f64,
    contrast: f64,
    bits: Vec<bool>,
    /// Normalized excess per capacity slot.
    excess: Vec<f64>,
    energies: Vec<Vec<f64>>,
}

struct Selection {
    statistic: CellStatistic,
    peak_separation: f64,
    rotation_deg: f64,
    chosen: Candidate,
}

fn search(
    bins: &Bins,
    layout: &RingLayout,
    stat: CellStatistic,
    scales: &[f64],
    rotations: &[f64],
    min_side: usize,
) -> Option<Selection> {
    let ring_w = layout.ring_width();
    let nt = layout.num_rings() + 2 * GUARD_RINGS;
    let near_dc = 1.5 / min_side as f64;

    let per_scale: Vec<(f64, Vec<usize>, Vec<bool>)> = scales
        .iter()
        .filter_map(|&s| {
            let k = 1.0 / s;
            let inner = (layout.r_min() - GUARD_RINGS as f64 * ring_w) * k;
            let width = ring_w * k;
            if layout.r_max() * k >= 0.5 {
                return None;
            }
            let usable: Vec<bool> = (0..nt)
                .map(|i| {
                    let lo = inner + i as f64 * width;
                    let hi = lo + width;
                    let guard = i < GUARD_RINGS || i >= GUARD_RINGS + layout.num_rings();
                    !guard || (lo > near_dc && hi <= 0.5)
                })
                .collect();
            let rings = bins
                .radius
                .iter()
                .map(|&r| {
                    let t = (r - inner) / width;
                    if t < 0.0 || t >= nt as f64 {
                        usize::MAX
                    } else {
                        (t as usize).min(nt - 1)
                    }
                })
                .collect();
            Some((k, rings, usable))
        })
        .collect();
    if per_scale.is_empty() {
        return None;
    }

    let jobs: Vec<(usize, f64)> =
        (0..per_scale.len()).flat_map(|si| rotations.iter().map(move |&phi| (si, phi))).collect();
    let cands: Vec<Candidate> = jobs
        .par_iter()
        .map(|&(si, phi)| {
            let (k, rings, usable) = &per_scale[si];
            evaluate(bins, layout, stat, *k, rings, usable, phi, ring_w)
        })
        .collect();

    let b0 = cands.iter().max_by(|a, b| a.separation.total_cmp(&b.separation))?;
    let peak_separation = b0.separation;
    let bk = b0.k;
    let at_k: Vec<&Candidate> = cands.iter().filter(|c| c.k == bk).collect();
    let ones: Vec<bool> = b0.bits.clone();
    let score = |c: &Candidate| class_contrast(&c.excess, &ones);
    let vals: Vec<f64> = at_k.iter().map(|c| score(c)).collect();
    let (mut idx, mut phi) = (0usize, at_k[0].phi);
    if at_k.len() > 1 {
        let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-9 * top.abs().max(1e-300);
        let i_max = vals.iter().position(|v| *v >= top - tol).unwrap_or(0);
        let mut j_end = i_max;
        while j_end + 1 < vals.len() && vals[j_end + 1] >= top - tol {
            j_end += 1;
        }
        if j_end > i_max {
            // Flat optimum: take the middle of the plateau.
            idx = (i_max + j_end) / 2;
            phi = (at_k[i_max].phi + at_k[j_end].phi) / 2.0;
        } else {
            idx = i_max;
            phi = at_k[idx].phi;
            if idx > 0 && idx + 1 < vals.len() {
                let (cm, c0, cp) = (vals[idx - 1], vals[idx], vals[idx + 1]);
                let den = cm - 2.0 * c0 + cp;
                if den < 0.0 {
                    let step = at_k[1].phi - at_k[0].phi;
                    phi += 0.5 * (cm - cp) / den * step;
                }
            }
        }
    }
    Some(Selection { statistic: stat, peak_separation, rotation_deg: phi, chosen: at_k[idx].clone() })
}

fn class_contrast(x: &[f64], ones: &[bool]) -> f64 {
    let (mut s1, mut n1, mut s0, mut n0) = (0.0, 0usize, 0.0, 0usize);
    for (v, b) in x.iter().zip(ones) {
        if *b {
            s1 += v;
            n1 += 1;
        } else {
            s0 += v;
            n0 += 1;
        }
    }
    let m1 = if n1 > 0 { s1 / n1 as f64 } else { 0.0 };
    let m0 = if n0 > 0 { s0 / n0 as f64 } else { 0.0 };
    m1 - m0
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    bins: &Bins,
    layout: &RingLayout,
    stat: CellStatistic,
    k: f64,
    rings: &[usize],
    usable: &[bool],
    phi_deg: f64,
    ring_w: f64,
) -> Candidate {
    let nr = layout.num_rings();
    let nt = nr + 2 * GUARD_RINGS;
    let ns = layout.num_sectors();
    let rot = phi_deg.to_radians();
    let mut acc = vec![0.0f64; nt * ns];
    let mut cnt = vec![0usize; nt * ns];
    for i in 0..bins.radius.len() {
        let ring = rings[i];
        if ring == usize::MAX {
            continue;
        }
        let cell = ring * ns + sector_index(bins.theta[i], bins.mirrored[i], rot, ns);
        let m = bins.magnitude[i];
        match stat {
            CellStatistic::Peak => acc[cell] = acc[cell].max(m),
            _ => acc[cell] += m,
        }
        cnt[cell] += 1;
    }
    let mut energy = vec![0.0f64; nt * ns];
    for c in 0..nt * ns {
        if cnt[c] > 0 {
            energy[c] = if stat == CellStatistic::Peak { acc[c] } else { acc[c] / cnt[c] as f64 };
        }
    }
    let emax = energy.iter().cloned().fold(0.0f64, f64::max);
    let floor = (ENERGY_FLOOR * emax).max(f64::MIN_POSITIVE);

    let inner = (layout.r_min() - GUARD_RINGS as f64 * ring_w) * k;
    let center = |i: usize| inner + (i as f64 + 0.5) * ring_w * k;
    let mut obs: Vec<(usize, f64, f64)> = vec![];
    for i in (0..nt).filter(|&i| (i < GUARD_RINGS || i >= GUARD_RINGS + nr) && usable[i]) {
        for j in 0..ns {
            if cnt[i * ns + j] > 0 {
                obs.push((j, center(i), energy[i * ns + j].max(floor).ln()));
            }
        }
    }
    let baseline = Baseline::fit(&obs, ns);

    let half = ns / 2;
    let mut excess = vec![0.0; nr * half];
    let mut p_sum = 0.0;
    let mut energies = vec![vec![0.0; ns]; nr];
    for i in 0..nr {
        let rc = center(GUARD_RINGS + i);
        for j in 0..ns {
            let e = energy[(GUARD_RINGS + i) * ns + j];
            energies[i][j] = e;
            let p = baseline.predict(j, rc);
            p_sum += p;
            excess[i * half + j % half] += (e - p) / 2.0;
        }
    }
    let p_mean = p_sum / (nr * ns) as f64;
    if p_mean > 0.0 {
        for v in &mut excess {
            *v /= p_mean;
        }
    }
    let radii: Vec<f64> = (0..nr * half).map(|k| center(GUARD_RINGS + k / half)).collect();
    let (separation, bits, contrast, excess) = split_with_falloff(excess, &radii);
    Candidate { k, phi: phi_deg, separation, contrast, bits, excess, energies }
}

/// `log E = alpha_sector + beta ln r + gamma r^2`, least squares with
/// sector fixed effects. Falls back to fewer radial terms when the guard
/// radii cannot support them.
struct Baseline {
    alpha: Vec<f64>,
    beta: f64,
    gamma: f64,
}

impl Baseline {
    fn fit(obs: &[(usize, f64, f64)], ns: usize) -> Self {
        let global = if obs.is_empty() { 0.0 } else { obs.iter().map(|o| o.2).sum::<f64>() / obs.len() as f64 };
        let mut n = vec![0usize; ns];
        let mut my = vec![0.0; ns];
        let mut ml = vec![0.0; ns];
        let mut mq = vec![0.0; ns];
        for &(j, r, y) in obs {
            n[j] += 1;
            my[j] += y;
            ml[j] += r.ln();
            mq[j] += r * r;
        }
        for j in 0..ns {
            if n[j] > 0 {
                let c = n[j] as f64;
                my[j] /= c;
                ml[j] /= c;
                mq[j] /= c;
            }
        }
        let (mut sll, mut slq, mut sqq, mut sly, mut sqy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(j, r, y) in obs {
            let (l, q, yy) = (r.ln() - ml[j], r * r - mq[j], y - my[j]);
            sll += l * l;
            slq += l * q;
            sqq += q * q;
            sly += l * yy;
            sqy += q * yy;
        }
        let det = sll * sqq - slq * slq;
        let scale = sll * sqq;
        let (beta, gamma) = if scale > 0.0 && det > 1e-10 * scale {
            ((sly * sqq - sqy * slq) / det, (sqy * sll - sly * slq) / det)
        } else if sll > 1e-12 {
            (sly / sll, 0.0)
        } else {
            (0.0, 0.0)
        };
        let alpha = (0..ns)
            .map(|j| if n[j] > 0 { my[j] - beta * ml[j] - gamma * mq[j] } else { global })
            .collect();
        Baseline { alpha, beta, gamma }
    }

    fn predict(&self, sector: usize, r: f64) -> f64 {
        (self.alpha[sector] + self.beta * r.ln() + self.gamma * r * r).exp()
    }
}

/// Fisher split after removing a radial `exp(-d r^2)` fall-off of the
/// 1-class level, as left by blur. `d` is fitted on the current 1-class and
/// clamped to `[0, MAX_FALLOFF]`, so unblurred input passes through.
fn split_with_falloff(x: Vec<f64>, r: &[f64]) -> (f64, Vec<bool>, f64, Vec<f64>) {
    let (mut sep, mut bits, mut contrast) = fisher_split(&x);
    let mut cur = x.clone();
    for _ in 0..3 {
        let d = falloff(&x, r, &bits);
        if d == 0.0 {
            break;
        }
        let ones: Vec<f64> = (0..x.len()).filter(|&k| bits[k]).map(|k| r[k] * r[k]).collect();
        let r2 = ones.iter().sum::<f64>() / ones.len() as f64;
        cur = x.iter().zip(r).map(|(v, rk)| v * (d * (rk * rk - r2)).exp()).collect();
        let (s2, b2, c2) = fisher_split(&cur);
        let stable = b2 == bits;
        (sep, bits, contrast) = (s2, b2, c2);
        if stable {
            break;
        }
    }
    (sep, bits, contrast, cur)
}

/// Least-squares `d` in `ln x = c - d r^2` over positive 1-class values.
fn falloff(x: &[f64], r: &[f64], bits: &[bool]) -> f64 {
    let pts: Vec<(f64, f64)> = (0..x.len()).filter(|&k| bits[k] && x[k] > 0.0).map(|k| (r[k] * r[k], x[k].ln())).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let (mq, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let (sqq, sqy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mq).powi(2), b + (p.0 - mq) * (p.1 - my)));
    if sqq <= 1e-18 {
        return 0.0;
    }
    (-sqy / sqq).clamp(0.0, MAX_FALLOFF)
}

/// Two-class split of `x` with an extra zero sample pinned to class 0.
///
/// Returns the best Fisher score `(m1 - m0) / pooled_sd`, the bits
/// (`x > cut`) and the class-mean difference.
pub(crate) fn fisher_split(x: &[f64]) -> (f64, Vec<bool>, f64) {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    let mut best = (0.0, f64::NAN, 0.0);
    // prefix sums over the sorted values
    let mut ps = vec![0.0; n + 1];
    let mut ps2 = vec![0.0; n + 1];
    for i in 0..n {
        ps[i + 1] = ps[i] + v[i];
        ps2[i + 1] = ps2[i] + v[i] * v[i];
    }
    for c in 0..n {
        let n0 = (c + 1) as f64;
        let n1 = (n - c) as f64;
        let s0 = ps[c];
        let m0 = s0 / n0;
        let s1 = ps[n] - ps[c];
        let m1 = s1 / n1;
        if m1 <= m0 {
            continue;
        }
        let ss0 = ps2[c] - n0 * m0 * m0;
        let ss1 = (ps2[n] - ps2[c]) - n1 * m1 * m1;
        let dof = (n + 1).saturating_sub(2).max(1) as f64;
        let sd = ((ss0 + ss1).max(0.0) / dof).sqrt().max(MIN_SPREAD);
        let f = (m1 - m0) / sd;
        if f > best.0 {
            let cut = if c == 0 { f64::NEG_INFINITY } else { (v[c - 1] + v[c]) / 2.0 };
            best = (f, cut, m1 - m0);
        }
    }
    if best.1.is_nan() {
        return (0.0, vec![false; n], 0.0);
    }
    let bits = x.iter().map(|&xi| xi > best.1).collect();
    (best.0, bits, best.2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fisher_split_separates_two_levels() {
        let x = [0.01, -0.02, 1.0, 0.98, 0.0, 1.03, 0.02, 0.99];
        let (sep, bits, contrast) = fisher_split(&x);
        assert_eq!(bits, vec![false, false, true, true, false, true, false, true]);
        assert!(sep > 20.0);
        assert!((contrast - 1.0).abs() < 0.05);
    }

    #[test]
    fn fisher_split_all_ones_uses_anchor() {
        let (sep, bits, _) = fisher_split(&[1.0, 1.01, 0.99, 1.0]);
        assert!(bits.iter().all(|b| *b));
        assert!(sep > 10.0);
    }

    #[test]
    fn fisher_split_no_signal() {
        let (sep, bits, _) = fisher_split(&[-1.0, -1.0, -1.0]);
        assert_eq!(sep, 0.0);
        assert!(bits.iter().all(|b| !*b));
    }

    #[test]
    fn baseline_recovers_exact_model() {
        let mut obs = vec![];
        for j in 0..4 {
            for r in [0.05, 0.07, 0.22, 0.25] {
                let y = 0.3 * j as f64 - 1.7 * f64::ln(r) + 4.0 * r * r;
                obs.push((j, r, y));
            }
        }
        let b = Baseline::fit(&obs, 4);
        assert!((b.beta + 1.7).abs() < 1e-8);
        assert!((b.gamma - 4.0).abs() < 1e-6);
        let p = b.predict(2, 0.15).ln();
        assert!((p - (0.6 - 1.7 * f64::ln(0.15) + 4.0 * 0.0225)).abs() < 1e-8);
    }

    #[test]
    fn occluded_pixels_are_inpainted_smoothly() {
        let f = OcclusionFill::default();
        // a black column inside a horizontal ramp is restored to the ramp
        let ramp = Plane::from_fn(9, 5, |x, _| 0.2 + 0.05 * x as f64);
        let mut hit = ramp.clone();
        for y in 0..5 {
            hit.set(4, y, 0.0);
        }
        let out = fill_occluded(&hit, &f);
        for y in 0..5 {
            assert!((out.get(4, y) - ramp.get(4, y)).abs() < 1e-3);
        }
        assert_eq!(fill_occluded(&ramp, &f), ramp);
        let flat = Plane::constant(3, 3, 1.0);
        assert_eq!(fill_occluded(&flat, &f), flat);
    }

    #[test]
    fn falloff_recovers_gaussian_decay() {
        let r: Vec<f64> = (0..12).map(|k| 0.08 + 0.01 * k as f64).collect();
        let bits: Vec<bool> = (0..12).map(|k| k % 3 != 0).collect();
        let x: Vec<f64> = r.iter().zip(&bits).map(|(r, b)| if *b { 2.0 * (-20.0 * r * r).exp() } else { 0.0 }).collect();
        assert!((falloff(&x, &r, &bits) - 20.0).abs() < 1e-9);
        let grow: Vec<f64> = r.iter().map(|r| (5.0 * r).exp()).collect();
        assert_eq!(falloff(&grow, &r, &[true; 12]), 0.0);
        let (_, got, _, flat) = split_with_falloff(x, &r);
        assert_eq!(got, bits);
        let ones: Vec<f64> = flat.iter().zip(&bits).filter(|(_, b)| **b).map(|(v, _)| *v).collect();
        assert!(ones.iter().all(|v| (v - ones[0]).abs() < 1e-9));
    }
}
