//! 2-D DFT, magnitude extraction and ring/sector cell sampling.
//!
//! All spectra are DC-centered: index `(x, y)` holds frequency
//! `(x - W/2, y - H/2)`, normalized frequency `((x - W/2) / W, (y - H/2) / H)`.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::{ImageBuffer, Plane, RingLayout};

/// Relative imaginary energy an inverse transform may leave behind.
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

/// DC-centered complex spectrum of a real plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    width: usize,
    height: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(width: usize, height: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if width == 0 || height == 0 || coeffs.len() != width * height {
            return Err(Error::Shape(format!("spectrum {width}x{height} with {} coefficients", coeffs.len())));
        }
        Ok(Self { width, height, coeffs })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.coeffs[y * self.width + x]
    }

    /// Index of the bin mirrored through DC.
    pub fn mirror_index(&self, x: usize, y: usize) -> (usize, usize) {
        mirror_bin(x, y, self.width, self.height)
    }

    /// Normalized frequency of a bin.
    pub fn frequency(&self, x: usize, y: usize) -> (f64, f64) {
        normalized_frequency(x, y, self.width, self.height)
    }

    pub fn dc(&self) -> Complex64 {
        self.get(self.width / 2, self.height / 2)
    }
}

pub(crate) fn mirror_bin(x: usize, y: usize, width: usize, height: usize) -> (usize, usize) {
    let u = x as i64 - (width / 2) as i64;
    let v = y as i64 - (height / 2) as i64;
    let mx = (-u).rem_euclid(width as i64) as usize;
    let my = (-v).rem_euclid(height as i64) as usize;
    ((mx + width / 2) % width, (my + height / 2) % height)
}

pub(crate) fn normalized_frequency(x: usize, y: usize, width: usize, height: usize) -> (f64, f64) {
    (
        (x as f64 - (width / 2) as f64) / width as f64,
        (y as f64 - (height / 2) as f64) / height as f64,
    )
}

/// Forward transform of a single-channel image.
pub fn forward_dft(plane: &ImageBuffer) -> Result<Spectrum> {
    if plane.channels() != 1 {
        return Err(Error::Shape(format!("forward_dft needs 1 channel, got {}", plane.channels())));
    }
    Ok(forward_dft_plane(&plane.plane(0)))
}

/// Forward transform of an unrestricted real plane.
pub fn forward_dft_plane(plane: &Plane) -> Spectrum {
    let (w, h) = (plane.width(), plane.height());
    let mut buf: Vec<Complex64> = plane.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut buf, w, h, false);
    let coeffs = shift(&buf, w, h, true);
    Spectrum { width: w, height: h, coeffs }
}

/// Inverse transform; the output is real and unclamped.
///
/// Fails with [`Error::Symmetry`] when the reconstruction keeps more than
/// [`SYMMETRY_TOLERANCE`] of its energy in the imaginary part.
pub fn inverse_dft(spec: &Spectrum) -> Result<Plane> {
    let (w, h) = (spec.width, spec.height);
    let mut buf = shift(&spec.coeffs, w, h, false);
    fft2(&mut buf, w, h, true);
    let n = (w * h) as f64;
    let (mut re2, mut im2) = (0.0, 0.0);
    for c in &mut buf {
        *c /= n;
        re2 += c.re * c.re;
        im2 += c.im * c.im;
    }
    let energy = re2 + im2;
    if energy > 0.0 && im2 > SYMMETRY_TOLERANCE * energy {
        return Err(Error::Symmetry { residue: im2 / energy });
    }
    Plane::new(w, h, buf.into_iter().map(|c| c.re).collect())
}

/// Entry-wise modulus.
pub fn magnitude_plane(spec: &Spectrum) -> Plane {
    let data = spec.coeffs.iter().map(|c| (c.re * c.re + c.im * c.im).sqrt()).collect();
    Plane::new(spec.width, spec.height, data).expect("spectrum dimensions are valid")
}

thread_local! {
    // Plans are cached per thread; the planner keeps them by length.
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

fn transpose(src: &[Complex64], w: usize, h: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); w * h];
    for y in 0..h {
        for x in 0..w {
            out[x * h + y] = src[y * w + x];
        }
    }
    out
}

fn fft2(buf: &mut [Complex64], w: usize, h: usize, inverse: bool) {
    // rows, then columns as rows of the transpose
    plan(w, inverse).process(buf);
    let mut t = transpose(buf, w, h);
    plan(h, inverse).process(&mut t);
    buf.copy_from_slice(&transpose(&t, h, w));
}

/// Moves DC between index 0 (`to_center == false` source) and `(W/2, H/2)`.
fn shift(src: &[Complex64], w: usize, h: usize, to_center: bool) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); w * h];
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = if to_center {
                ((x + w - w / 2) % w, (y + h - h / 2) % h)
            } else {
                ((x + w / 2) % w, (y + h / 2) % h)
            };
            out[y * w + x] = src[sy * w + sx];
        }
    }
    out
}

/// Mean bin magnitude per ring/sector cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    pub layout: RingLayout,
    /// `num_rings` rows of `num_sectors` entries.
    pub energies: Vec<Vec<f64>>,
    pub bin_counts: Vec<Vec<usize>>,
}

impl CellGrid {
    pub fn energy(&self, ring: usize, sector: usize) -> f64 {
        self.energies[ring][sector]
    }

    /// Energies flattened ring-major.
    pub fn flat(&self) -> Vec<f64> {
        self.energies.iter().flatten().copied().collect()
    }
}

/// Samples a DC-centered magnitude plane over a layout.
///
/// Bins with `r_min <= r < r_max` are partitioned into cells; everything
/// else, DC included, is ignored.
pub fn sample_cells(mag: &Plane, layout: &RingLayout) -> Result<CellGrid> {
    let (w, h) = (mag.width(), mag.height());
    let ns = layout.num_sectors();
    let mut sums = vec![0.0; layout.num_cells()];
    let mut counts = vec![0usize; layout.num_cells()];
    for y in 0..h {
        for x in 0..w {
            let (fx, fy) = normalized_frequency(x, y, w, h);
            if let Some((i, j)) = layout.locate(fx, fy, 0.0) {
                sums[i * ns + j] += mag.get(x, y);
                counts[i * ns + j] += 1;
            }
        }
    }
    if let Some(idx) = counts.iter().position(|&n| n == 0) {
        return Err(Error::Geometry(format!(
            "cell (ring {}, sector {}) receives no bins at {w}x{h}",
            idx / ns,
            idx % ns
        )));
    }
    let energies = (0..layout.num_rings())
        .map(|i| (0..ns).map(|j| sums[i * ns + j] / counts[i * ns + j] as f64).collect())
        .collect();
    let bin_counts = (0..layout.num_rings()).map(|i| counts[i * ns..(i + 1) * ns].to_vec()).collect();
    Ok(CellGrid { layout: *layout, energies, bin_counts })
}

/// Magnitude of the carrier plane (blue for color images).
pub fn carrier_magnitude(img: &ImageBuffer) -> Plane {
    magnitude_plane(&forward_dft_plane(&img.carrier_plane()))
}

/// Separable raised-cosine (Hann) taper with value 1 at the center and
/// near 0 at the borders.
pub fn raised_cosine_window(plane: &Plane) -> Plane {
    let (w, h) = (plane.width(), plane.height());
    let taper = |i: usize, n: usize| 0.5 - 0.5 * (std::f64::consts::TAU * (i as f64 + 0.5) / n as f64).cos();
    let wx: Vec<f64> = (0..w).map(|x| taper(x, w)).collect();
    let wy: Vec<f64> = (0..h).map(|y| taper(y, h)).collect();
    Plane::from_fn(w, h, |x, y| plane.get(x, y) * wx[x] * wy[y])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    /// Direct O(N^4) DFT, DC-centered, independent of the FFT path.
    fn naive_dft(plane: &Plane) -> Vec<Complex64> {
        let (w, h) = (plane.width(), plane.height());
        let mut out = vec![Complex64::default(); w * h];
        for ky in 0..h {
            for kx in 0..w {
                let u = kx as f64 - (w / 2) as f64;
                let v = ky as f64 - (h / 2) as f64;
                let mut acc = Complex64::default();
                for y in 0..h {
                    for x in 0..w {
                        let phase = -TAU * (u * x as f64 / w as f64 + v * y as f64 / h as f64);
                        acc += Complex64::from_polar(plane.get(x, y), phase);
                    }
                }
                out[ky * w + kx] = acc;
            }
        }
        out
    }

    fn random_plane(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Plane {
        Plane::from_fn(w, h, |_, _| rng.random::<f64>())
    }

    #[test]
    fn matches_naive_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (w, h) in [(8, 8), (16, 16), (7, 5), (6, 9)] {
            let p = random_plane(&mut rng, w, h);
            let fast = forward_dft_plane(&p);
            let slow = naive_dft(&p);
            for (a, b) in fast.coeffs().iter().zip(&slow) {
                assert!((a - b).norm() < 1e-9, "{w}x{h}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn constant_plane_is_dc_only() {
        let p = Plane::constant(16, 16, 0.3);
        let s = forward_dft_plane(&p);
        for y in 0..16 {
            for x in 0..16 {
                let c = s.get(x, y);
                if (x, y) == (8, 8) {
                    assert!((c.re - 0.3 * 256.0).abs() < 1e-9 && c.im.abs() < 1e-9);
                } else {
                    assert!(c.norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn cosine_gives_conjugate_peaks() {
        let n = 32;
        let (u0, v0) = (3i64, 5i64);
        let p = Plane::from_fn(n, n, |x, y| (TAU * (u0 as f64 * x as f64 + v0 as f64 * y as f64) / n as f64).cos());
        let m = magnitude_plane(&forward_dft_plane(&p));
        let c = (n / 2) as i64;
        let peak = (n * n) as f64 / 2.0;
        for (u, v) in [(u0, v0), (-u0, -v0)] {
            assert!((m.get((c + u) as usize, (c + v) as usize) - peak).abs() < 1e-9);
        }
        let total: f64 = m.data().iter().sum();
        assert!((total - 2.0 * peak).abs() < 1e-7);
    }

    #[test]
    fn dc_only_inverse_is_constant() {
        let n = 12;
        let mut coeffs = vec![Complex64::default(); n * n];
        coeffs[(n / 2) * n + n / 2] = Complex64::new(0.7 * (n * n) as f64, 0.0);
        let p = inverse_dft(&Spectrum::new(n, n, coeffs).unwrap()).unwrap();
        assert!(p.data().iter().all(|v| (v - 0.7).abs() < 1e-12));
    }

    #[test]
    fn hand_placed_peaks_invert_to_closed_form_cosine() {
        let (w, h) = (20usize, 14usize);
        let (u0, v0) = (4i64, -3i64);
        let (amp, phase) = (0.25, 0.6);
        let mut coeffs = vec![Complex64::default(); w * h];
        let at = |u: i64, v: i64| ((v + (h / 2) as i64) as usize) * w + (u + (w / 2) as i64) as usize;
        let half = amp * (w * h) as f64 / 2.0;
        coeffs[at(u0, v0)] = Complex64::from_polar(half, phase);
        coeffs[at(-u0, -v0)] = Complex64::from_polar(half, -phase);
        let p = inverse_dft(&Spectrum::new(w, h, coeffs).unwrap()).unwrap();
        for y in 0..h {
            for x in 0..w {
                let arg = TAU * (u0 as f64 * x as f64 / w as f64 + v0 as f64 * y as f64 / h as f64) + phase;
                assert!((p.get(x, y) - amp * arg.cos()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn asymmetric_spectrum_is_rejected() {
        let n = 8;
        let mut coeffs = vec![Complex64::default(); n * n];
        coeffs[3 * n + 5] = Complex64::new(10.0, 0.0);
        let err = inverse_dft(&Spectrum::new(n, n, coeffs).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Symmetry { .. }));
    }

    #[test]
    fn magnitude_is_modulus() {
        let s = Spectrum::new(1, 1, vec![Complex64::new(3.0, 4.0)]).unwrap();
        assert_eq!(magnitude_plane(&s).data(), &[5.0]);
        let z = Spectrum::new(3, 2, vec![Complex64::default(); 6]).unwrap();
        assert!(magnitude_plane(&z).data().iter().all(|v| *v == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let coeffs: Vec<Complex64> =
            (0..35).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let s = Spectrum::new(7, 5, coeffs.clone()).unwrap();
        for (m, c) in magnitude_plane(&s).data().iter().zip(&coeffs) {
            assert_eq!(*m, (c.re * c.re + c.im * c.im).sqrt());
        }
    }

    #[test]
    fn mirror_index_is_an_involution_matching_conjugates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (w, h) in [(8, 8), (9, 7), (10, 5)] {
            let p = random_plane(&mut rng, w, h);
            let s = forward_dft_plane(&p);
            for y in 0..h {
                for x in 0..w {
                    let (mx, my) = s.mirror_index(x, y);
                    assert_eq!(s.mirror_index(mx, my), (x, y));
                    assert!((s.get(x, y) - s.get(mx, my).conj()).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn constant_magnitude_gives_uniform_cells() {
        let l = RingLayout::new(0.1, 0.4, 3, 8).unwrap();
        let g = sample_cells(&Plane::constant(64, 48, 2.5), &l).unwrap();
        assert!(g.flat().iter().all(|e| (e - 2.5).abs() < 1e-12));
    }

    #[test]
    fn impulse_lands_in_one_cell() {
        let l = RingLayout::new(0.1, 0.4, 3, 8).unwrap();
        let (w, h) = (64, 48);
        let (fx, fy) = l.cell_center(1, 3);
        let x = ((fx * w as f64).round() as i64 + (w / 2) as i64) as usize;
        let y = ((fy * h as f64).round() as i64 + (h / 2) as i64) as usize;
        let mut m = Plane::constant(w, h, 0.0);
        m.set(x, y, 7.0);
        let g = sample_cells(&m, &l).unwrap();
        for i in 0..3 {
            for j in 0..8 {
                let expect = if (i, j) == (1, 3) { 7.0 / g.bin_counts[1][3] as f64 } else { 0.0 };
                assert_eq!(g.energy(i, j), expect);
            }
        }
    }

    #[test]
    fn empty_cell_is_a_geometry_error() {
        let l = RingLayout::new(0.1, 0.4, 3, 16).unwrap();
        assert!(matches!(sample_cells(&Plane::constant(6, 6, 1.0), &l), Err(Error::Geometry(_))));
    }

    #[test]
    fn window_is_symmetric_and_peaks_mid() {
        let w = raised_cosine_window(&Plane::constant(10, 6, 1.0));
        assert!((w.get(0, 0) - w.get(9, 5)).abs() < 1e-12);
        assert!(w.get(5, 3) > 0.9 && w.get(0, 0) < 0.05);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn parseval(w in 8usize..=64, h in 8usize..=64, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_plane(&mut rng, w, h);
            let s = forward_dft_plane(&p);
            let spatial = p.sum_squares();
            let freq: f64 = s.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() / (w * h) as f64;
            prop_assert!(((spatial - freq) / spatial).abs() < 1e-6);
        }

        #[test]
        fn round_trip(w in 2usize..=40, h in 2usize..=40, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_plane(&mut rng, w, h);
            let back = inverse_dft(&forward_dft_plane(&p)).unwrap();
            for (a, b) in p.data().iter().zip(back.data()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn cells_partition_the_annulus(w in 24usize..=80, h in 24usize..=80, seed in any::<u64>()) {
            let l = RingLayout::new(0.12, 0.42, 2, 6).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_plane(&mut rng, w, h);
            let g = sample_cells(&m, &l).unwrap();
            let mut annulus = 0.0;
            let mut bins = 0usize;
            for y in 0..h {
                for x in 0..w {
                    let (fx, fy) = normalized_frequency(x, y, w, h);
                    let r = (fx * fx + fy * fy).sqrt();
                    if r >= 0.12 && r < l.r_min() + 2.0 * l.ring_width() {
                        annulus += m.get(x, y);
                        bins += 1;
                    }
                }
            }
            let mut total = 0.0;
            let mut total_bins = 0usize;
            for i in 0..2 {
                for j in 0..6 {
                    total += g.energies[i][j] * g.bin_counts[i][j] as f64;
                    total_bins += g.bin_counts[i][j];
                }
            }
            prop_assert_eq!(bins, total_bins);
            prop_assert!((total - annulus).abs() <= 1e-9 * annulus.max(1.0));
            prop_assert!(g.flat().iter().all(|e| *e >= 0.0));
        }
    }
}
