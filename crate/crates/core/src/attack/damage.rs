//! Occlusions and the print-scan channel.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::model::{ImageBuffer, Plane};

/// Upper bound on drawn strokes or blobs, guarding against tiny widths.
const MAX_MARKS: usize = 100_000;

/// Adds marks with `draw` until at least `coverage` of the area is painted.
/// Pixels first painted by a mark take that mark's `color` on all channels.
fn cover_until(
    img: &ImageBuffer,
    coverage: f64,
    color: impl Fn(&mut dyn rand::RngCore) -> f64,
    rng: &mut dyn rand::RngCore,
    mut draw: impl FnMut(&mut Vec<bool>, &mut dyn rand::RngCore),
) -> ImageBuffer {
    let (w, h) = (img.width(), img.height());
    let target = (coverage * (w * h) as f64).ceil() as usize;
    let mut painted = vec![false; w * h];
    let mut shade = vec![0.0; w * h];
    let mut covered = 0usize;
    let mut marks = 0;
    while covered < target && marks < MAX_MARKS {
        let before = painted.clone();
        draw(&mut painted, rng);
        let ink = color(rng);
        covered = 0;
        for i in 0..w * h {
            if painted[i] && !before[i] {
                shade[i] = ink;
            }
            covered += painted[i] as usize;
        }
        marks += 1;
    }
    let ch = img.channels();
    let mut px = img.pixels().to_vec();
    for i in 0..w * h {
        if painted[i] {
            for c in 0..ch {
                px[i * ch + c] = shade[i];
            }
        }
    }
    ImageBuffer::new(w, h, ch, px).expect("painting keeps values in range")
}

/// Black straight scratches of `width` pixels until `coverage` of the area
/// is hit.
pub fn scratch(img: &ImageBuffer, coverage: f64, width: f64, rng: &mut dyn rand::RngCore) -> ImageBuffer {
    let (w, h) = (img.width(), img.height());
    let diag = ((w * w + h * h) as f64).sqrt();
    let half = width.max(0.5) / 2.0;
    cover_until(img, coverage, |_| 0.0, rng, |mask, rng| {
        let (x0, y0) = (rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64));
        let ang = rng.random_range(0.0..std::f64::consts::PI);
        let len = rng.random_range(0.1..0.5) * diag;
        let (x1, y1) = (x0 + len * ang.cos(), y0 + len * ang.sin());
        let (bx0, bx1) = (x0.min(x1) - half, x0.max(x1) + half);
        let (by0, by1) = (y0.min(y1) - half, y0.max(y1) + half);
        let (dx, dy) = (x1 - x0, y1 - y0);
        let l2 = dx * dx + dy * dy;
        for y in (by0.floor().max(0.0) as usize)..=(by1.ceil().min(h as f64 - 1.0).max(0.0) as usize) {
            for x in (bx0.floor().max(0.0) as usize)..=(bx1.ceil().min(w as f64 - 1.0).max(0.0) as usize) {
                let (px, py) = (x as f64 - x0, y as f64 - y0);
                let t = ((px * dx + py * dy) / l2).clamp(0.0, 1.0);
                let (ex, ey) = (px - t * dx, py - t * dy);
                if ex * ex + ey * ey <= half * half {
                    mask[y * w + x] = true;
                }
            }
        }
    })
}

/// Dark ink blobs, each a union of a few discs around `radius` in size,
/// until `coverage` of the area is hit.
pub fn smear(img: &ImageBuffer, coverage: f64, radius: f64, rng: &mut dyn rand::RngCore) -> ImageBuffer {
    let (w, h) = (img.width(), img.height());
    let radius = radius.max(1.0);
    cover_until(img, coverage, |rng| rng.random_range(0.05..0.1), rng, |mask, rng| {
        let (cx, cy) = (rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64));
        let discs = rng.random_range(3..7);
        for _ in 0..discs {
            let r = rng.random_range(0.5..1.0) * radius;
            let (ox, oy) = (cx + rng.random_range(-radius..radius), cy + rng.random_range(-radius..radius));
            let ys = (oy - r).floor().max(0.0) as usize..=((oy + r).ceil().min(h as f64 - 1.0).max(0.0) as usize);
            for y in ys {
                for x in (ox - r).floor().max(0.0) as usize..=((ox + r).ceil().min(w as f64 - 1.0).max(0.0) as usize) {
                    if (x as f64 - ox).powi(2) + (y as f64 - oy).powi(2) <= r * r {
                        mask[y * w + x] = true;
                    }
                }
            }
        }
    })
}

/// Separable Gaussian blur with edge clamping.
pub fn gaussian_blur(p: &Plane, sigma: f64) -> Plane {
    if sigma <= 0.0 {
        return p.clone();
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let kernel: Vec<f64> = (-radius..=radius).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let norm: f64 = kernel.iter().sum();
    let kernel: Vec<f64> = kernel.iter().map(|k| k / norm).collect();
    let (w, h) = (p.width() as i64, p.height() as i64);
    let horiz = Plane::from_fn(p.width(), p.height(), |x, y| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, wgt)| wgt * p.get((x as i64 + k as i64 - radius).clamp(0, w - 1) as usize, y))
            .sum()
    });
    Plane::from_fn(p.width(), p.height(), |x, y| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, wgt)| wgt * horiz.get(x, (y as i64 + k as i64 - radius).clamp(0, h - 1) as usize))
            .sum()
    })
}

/// Blur, gamma `v^gamma`, additive Gaussian noise, clamp, 8-bit quantization.
pub fn print_scan(img: &ImageBuffer, blur: f64, noise: f64, gamma: f64, rng: &mut dyn rand::RngCore) -> ImageBuffer {
    let normal = Normal::new(0.0, noise.max(0.0)).expect("sigma is nonnegative");
    let planes: Vec<Plane> = (0..img.channels())
        .map(|c| gaussian_blur(&img.plane(c), blur).map(|v| v.clamp(0.0, 1.0).powf(gamma)))
        .collect();
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let mut px = Vec::with_capacity(w * h * ch);
    for i in 0..w * h {
        for p in &planes {
            let v = (p.data()[i] + normal.sample(rng)).clamp(0.0, 1.0);
            px.push((v * 255.0).round() / 255.0);
        }
    }
    ImageBuffer::new(w, h, ch, px).expect("quantized values are in range")
}
