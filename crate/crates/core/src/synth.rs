//! Procedural test imagery: natural-looking photos, a textured face scene
//! and a disk subject on a plain background.
//!
//! Everything is deterministic in the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{ImageBuffer, Plane};
use crate::spectral::{forward_dft_plane, inverse_dft, normalized_frequency};

/// Zero-mean, unit-variance noise with a `1/f^(beta/2)` amplitude spectrum.
pub fn fractal_noise(width: usize, height: usize, beta: f64, rng: &mut impl Rng) -> Plane {
    let white = Plane::from_fn(width, height, |_, _| StandardNormal.sample(rng));
    let mut spec = forward_dft_plane(&white);
    let floor = 1.0 / width.max(height) as f64;
    for y in 0..height {
        for x in 0..width {
            let (fx, fy) = normalized_frequency(x, y, width, height);
            let r = (fx * fx + fy * fy).sqrt();
            let gain = if r == 0.0 { 0.0 } else { r.max(floor).powf(-beta / 2.0) };
            spec.coeffs_mut()[y * width + x] *= gain;
        }
    }
    let field = inverse_dft(&spec).expect("a real filter keeps conjugate symmetry");
    standardize(&field)
}

fn standardize(p: &Plane) -> Plane {
    let m = p.mean();
    let sd = (p.data().iter().map(|v| (v - m) * (v - m)).sum::<f64>() / p.data().len() as f64).sqrt();
    if sd == 0.0 {
        return Plane::constant(p.width(), p.height(), 0.0);
    }
    p.map(|v| (v - m) / sd)
}

/// A synthetic color photograph: correlated fractal texture, a few flat
/// objects with soft color offsets, a lighting gradient.
pub fn photo(width: usize, height: usize, seed: u64) -> ImageBuffer {
    let planes = photo_channels(width, height, seed, &[0, 1, 2]);
    ImageBuffer::from_planes(&[&planes[0], &planes[1], &planes[2]]).expect("planes share a size")
}

/// The carrier (blue) plane of [`photo`] alone, for cheap null runs.
pub fn photo_plane(width: usize, height: usize, seed: u64) -> Plane {
    photo_channels(width, height, seed, &[2]).remove(0).map(|v| v.clamp(0.0, 1.0))
}

fn photo_channels(width: usize, height: usize, seed: u64, channels: &[usize]) -> Vec<Plane> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = rng.random_range(1.6..2.2);
    let shared = fractal_noise(width, height, beta, &mut rng);
    let tint = fractal_noise(width, height, beta, &mut rng);
    let contrast = rng.random_range(0.08..0.2);
    let base: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.35..0.65));
    let tint_gain: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.4..0.4));
    let (gx, gy) = (rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1));

    let mut planes: Vec<Plane> = channels
        .iter()
        .map(|&c| {
            Plane::from_fn(width, height, |x, y| {
                let i = y * width + x;
                let ramp = gx * (x as f64 / width as f64 - 0.5) + gy * (y as f64 / height as f64 - 0.5);
                base[c] + contrast * (shared.data()[i] + tint_gain[c] * tint.data()[i]) + ramp
            })
        })
        .collect();

    let objects = rng.random_range(2..6);
    for _ in 0..objects {
        let cx = rng.random_range(0.0..width as f64);
        let cy = rng.random_range(0.0..height as f64);
        let scale = width.min(height) as f64 / 390.0;
        let ax = rng.random_range(20.0..150.0) * scale;
        let ay = rng.random_range(20.0..150.0) * scale;
        let lift = rng.random_range(-0.3..0.3);
        let color: [f64; 3] = std::array::from_fn(|_| lift + rng.random_range(-0.08..0.08));
        let xs = (cx - ax).floor().max(0.0) as usize..((cx + ax).ceil().max(0.0) as usize).min(width);
        let ys = (cy - ay).floor().max(0.0) as usize..((cy + ay).ceil().max(0.0) as usize).min(height);
        for (plane, &c) in planes.iter_mut().zip(channels) {
            for y in ys.clone() {
                for x in xs.clone() {
                    let (dx, dy) = ((x as f64 - cx) / ax, (y as f64 - cy) / ay);
                    if dx * dx + dy * dy < 1.0 {
                        let v = plane.get(x, y) + color[c];
                        plane.set(x, y, v);
                    }
                }
            }
        }
    }
    planes
}

/// Head-and-shoulders albedo map on a plain light background.
pub fn face_scene(width: usize, height: usize, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let skin_tex = fractal_noise(width, height, 1.8, &mut rng);
    let cloth_tex = fractal_noise(width, height, 1.4, &mut rng);
    let skin = [rng.random_range(0.70..0.85), rng.random_range(0.50..0.65), rng.random_range(0.40..0.55)];
    let cloth = [rng.random_range(0.15..0.45), rng.random_range(0.15..0.45), rng.random_range(0.25..0.6)];
    let hair = rng.random_range(0.08..0.25);
    let backdrop = [0.92, 0.93, 0.95];
    let (w, h) = (width as f64, height as f64);
    let (hx, hy, ha, hb) = (w * 0.5, h * 0.42, h * 0.23, h * 0.30);
    ImageBuffer::from_fn(width, height, 3, |x, y, c| {
        let (xf, yf) = (x as f64, y as f64);
        let i = y * width + x;
        let head = ((xf - hx) / ha).powi(2) + ((yf - hy) / hb).powi(2);
        let shoulders = ((xf - hx) / (w * 0.42)).powi(2) + ((yf - h * 1.15) / (h * 0.38)).powi(2);
        let eyes = [(hx - ha * 0.4, hy - hb * 0.1), (hx + ha * 0.4, hy - hb * 0.1)]
            .iter()
            .any(|(ex, ey)| ((xf - ex) / (ha * 0.15)).powi(2) + ((yf - ey) / (hb * 0.07)).powi(2) < 1.0);
        let mouth = ((xf - hx) / (ha * 0.35)).powi(2) + ((yf - (hy + hb * 0.45)) / (hb * 0.06)).powi(2) < 1.0;
        if head < 1.0 {
            if eyes {
                return 0.15;
            }
            if mouth {
                return [0.6, 0.3, 0.3][c];
            }
            if yf < hy - hb * 0.55 && head > 0.55 {
                return hair + 0.03 * skin_tex.data()[i];
            }
            skin[c] + 0.06 * skin_tex.data()[i]
        } else if shoulders < 1.0 {
            cloth[c] + 0.08 * cloth_tex.data()[i]
        } else {
            backdrop[c]
        }
    })
    .expect("face scene is built in range")
}

/// A textured disk of radius `radius` centered in a flat light background.
pub fn disk_scene(width: usize, height: usize, radius: f64, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tex = fractal_noise(width, height, 1.8, &mut rng);
    let albedo = [rng.random_range(0.5..0.7), rng.random_range(0.4..0.6), rng.random_range(0.5..0.7)];
    let backdrop = [0.92, 0.93, 0.95];
    let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
    ImageBuffer::from_fn(width, height, 3, |x, y, c| {
        let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
        if d <= radius {
            albedo[c] + 0.08 * tex.data()[y * width + x]
        } else {
            backdrop[c]
        }
    })
    .expect("disk scene is built in range")
}
