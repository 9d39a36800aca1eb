//! Geometric warps with bilinear resampling.

use crate::model::{ImageBuffer, Plane};

/// Tolerance for source coordinates that fall a rounding error outside
/// the pixel grid.
const EDGE_SLACK: f64 = 1e-6;

/// Bilinear sample at `(x, y)`; `None` outside the pixel-center grid.
fn bilinear(p: &Plane, x: f64, y: f64) -> Option<f64> {
    let (w, h) = (p.width() as f64, p.height() as f64);
    if x < -EDGE_SLACK || y < -EDGE_SLACK || x > w - 1.0 + EDGE_SLACK || y > h - 1.0 + EDGE_SLACK {
        return None;
    }
    let x = x.clamp(0.0, w - 1.0);
    let y = y.clamp(0.0, h - 1.0);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let x1 = (x0 + 1).min(p.width() - 1);
    let y1 = (y0 + 1).min(p.height() - 1);
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let top = p.get(x0, y0) * (1.0 - fx) + p.get(x1, y0) * fx;
    let bottom = p.get(x0, y1) * (1.0 - fx) + p.get(x1, y1) * fx;
    Some(top * (1.0 - fy) + bottom * fy)
}

/// Resamples every channel through `source(x, y)`; outside samples take `fill[c]`.
fn remap(img: &ImageBuffer, width: usize, height: usize, fill: &[f64], source: impl Fn(f64, f64) -> (f64, f64)) -> ImageBuffer {
    let planes: Vec<Plane> = (0..img.channels()).map(|c| img.plane(c)).collect();
    let out: Vec<Plane> = planes
        .iter()
        .enumerate()
        .map(|(c, p)| {
            Plane::from_fn(width, height, |x, y| {
                let (sx, sy) = source(x as f64, y as f64);
                bilinear(p, sx, sy).unwrap_or(fill[c.min(fill.len() - 1)])
            })
        })
        .collect();
    let refs: Vec<&Plane> = out.iter().collect();
    ImageBuffer::from_planes(&refs).expect("remapped planes share a size")
}

/// Rotates content counterclockwise (as displayed) by `deg` about the image
/// center, keeping the canvas size.
pub fn rotate(img: &ImageBuffer, deg: f64, fill: &[f64]) -> ImageBuffer {
    let (cx, cy) = ((img.width() as f64 - 1.0) / 2.0, (img.height() as f64 - 1.0) / 2.0);
    let (s, c) = deg.to_radians().sin_cos();
    remap(img, img.width(), img.height(), fill, |x, y| {
        let (dx, dy) = (x - cx, y - cy);
        (cx + c * dx - s * dy, cy + s * dx + c * dy)
    })
}

/// Resizes the canvas to `width` x `height` with pixel-center alignment and
/// edge clamping.
pub fn resize(img: &ImageBuffer, width: usize, height: usize) -> ImageBuffer {
    let sx = img.width() as f64 / width as f64;
    let sy = img.height() as f64 / height as f64;
    let (mx, my) = ((img.width() - 1) as f64, (img.height() - 1) as f64);
    remap(img, width, height, &[0.0], |x, y| {
        (((x + 0.5) * sx - 0.5).clamp(0.0, mx), ((y + 0.5) * sy - 0.5).clamp(0.0, my))
    })
}

/// Scales the canvas by `s` on both axes.
pub fn scale(img: &ImageBuffer, s: f64) -> ImageBuffer {
    let w = ((img.width() as f64 * s).round() as usize).max(1);
    let h = ((img.height() as f64 * s).round() as usize).max(1);
    resize(img, w, h)
}

/// Horizontal scale of row `y` under a trapezoid of strength `t`: the top
/// row shrinks by `1 - t`, the bottom row is unchanged.
fn row_scale(t: f64, y: f64, height: usize) -> f64 {
    let denom = (height.max(2) - 1) as f64;
    1.0 - t * (1.0 - y / denom)
}

/// Keystone distortion narrowing the top edge.
pub fn trapezoid(img: &ImageBuffer, t: f64, fill: &[f64]) -> ImageBuffer {
    let cx = (img.width() as f64 - 1.0) / 2.0;
    let h = img.height();
    remap(img, img.width(), h, fill, |x, y| (cx + (x - cx) / row_scale(t, y, h), y))
}

/// Exact inverse of [`trapezoid`] inside the covered region.
pub fn untrapezoid(img: &ImageBuffer, t: f64, fill: &[f64]) -> ImageBuffer {
    let cx = (img.width() as f64 - 1.0) / 2.0;
    let h = img.height();
    remap(img, img.width(), h, fill, |x, y| (cx + (x - cx) * row_scale(t, y, h), y))
}
