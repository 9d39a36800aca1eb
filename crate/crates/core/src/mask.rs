//! Canny edges, subject masks and background clearing.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::attack::gaussian_blur;
use crate::error::{Error, Result};
use crate::model::{ImageBuffer, Plane};

/// Smallest subject area, as a fraction of the image, accepted as a contour.
pub const MIN_SUBJECT_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CannyParams {
    pub sigma: f64,
    /// Hysteresis thresholds as fractions of the strongest gradient.
    pub low: f64,
    pub high: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self { sigma: 1.4, low: 0.1, high: 0.2 }
    }
}

/// Foreground flags per pixel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectMask {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl SubjectMask {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::Shape(format!("mask of {} flags for {width}x{height}", mask.len())));
        }
        Ok(Self { width, height, mask })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn area(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Smallest `(x0, y0, width, height)` window holding every subject
    /// pixel, `None` for an empty mask.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for (i, _) in self.mask.iter().enumerate().filter(|(_, m)| **m) {
            let (x, y) = (i % self.width, i / self.width);
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        (x0 != usize::MAX).then(|| (x0, y0, x1 - x0 + 1, y1 - y0 + 1))
    }

    /// White subject on black background.
    pub fn to_image(&self) -> ImageBuffer {
        let px = self.mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
        ImageBuffer::new(self.width, self.height, 1, px).expect("mask dimensions are valid")
    }

    /// Pixels brighter than one half (on any channel mean) are subject.
    pub fn from_image(img: &ImageBuffer) -> Self {
        let ch = img.channels();
        let mask = img.pixels().chunks_exact(ch).map(|p| p.iter().sum::<f64>() / ch as f64 > 0.5).collect();
        Self { width: img.width(), height: img.height(), mask }
    }
}

/// Canny edge map: Gaussian smoothing, Sobel gradient, non-maximum
/// suppression, double threshold and hysteresis.
pub fn canny(plane: &Plane, params: &CannyParams) -> Vec<bool> {
    let (w, h) = (plane.width(), plane.height());
    let s = gaussian_blur(plane, params.sigma);
    let at = |x: i64, y: i64| s.get(x.clamp(0, w as i64 - 1) as usize, y.clamp(0, h as i64 - 1) as usize);
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    let mut mag = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let dx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let dy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            let i = y as usize * w + x as usize;
            gx[i] = dx;
            gy[i] = dy;
            mag[i] = (dx * dx + dy * dy).sqrt();
        }
    }
    let peak = mag.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return vec![false; w * h];
    }
    let m = |x: i64, y: i64| {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    let mut thin = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let i = y as usize * w + x as usize;
            if mag[i] == 0.0 {
                continue;
            }
            let angle = gy[i].atan2(gx[i]).to_degrees().rem_euclid(180.0);
            let (ox, oy) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            if mag[i] >= m(x + ox, y + oy) && mag[i] >= m(x - ox, y - oy) {
                thin[i] = mag[i];
            }
        }
    }
    let (lo, hi) = (params.low * peak, params.high * peak);
    let mut edge = vec![false; w * h];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (i, &v) in thin.iter().enumerate() {
        if v >= hi {
            edge[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as i64, (i / w) as i64);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !edge[j] && thin[j] >= lo {
                    edge[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    edge
}

/// The largest region enclosed by Canny edges, edges included.
///
/// Edges are found on luminance so a blue-only watermark does not add
/// contours. Everything reachable from the border without crossing an edge
/// is background.
pub fn subject_mask(photo: &ImageBuffer, params: &CannyParams) -> Result<SubjectMask> {
    let (w, h) = (photo.width(), photo.height());
    let edges = canny(&photo.luminance(), params);
    let mut outside = vec![false; w * h];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            if (x == 0 || y == 0 || x == w - 1 || y == h - 1) && !edges[y * w + x] {
                outside[y * w + x] = true;
                queue.push_back(y * w + x);
            }
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = (i % w, i / w);
        let mut visit = |j: usize| {
            if !outside[j] && !edges[j] {
                outside[j] = true;
                queue.push_back(j);
            }
        };
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < w {
            visit(i + 1);
        }
        if y > 0 {
            visit(i - w);
        }
        if y + 1 < h {
            visit(i + w);
        }
    }
    let largest = largest_component(&outside.iter().map(|o| !o).collect::<Vec<_>>(), w, h);
    let area = largest.iter().filter(|m| **m).count();
    if (area as f64) < MIN_SUBJECT_FRACTION * (w * h) as f64 {
        return Err(Error::NoContour { min_fraction: MIN_SUBJECT_FRACTION });
    }
    SubjectMask::new(w, h, largest)
}

/// Largest 8-connected component of `set`.
fn largest_component(set: &[bool], w: usize, h: usize) -> Vec<bool> {
    let mut label = vec![0u32; w * h];
    let mut best = (0u32, 0usize);
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !set[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        queue.push_back(start);
        let mut size = 0usize;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if set[j] && label[j] == 0 {
                        label[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
        if size > best.1 {
            best = (next, size);
        }
    }
    label.iter().map(|&l| l != 0 && l == best.0).collect()
}

/// Replaces every background pixel with `color`.
pub fn clear_background(photo: &ImageBuffer, mask: &SubjectMask, color: &[f64]) -> Result<ImageBuffer> {
    if (mask.width, mask.height) != (photo.width(), photo.height()) {
        return Err(Error::Shape(format!(
            "mask {}x{} vs photo {}x{}",
            mask.width,
            mask.height,
            photo.width(),
            photo.height()
        )));
    }
    let ch = photo.channels();
    if color.len() != ch {
        return Err(Error::Shape(format!("background color has {} channels, photo {ch}", color.len())));
    }
    if let Some(v) = color.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Invalid(format!("background value {v} outside [0, 1]")));
    }
    let mut px = photo.pixels().to_vec();
    for (i, &m) in mask.mask.iter().enumerate() {
        if !m {
            px[i * ch..(i + 1) * ch].copy_from_slice(color);
        }
    }
    ImageBuffer::new(photo.width(), photo.height(), ch, px)
}
