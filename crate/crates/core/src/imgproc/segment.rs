//! Leaf/background separation and the geometric bookkeeping of the leaf region.

use std::collections::VecDeque;

use crate::error::{Error, Result};

use super::contour::{step_counts, trace_outer_boundary};
use super::hull::{convex_contains, convex_hull, Point};
use super::raster::{gray_of, RasterImage};

/// Otsu's threshold over a 256-bin histogram. Class 0 is `value <= t`.
///
/// With fewer than two populated bins there is no split; the returned threshold
/// is one below the lowest populated value (saturating), so every counted value
/// lands in class 1.
pub fn otsu_threshold(hist: &[u64; 256]) -> u8 {
    let total: u64 = hist.iter().sum();
    let lowest = hist.iter().position(|&c| c > 0).unwrap_or(0);
    let populated = hist.iter().filter(|&&c| c > 0).count();
    if total == 0 || populated < 2 {
        return lowest.saturating_sub(1) as u8;
    }
    let total_f = total as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as f64 * c as f64)
        .sum();

    let mut best_t = lowest;
    let mut best_var = -1.0;
    let mut w0 = 0.0;
    let mut sum0 = 0.0;
    for (t, &count) in hist.iter().enumerate().take(255) {
        w0 += count as f64;
        sum0 += t as f64 * count as f64;
        let w1 = total_f - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let var = w0 * w1 * (m0 - m1) * (m0 - m1);
        if var > best_var {
            best_var = var;
            best_t = t;
        }
    }
    best_t as u8
}

pub fn histogram(values: impl IntoIterator<Item = u8>) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for v in values {
        hist[v as usize] += 1;
    }
    hist
}

/// Keeps the largest 8-connected foreground component (first in raster order on ties).
pub fn largest_component(mask: &[u8], width: usize, height: usize) -> Vec<u8> {
    let mut label = vec![0u32; mask.len()];
    let mut best: Option<(u32, usize)> = None;
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if mask[start] == 0 || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        queue.push_back(start);
        let mut size = 0usize;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = ((i % width) as i64, (i / width) as i64);
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                        continue;
                    }
                    let j = ny as usize * width + nx as usize;
                    if mask[j] != 0 && label[j] == 0 {
                        label[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((next, size));
        }
    }
    match best {
        Some((keep, _)) => label.iter().map(|&l| u8::from(l == keep)).collect(),
        None => vec![0; mask.len()],
    }
}

/// Fills background regions that are not 4-connected to the frame border.
pub fn fill_holes(mask: &[u8], width: usize, height: usize) -> Vec<u8> {
    let mut outside = vec![false; mask.len()];
    let mut queue = VecDeque::new();
    let seed = |i: usize, outside: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
        if mask[i] == 0 && !outside[i] {
            outside[i] = true;
            queue.push_back(i);
        }
    };
    for x in 0..width {
        seed(x, &mut outside, &mut queue);
        seed((height - 1) * width + x, &mut outside, &mut queue);
    }
    for y in 0..height {
        seed(y * width, &mut outside, &mut queue);
        seed(y * width + width - 1, &mut outside, &mut queue);
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = (i % width, i / width);
        let mut push = |j: usize| {
            if mask[j] == 0 && !outside[j] {
                outside[j] = true;
                queue.push_back(j);
            }
        };
        if x > 0 {
            push(i - 1);
        }
        if x + 1 < width {
            push(i + 1);
        }
        if y > 0 {
            push(i - width);
        }
        if y + 1 < height {
            push(i + width);
        }
    }
    outside.iter().map(|&o| u8::from(!o)).collect()
}

/// The segmented leaf region and every geometric quantity derived from it.
///
/// Coordinates are pixel centres: `x` is the column, `y` the row.
#[derive(Debug, Clone)]
pub struct LeafMask {
    mask: RasterImage,
    contour: Vec<(i64, i64)>,
    centroid: Point,
    hull: Vec<Point>,
    area: usize,
    perimeter: f64,
    convex_area: usize,
    convex_perimeter: f64,
    major_axis: f64,
    minor_axis: f64,
    bbox: (usize, usize, usize, usize),
}

impl LeafMask {
    /// Canonicalizes a binary mask (largest 8-connected component, holes filled)
    /// and measures it.
    pub fn from_binary(mask: &RasterImage) -> Result<Self> {
        if mask.channels() != 1 {
            return Err(Error::InvalidInput("leaf mask must be single-channel".into()));
        }
        let (w, h) = (mask.width(), mask.height());
        let bin: Vec<u8> = mask.pixels().iter().map(|&p| u8::from(p != 0)).collect();
        let comp = largest_component(&bin, w, h);
        let filled = fill_holes(&comp, w, h);
        Self::measure(RasterImage::new(w, h, 1, filled)?)
    }

    fn measure(mask: RasterImage) -> Result<Self> {
        let (w, h) = (mask.width(), mask.height());
        let px = mask.pixels();

        let mut area = 0usize;
        let (mut sx, mut sy) = (0u64, 0u64);
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..h {
            for x in 0..w {
                if px[y * w + x] != 0 {
                    area += 1;
                    sx += x as u64;
                    sy += y as u64;
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        if area == 0 {
            return Err(Error::SegmentationFailed("mask has no foreground pixels".into()));
        }
        let centroid = Point::new(sx as f64 / area as f64, sy as f64 / area as f64);
        let (major_axis, minor_axis) = ellipse_axes(px, w, h, centroid, area)?;

        let contour = trace_outer_boundary(px, w, h);
        let (straight, diagonal) = step_counts(&contour);
        let perimeter = straight as f64 + std::f64::consts::SQRT_2 * diagonal as f64;

        let pts: Vec<Point> = contour
            .iter()
            .map(|&(x, y)| Point::new(x as f64, y as f64))
            .collect();
        let hull = convex_hull(&pts)?;
        let convex_perimeter = digital_polygon_length(&hull);

        let mut convex_area = 0usize;
        for y in y0..=y1 {
            for x in x0..=x1 {
                if convex_contains(&hull, Point::new(x as f64, y as f64)) {
                    convex_area += 1;
                }
            }
        }

        Ok(Self {
            mask,
            contour,
            centroid,
            hull,
            area,
            perimeter,
            convex_area,
            convex_perimeter,
            major_axis,
            minor_axis,
            bbox: (x0, y0, x1, y1),
        })
    }

    pub fn mask(&self) -> &RasterImage {
        &self.mask
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.mask.get(x, y, 0) != 0
    }

    pub fn contour(&self) -> &[(i64, i64)] {
        &self.contour
    }

    pub fn centroid(&self) -> Point {
        self.centroid
    }

    pub fn hull(&self) -> &[Point] {
        &self.hull
    }

    pub fn area(&self) -> usize {
        self.area
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn convex_area(&self) -> usize {
        self.convex_area
    }

    pub fn convex_perimeter(&self) -> f64 {
        self.convex_perimeter
    }

    /// Inclusive bounding box `(x_min, y_min, x_max, y_max)`.
    pub fn bbox(&self) -> (usize, usize, usize, usize) {
        self.bbox
    }

    pub fn width(&self) -> usize {
        self.mask.width()
    }

    pub fn height(&self) -> usize {
        self.mask.height()
    }
}

/// `(major, minor)` axis lengths of the mask's equivalent ellipse.
pub fn axis_lengths(mask: &LeafMask) -> (f64, f64) {
    (mask.major_axis, mask.minor_axis)
}

/// Equivalent-ellipse axes from second-order central moments: `4·sqrt(λ)` for each
/// eigenvalue of the pixel-coordinate covariance.
fn ellipse_axes(px: &[u8], w: usize, h: usize, c: Point, area: usize) -> Result<(f64, f64)> {
    let (mut mxx, mut myy, mut mxy) = (0.0, 0.0, 0.0);
    for y in 0..h {
        for x in 0..w {
            if px[y * w + x] != 0 {
                let dx = x as f64 - c.x;
                let dy = y as f64 - c.y;
                mxx += dx * dx;
                myy += dy * dy;
                mxy += dx * dy;
            }
        }
    }
    let n = area as f64;
    let (mxx, myy, mxy) = (mxx / n, myy / n, mxy / n);
    let half_trace = 0.5 * (mxx + myy);
    let disc = (0.25 * (mxx - myy).powi(2) + mxy * mxy).sqrt();
    let l1 = half_trace + disc;
    let l2 = half_trace - disc;
    if l2.is_nan() || l2 <= 1e-9 * l1.max(1.0) {
        return Err(Error::DegenerateGeometry(
            "region has no extent along its minor axis".into(),
        ));
    }
    Ok((4.0 * l1.sqrt(), 4.0 * l2.sqrt()))
}

/// Length of a closed lattice polygon measured as 8-connected chain steps
/// (axis steps 1, diagonal steps √2): each edge of displacement `(dx, dy)` costs
/// `max - min + √2·min`. This matches the contour perimeter estimator, so the
/// hull of a contour is never longer than the contour itself.
pub fn digital_polygon_length(poly: &[Point]) -> f64 {
    let mut axial = 0.0;
    let mut diag = 0.0;
    for (i, a) in poly.iter().enumerate() {
        let b = poly[(i + 1) % poly.len()];
        let dx = (b.x - a.x).abs();
        let dy = (b.y - a.y).abs();
        axial += dx.max(dy) - dx.min(dy);
        diag += dx.min(dy);
    }
    axial + std::f64::consts::SQRT_2 * diag
}

/// Global Otsu segmentation of a single leaf on a plain background.
///
/// Both threshold classes are candidates; the one touching fewer frame-border
/// pixels is taken as the leaf.
pub fn segment_leaf(img: &RasterImage) -> Result<LeafMask> {
    let gray = gray_of(img);
    let (w, h) = (gray.width(), gray.height());
    let t = otsu_threshold(&histogram(gray.pixels().iter().copied()));

    let above: Vec<u8> = gray.pixels().iter().map(|&v| u8::from(v > t)).collect();
    let n_above = above.iter().filter(|&&v| v != 0).count();
    if n_above == 0 || n_above == above.len() {
        return Err(Error::SegmentationFailed(
            "image has no foreground/background contrast".into(),
        ));
    }
    let border_hits = |m: &[u8]| -> usize {
        (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .filter(|&(x, y)| x == 0 || y == 0 || x + 1 == w || y + 1 == h)
            .filter(|&(x, y)| m[y * w + x] != 0)
            .count()
    };
    let below: Vec<u8> = above.iter().map(|&v| 1 - v).collect();
    let (ha, hb) = (border_hits(&above), border_hits(&below));
    let fg = if ha < hb || (ha == hb && n_above <= above.len() - n_above) {
        above
    } else {
        below
    };
    LeafMask::from_binary(&RasterImage::new(w, h, 1, fg)?)
}
