//! Graham scan convex hull and small polygon helpers.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Twice the signed area of triangle `o, a, b`; positive when `a -> b` turns counter-clockwise
/// about `o` in a y-up frame.
#[inline]
pub fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Strictly convex hull of `points`, counter-clockwise (y-up orientation), starting at the
/// lowest point (ties broken by smallest x). Collinear boundary points are dropped.
pub fn convex_hull(points: &[Point]) -> Result<Vec<Point>> {
    if points.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "convex hull needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::InvalidInput("non-finite hull coordinate".into()));
    }

    let pivot = *points
        .iter()
        .min_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)))
        .expect("non-empty");

    let mut rest: Vec<Point> = points.iter().copied().filter(|&p| p != pivot).collect();
    rest.sort_by(|&a, &b| {
        let c = cross(pivot, a, b);
        if c > 0.0 {
            Ordering::Less
        } else if c < 0.0 {
            Ordering::Greater
        } else {
            pivot.dist(a).total_cmp(&pivot.dist(b))
        }
    });
    rest.dedup();

    let mut stack: Vec<Point> = Vec::with_capacity(rest.len() + 1);
    stack.push(pivot);
    for p in rest {
        while stack.len() >= 2 && cross(stack[stack.len() - 2], stack[stack.len() - 1], p) <= 0.0 {
            stack.pop();
        }
        stack.push(p);
    }

    if stack.len() < 3 {
        return Err(Error::DegenerateGeometry("all points are collinear".into()));
    }
    Ok(stack)
}

/// Euclidean perimeter of a closed polygon.
pub fn polygon_perimeter(poly: &[Point]) -> f64 {
    if poly.len() < 2 {
        return 0.0;
    }
    poly.iter()
        .zip(poly.iter().cycle().skip(1))
        .map(|(&a, &b)| a.dist(b))
        .sum()
}

/// True when `p` lies inside or on a counter-clockwise convex polygon.
#[inline]
pub fn convex_contains(poly: &[Point], p: Point) -> bool {
    poly.iter()
        .zip(poly.iter().cycle().skip(1))
        .all(|(&a, &b)| cross(a, b, p) >= 0.0)
}
