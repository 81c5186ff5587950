use alloc::vec::Vec;

use crate::geometry::Point3;
use crate::math;

/// Translation and scale applied by [`normalize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub centroid: Point3,
    pub scale: f64,
}

impl Normalization {
    pub fn apply(&self, p: &Point3) -> Point3 {
        [0, 1, 2].map(|a| (p[a] - self.centroid[a]) / self.scale)
    }

    pub fn invert(&self, p: &Point3) -> Point3 {
        [0, 1, 2].map(|a| p[a] * self.scale + self.centroid[a])
    }
}

/// Centers a cloud on its centroid and scales it into the unit ball.
/// A cloud whose points all coincide keeps scale 1.
pub fn normalize(points: &[Point3]) -> (Vec<Point3>, Normalization) {
    let n = points.len().max(1) as f64;
    let mut centroid = [0.0; 3];
    for p in points {
        for a in 0..3 {
            centroid[a] += p[a];
        }
    }
    let centroid = centroid.map(|s| s / n);
    let max_norm = points
        .iter()
        .map(|p| math::sqrt((0..3).map(|a| math::powi(p[a] - centroid[a], 2)).sum()))
        .fold(0.0, f64::max);
    let scale = if max_norm > 0.0 { max_norm } else { 1.0 };
    let t = Normalization { centroid, scale };
    (points.iter().map(|p| t.apply(p)).collect(), t)
}
