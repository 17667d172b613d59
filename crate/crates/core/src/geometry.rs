//! Compact sets of the plane and their sampling grids.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpair;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate compact set: {0}")]
    Degenerate(String),
}

/// Grid resolutions used for sup norms, extrema and level-set tracing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Lattice points per axis for interiors and level grids.
    #[serde(default = "GridSpec::default_resolution")]
    pub resolution: usize,
    /// Points per boundary curve.
    #[serde(default = "GridSpec::default_boundary_samples")]
    pub boundary_samples: usize,
}

impl GridSpec {
    fn default_resolution() -> usize {
        400
    }

    fn default_boundary_samples() -> usize {
        2048
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            resolution: Self::default_resolution(),
            boundary_samples: Self::default_boundary_samples(),
        }
    }
}

/// A compact set: closed disk, circle, real interval or closed polygon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CompactSet {
    Disk {
        #[serde(with = "cpair::one")]
        center: Complex64,
        radius: f64,
    },
    Circle {
        #[serde(with = "cpair::one")]
        center: Complex64,
        radius: f64,
    },
    Interval {
        a: f64,
        b: f64,
    },
    Polygon {
        #[serde(with = "cpair::many")]
        vertices: Vec<Complex64>,
    },
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

impl CompactSet {
    pub fn disk(center: Complex64, radius: f64) -> Self {
        Self::Disk { center, radius }
    }

    pub fn circle(center: Complex64, radius: f64) -> Self {
        Self::Circle { center, radius }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |msg: &str| Err(GeometryError::Degenerate(msg.to_string()));
        match self {
            Self::Disk { radius, .. } | Self::Circle { radius, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad("radius must be positive and finite");
                }
            }
            Self::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return bad("interval needs finite a < b");
                }
            }
            Self::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return bad("polygon needs at least three vertices");
                }
                if self.polygon_area().abs() <= f64::EPSILON {
                    return bad("polygon has zero area");
                }
            }
        }
        Ok(())
    }

    fn polygon_area(&self) -> f64 {
        match self {
            Self::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        a.re * b.im - b.re * a.im
                    })
                    .sum::<f64>()
                    / 2.0
            }
            _ => 0.0,
        }
    }

    fn edges(vertices: &[Complex64]) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let n = vertices.len();
        (0..n).map(move |i| (vertices[i], vertices[(i + 1) % n]))
    }

    /// Distance from `z` to the boundary of the set.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        match self {
            Self::Disk { center, radius } | Self::Circle { center, radius } => ((z - center).norm() - radius).abs(),
            Self::Interval { a, b } => segment_distance(z, Complex64::new(*a, 0.0), Complex64::new(*b, 0.0)),
            Self::Polygon { vertices } => Self::edges(vertices)
                .map(|(a, b)| segment_distance(z, a, b))
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn strictly_inside(&self, z: Complex64) -> bool {
        match self {
            Self::Disk { center, radius } => (z - center).norm() < *radius,
            Self::Polygon { vertices } => {
                // even-odd ray casting
                let mut inside = false;
                for (a, b) in Self::edges(vertices) {
                    if (a.im > z.im) != (b.im > z.im) {
                        let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
                        if z.re < x {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
            Self::Circle { .. } | Self::Interval { .. } => false,
        }
    }

    /// Distance from `z` to the set; zero inside.
    pub fn distance(&self, z: Complex64) -> f64 {
        if self.strictly_inside(z) {
            0.0
        } else {
            self.boundary_distance(z)
        }
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.distance(z) <= tol
    }

    pub fn on_boundary(&self, z: Complex64, tol: f64) -> bool {
        self.boundary_distance(z) <= tol
    }

    /// Largest modulus attained on the set.
    pub fn extent(&self) -> f64 {
        match self {
            Self::Disk { center, radius } | Self::Circle { center, radius } => center.norm() + radius,
            Self::Interval { a, b } => a.abs().max(b.abs()),
            Self::Polygon { vertices } => vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    /// `count` points on the boundary, evenly spaced by arc length.
    pub fn boundary_points(&self, count: usize) -> Vec<Complex64> {
        match self {
            Self::Disk { center, radius } | Self::Circle { center, radius } => (0..count)
                .map(|k| center + Complex64::from_polar(*radius, TAU * k as f64 / count as f64))
                .collect(),
            Self::Interval { a, b } => {
                let last = count.max(2) - 1;
                (0..count)
                    .map(|k| Complex64::new(a + (b - a) * k as f64 / last as f64, 0.0))
                    .collect()
            }
            Self::Polygon { vertices } => {
                let lengths: Vec<f64> = Self::edges(vertices).map(|(a, b)| (b - a).norm()).collect();
                let total: f64 = lengths.iter().sum();
                let mut out = Vec::with_capacity(count);
                let (mut edge, mut start) = (0, 0.0);
                for k in 0..count {
                    let s = total * k as f64 / count as f64;
                    while edge + 1 < lengths.len() && s > start + lengths[edge] {
                        start += lengths[edge];
                        edge += 1;
                    }
                    let (a, b) = (vertices[edge], vertices[(edge + 1) % vertices.len()]);
                    let t = if lengths[edge] > 0.0 {
                        (s - start) / lengths[edge]
                    } else {
                        0.0
                    };
                    out.push(a + (b - a) * t.clamp(0.0, 1.0));
                }
                out
            }
        }
    }

    fn bounding_box(&self) -> (Complex64, Complex64) {
        match self {
            Self::Disk { center, radius } | Self::Circle { center, radius } => (
                center - Complex64::new(*radius, *radius),
                center + Complex64::new(*radius, *radius),
            ),
            Self::Interval { a, b } => (Complex64::new(*a, 0.0), Complex64::new(*b, 0.0)),
            Self::Polygon { vertices } => {
                let (mut lo, mut hi) = (vertices[0], vertices[0]);
                for v in vertices {
                    lo = Complex64::new(lo.re.min(v.re), lo.im.min(v.im));
                    hi = Complex64::new(hi.re.max(v.re), hi.im.max(v.im));
                }
                (lo, hi)
            }
        }
    }

    /// Boundary samples followed by interior lattice points.
    ///
    /// Circles and intervals have empty interior, so only their boundary
    /// samples are returned. The lattice is `resolution x resolution` over the
    /// bounding box; only points strictly inside are kept.
    pub fn sample_points(&self, grid: &GridSpec) -> Vec<Complex64> {
        let mut points = self.boundary_points(grid.boundary_samples);
        if matches!(self, Self::Disk { .. } | Self::Polygon { .. }) && grid.resolution > 1 {
            let (lo, hi) = self.bounding_box();
            let res = grid.resolution;
            let step = |k: usize, a: f64, b: f64| a + (b - a) * k as f64 / (res - 1) as f64;
            for j in 0..res {
                for i in 0..res {
                    let z = Complex64::new(step(i, lo.re, hi.re), step(j, lo.im, hi.im));
                    if self.strictly_inside(z) {
                        points.push(z);
                    }
                }
            }
        }
        points
    }
}
