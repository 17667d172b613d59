//! Logarithmic potentials of unit measures, level regions `E_mu(r)`, the
//! radius of m-meromorphy and potential discrepancies.
//!
//! All potential values are binary64: acceptance tolerances here are 1e-2
//! or coarser, and level-region membership only needs a few digits.
//!
//! Level grids trace `{e^{-U} = r}` by marching squares and test
//! connectivity of `{e^{-U} < r}` by flood fill.

use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::io::{self, Write};

use num_complex::Complex64;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpair;
use crate::geometry::{CompactSet, GridSpec};
use crate::model::{PoleList, TargetFunction};
use crate::poly::{Polynomial, Root, RootSet};
use crate::table::DiscretePointMeasure;

/// Relative slack added to `r` when boundary points must count as inside.
pub const LEVEL_BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("potential undefined at pole {0}: it is an atom of the measure")]
    PoleAtAtom(Complex64),
    #[error("the compact set E has no admissible sample points")]
    EmptySet,
}

/// A unit measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Measure {
    Discrete(DiscretePointMeasure),
    UniformCircle {
        #[serde(with = "cpair::one")]
        center: Complex64,
        radius: f64,
    },
    /// Equilibrium measure of the real segment `[a, b]`.
    ArcsineInterval {
        a: f64,
        b: f64,
    },
}

impl Measure {
    pub fn counting(points: Vec<Complex64>) -> Option<Self> {
        DiscretePointMeasure::new(points).map(Self::Discrete)
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        let bad = |m: &str| Err(PotentialError::InvalidMeasure(m.to_string()));
        match self {
            Self::Discrete(d) if d.points().is_empty() => bad("discrete measure without points"),
            Self::UniformCircle { radius, .. } if !(radius.is_finite() && *radius > 0.0) => {
                bad("circle radius must be positive")
            }
            Self::ArcsineInterval { a, b } if !(a.is_finite() && b.is_finite() && a < b) => {
                bad("arcsine interval needs a < b")
            }
            _ => Ok(()),
        }
    }

    /// Support points, for discrete measures.
    pub fn atoms(&self) -> &[Complex64] {
        match self {
            Self::Discrete(d) => d.points(),
            _ => &[],
        }
    }
}

/// `U^mu(z)`; `+inf` at atoms of a discrete measure.
pub fn potential_value(mu: &Measure, z: Complex64) -> f64 {
    match mu {
        Measure::Discrete(d) => {
            let mut sum = 0.0;
            for &t in d.points() {
                let dist = (z - t).norm();
                if dist == 0.0 {
                    return f64::INFINITY;
                }
                sum += dist.ln();
            }
            -sum * d.weight()
        }
        Measure::UniformCircle { center, radius } => -(z - center).norm().max(*radius).ln(),
        Measure::ArcsineInterval { a, b } => {
            let half = (b - a) / 2.0;
            let w = (z - Complex64::new((a + b) / 2.0, 0.0)) / half;
            let s = (w * w - 1.0).sqrt();
            let t = if (w + s).norm() >= 1.0 { w + s } else { w - s };
            LN_2 - t.norm().ln() - half.ln()
        }
    }
}

/// `e^{-U^mu(z)}`, which is 0 at atoms.
pub fn level_value(mu: &Measure, z: Complex64) -> f64 {
    (-potential_value(mu, z)).exp()
}

/// `(rho_min, rho_max)` of `e^{-U^mu}` over `e`.
///
/// Catalog pairs with constant potential on `e` return the exact constant.
/// Otherwise the extrema are taken over `e.sample_points(grid)`, skipping
/// atoms (infinite potential).
pub fn rho_extrema(e: &CompactSet, mu: &Measure, grid: &GridSpec) -> Result<(f64, f64), PotentialError> {
    e.validate().map_err(|_| PotentialError::EmptySet)?;
    match (e, mu) {
        (
            CompactSet::Disk { center: ce, radius: re } | CompactSet::Circle { center: ce, radius: re },
            Measure::UniformCircle { center, radius },
        ) if ce == center && re <= radius => return Ok((*radius, *radius)),
        (CompactSet::Interval { a: ea, b: eb }, Measure::ArcsineInterval { a, b }) if ea == a && eb == b => {
            let cap = (b - a) / 4.0;
            return Ok((cap, cap));
        }
        _ => {}
    }
    let levels: Vec<f64> = e
        .sample_points(grid)
        .into_par_iter()
        .map(|z| level_value(mu, z))
        .filter(|&v| v > 0.0)
        .collect();
    if levels.is_empty() {
        return Err(PotentialError::EmptySet);
    }
    let lo = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = levels.iter().copied().fold(0.0, f64::max);
    Ok((lo, hi))
}

/// `E_mu(r) = { z : e^{-U^mu(z)} < r }`; `r = +inf` is the whole plane.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRegion {
    pub measure: Measure,
    pub r: f64,
}

impl LevelRegion {
    pub fn new(measure: Measure, r: f64) -> Self {
        Self { measure, r }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.r == f64::INFINITY || level_value(&self.measure, z) < self.r
    }

    /// Membership with boundary points counted as inside.
    pub fn contains_closed(&self, z: Complex64) -> bool {
        self.r == f64::INFINITY || level_value(&self.measure, z) < self.r + LEVEL_BOUNDARY_TOL * self.r.max(1.0)
    }
}

/// `R_{m,mu}`, the poles below it, and their monic polynomial `Q_f`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeromorphyReport {
    /// `+inf` when `f` has at most `m` poles (serialized as `null`).
    pub r_m: f64,
    pub poles_inside: PoleList,
    pub q_f: Polynomial,
    /// Level `e^{-U}` of each pole, ascending, with multiplicity.
    pub pole_levels: Vec<f64>,
}

impl MeromorphyReport {
    pub fn domain(&self, mu: &Measure) -> LevelRegion {
        LevelRegion::new(mu.clone(), self.r_m)
    }
}

/// Levels of the poles sorted ascending; `R_m` is the `(m+1)`-th.
pub fn radius_of_meromorphy(
    f: &TargetFunction,
    mu: &Measure,
    m: usize,
    e: &CompactSet,
) -> Result<MeromorphyReport, crate::Error> {
    f.validate_against(e)?;
    let mut levels: Vec<(f64, Complex64)> = Vec::new();
    for pole in f.poles().iter() {
        let s = level_value(mu, pole.value);
        if s == 0.0 {
            return Err(PotentialError::PoleAtAtom(pole.value).into());
        }
        levels.extend(std::iter::repeat((s, pole.value)).take(pole.multiplicity));
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0).then(crate::poly::lex_cmp(&a.1, &b.1)));
    let r_m = levels.get(m).map_or(f64::INFINITY, |l| l.0);
    let inside: Vec<Root> = f
        .poles()
        .iter()
        .filter(|p| level_value(mu, p.value) < r_m)
        .copied()
        .collect();
    let poles_inside = RootSet::new(inside);
    let q_f = Polynomial::from_roots(&poles_inside, Complex64::one());
    Ok(MeromorphyReport {
        r_m,
        poles_inside,
        q_f,
        pole_levels: levels.into_iter().map(|l| l.0).collect(),
    })
}

/// `max |U^{mu1} - U^{mu2}|` over test points, skipping atoms of either.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Discrepancy {
    pub value: f64,
    /// Test points skipped because they hit an atom.
    pub skipped: usize,
}

pub fn potential_discrepancy(mu1: &Measure, mu2: &Measure, test_points: &[Complex64]) -> Discrepancy {
    let mut value: f64 = 0.0;
    let mut skipped = 0;
    for &z in test_points {
        let (u1, u2) = (potential_value(mu1, z), potential_value(mu2, z));
        if u1.is_infinite() || u2.is_infinite() {
            skipped += 1;
        } else {
            value = value.max((u1 - u2).abs());
        }
    }
    Discrepancy { value, skipped }
}

/// `e^{-U}` sampled on a square lattice, with a level-set threshold.
#[derive(Clone, Debug)]
pub struct LevelGrid {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Row-major: `values[j * nx + i]` at `(xs[i], ys[j])`.
    values: Vec<f64>,
    r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Edge {
    /// Between lattice points `(i, j)` and `(i + 1, j)`.
    H(usize, usize),
    /// Between lattice points `(i, j)` and `(i, j + 1)`.
    V(usize, usize),
}

impl LevelGrid {
    /// Sample `region` on `[-half_width, half_width]^2` with `resolution`
    /// points per axis.
    pub fn sample(region: &LevelRegion, half_width: f64, resolution: usize) -> Self {
        let res = resolution.max(2);
        let axis: Vec<f64> = (0..res)
            .map(|k| -half_width + 2.0 * half_width * k as f64 / (res - 1) as f64)
            .collect();
        let values: Vec<f64> = (0..res * res)
            .into_par_iter()
            .map(|idx| level_value(&region.measure, Complex64::new(axis[idx % res], axis[idx / res])))
            .collect();
        Self {
            xs: axis.clone(),
            ys: axis,
            values,
            r: region.r,
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.xs.len() + i]
    }

    fn inside(&self, i: usize, j: usize) -> bool {
        self.at(i, j) < self.r
    }

    /// Write `x,y,e_minus_U,inside_flag` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,y,e_minus_U,inside_flag")?;
        for j in 0..self.ys.len() {
            for i in 0..self.xs.len() {
                writeln!(
                    w,
                    "{},{},{},{}",
                    crate::fmt_f64(self.xs[i]),
                    crate::fmt_f64(self.ys[j]),
                    crate::fmt_f64(self.at(i, j)),
                    u8::from(self.inside(i, j))
                )?;
            }
        }
        Ok(())
    }

    fn crossing(&self, e: Edge) -> Complex64 {
        let ((i0, j0), (i1, j1)) = match e {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (a, b) = (self.at(i0, j0) - self.r, self.at(i1, j1) - self.r);
        let t = if a == b { 0.5 } else { (a / (a - b)).clamp(0.0, 1.0) };
        let p0 = Complex64::new(self.xs[i0], self.ys[j0]);
        let p1 = Complex64::new(self.xs[i1], self.ys[j1]);
        p0 + (p1 - p0) * t
    }

    fn segments(&self) -> Vec<(Edge, Edge)> {
        let (nx, ny) = (self.xs.len(), self.ys.len());
        let mut out = Vec::new();
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let corners = [
                    self.inside(i, j),
                    self.inside(i + 1, j),
                    self.inside(i + 1, j + 1),
                    self.inside(i, j + 1),
                ];
                // cell edges in counterclockwise order: bottom, right, top, left
                let edges = [Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j)];
                let crossing: Vec<Edge> = (0..4)
                    .filter(|&k| corners[k] != corners[(k + 1) % 4])
                    .map(|k| edges[k])
                    .collect();
                match crossing.len() {
                    2 => out.push((crossing[0], crossing[1])),
                    4 => {
                        // saddle: the cell mean decides which diagonal connects
                        let mean =
                            (self.at(i, j) + self.at(i + 1, j) + self.at(i + 1, j + 1) + self.at(i, j + 1)) / 4.0;
                        if (mean < self.r) == corners[0] {
                            out.push((crossing[0], crossing[1]));
                            out.push((crossing[2], crossing[3]));
                        } else {
                            out.push((crossing[3], crossing[0]));
                            out.push((crossing[1], crossing[2]));
                        }
                    }
                    _ => {}
                }
            }
        }
        out
    }

    /// Level curves `{e^{-U} = r}` as polylines, longest first.
    pub fn contours(&self) -> Vec<Vec<Complex64>> {
        if !self.r.is_finite() {
            return Vec::new();
        }
        let segments = self.segments();
        let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
        for (k, &(a, b)) in segments.iter().enumerate() {
            by_edge.entry(a).or_default().push(k);
            by_edge.entry(b).or_default().push(k);
        }
        let mut used = vec![false; segments.len()];
        let mut lines: Vec<Vec<Complex64>> = Vec::new();
        let other = |k: usize, e: Edge| {
            if segments[k].0 == e {
                segments[k].1
            } else {
                segments[k].0
            }
        };
        let walk = |start: usize, from: Edge, used: &mut Vec<bool>| -> Vec<Edge> {
            let mut chain = vec![from];
            let mut k = start;
            let mut at = from;
            loop {
                used[k] = true;
                at = other(k, at);
                chain.push(at);
                match by_edge[&at].iter().find(|&&s| !used[s]) {
                    Some(&next) => k = next,
                    None => break,
                }
            }
            chain
        };
        for start in 0..segments.len() {
            if used[start] {
                continue;
            }
            let a = segments[start].0;
            let forward = walk(start, a, &mut used);
            // extend backwards from `a` for open curves
            let chain: Vec<Edge> = match by_edge[&a].iter().find(|&&s| !used[s]) {
                Some(&back) => {
                    let mut rev = walk(back, a, &mut used);
                    rev.reverse();
                    rev.pop();
                    rev.into_iter().chain(forward).collect()
                }
                None => forward,
            };
            lines.push(chain.into_iter().map(|e| self.crossing(e)).collect());
        }
        let length = |l: &Vec<Complex64>| l.windows(2).map(|w| (w[1] - w[0]).norm()).sum::<f64>();
        lines.sort_by(|x, y| length(y).total_cmp(&length(x)).then(crate::poly::lex_cmp(&x[0], &y[0])));
        lines
    }

    /// `count` points spread by arc length over all level curves.
    pub fn boundary_samples(&self, count: usize) -> Vec<Complex64> {
        let lines = self.contours();
        let pieces: Vec<(Complex64, Complex64, f64)> = lines
            .iter()
            .flat_map(|l| l.windows(2).map(|w| (w[0], w[1], (w[1] - w[0]).norm())))
            .collect();
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        if total == 0.0 || count == 0 {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(count);
        let (mut idx, mut start) = (0, 0.0);
        for k in 0..count {
            let s = total * (k as f64 + 0.5) / count as f64;
            while idx + 1 < pieces.len() && s > start + pieces[idx].2 {
                start += pieces[idx].2;
                idx += 1;
            }
            let (a, b, len) = pieces[idx];
            let t = if len > 0.0 {
                ((s - start) / len).clamp(0.0, 1.0)
            } else {
                0.0
            };
            out.push(a + (b - a) * t);
        }
        out
    }

    /// Number of 4-connected components of inside lattice points.
    pub fn components(&self) -> usize {
        let (nx, ny) = (self.xs.len(), self.ys.len());
        let mut seen = vec![false; nx * ny];
        let mut count = 0;
        for start in 0..nx * ny {
            if seen[start] || !self.inside(start % nx, start / nx) {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(idx) = stack.pop() {
                let (i, j) = (idx % nx, idx / nx);
                let mut visit = |ii: usize, jj: usize| {
                    let k = jj * nx + ii;
                    if !seen[k] && self.inside(ii, jj) {
                        seen[k] = true;
                        stack.push(k);
                    }
                };
                if i > 0 {
                    visit(i - 1, j);
                }
                if i + 1 < nx {
                    visit(i + 1, j);
                }
                if j > 0 {
                    visit(i, j - 1);
                }
                if j + 1 < ny {
                    visit(i, j + 1);
                }
            }
        }
        count
    }
}
