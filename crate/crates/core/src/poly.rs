//! Complex polynomial arithmetic, rootfinding and common-factor cancellation.
//!
//! Coefficients are stored in ascending degree order and always trimmed, so
//! the leading stored coefficient is nonzero unless the polynomial is the zero
//! polynomial (stored as an empty vector).
//!
//! Roots are computed in binary64 by the Aberth–Ehrlich simultaneous
//! iteration, started from Newton-polygon radii. Higher-precision polynomials
//! are rounded before rootfinding; their coefficients are never rebuilt from
//! the rounded roots.

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::{Complex, Complex64};
use num_traits::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::{lift, lower, Real};

/// Roots closer than this relative distance are reported as one multiple root.
pub const CLUSTER_TOL: f64 = 1e-7;

const MAX_ABERTH_ITERATIONS: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("undefined roots: the zero polynomial has no root set")]
    UndefinedRoots,
    #[error(
        "rootfinding did not converge after {iterations} iterations \
         ({unconverged} of {degree} roots unconverged, worst residual {worst_residual:e})"
    )]
    NoConvergence {
        iterations: usize,
        unconverged: usize,
        degree: usize,
        worst_residual: f64,
    },
    #[error("root {root} fails the residual check: |p(r)| = {residual:e} > {bound:e}")]
    ResidualCheck { root: Complex64, residual: f64, bound: f64 },
}

/// Relative distance used for root clustering and factor matching.
pub fn relative_distance(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Lexicographic (real, imaginary) ordering.
pub fn lex_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// A root with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Roots of a polynomial, sorted lexicographically.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RootSet {
    roots: Vec<Root>,
}

impl RootSet {
    pub fn new(mut roots: Vec<Root>) -> Self {
        roots.retain(|r| r.multiplicity > 0);
        roots.sort_by(|a, b| lex_cmp(&a.value, &b.value));
        Self { roots }
    }

    /// Each value counted once.
    pub fn simple(values: impl IntoIterator<Item = Complex64>) -> Self {
        Self::new(
            values
                .into_iter()
                .map(|value| Root { value, multiplicity: 1 })
                .collect(),
        )
    }

    /// Group values into clusters of relative diameter `tol` (single linkage)
    /// and report centroids with multiplicities.
    pub fn clustered(mut values: Vec<Complex64>, tol: f64) -> Self {
        values.sort_by(lex_cmp);
        let n = values.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                if relative_distance(values[i], values[j]) <= tol {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
        for (i, &v) in values.iter().enumerate() {
            let g = find(&mut parent, i);
            match groups.iter_mut().find(|(root, _, _)| *root == g) {
                Some((_, sum, count)) => {
                    *sum += v;
                    *count += 1;
                }
                None => groups.push((g, v, 1)),
            }
        }
        Self::new(
            groups
                .into_iter()
                .map(|(_, sum, count)| Root {
                    value: sum / count as f64,
                    multiplicity: count,
                })
                .collect(),
        )
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn iter(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Every root repeated according to its multiplicity.
    pub fn expanded(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat(r.value).take(r.multiplicity))
            .collect()
    }
}

impl Serialize for RootSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<(f64, f64, usize)> = self
            .roots
            .iter()
            .map(|r| (r.value.re, r.value.im, r.multiplicity))
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RootSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<(f64, f64, usize)> = Vec::deserialize(d)?;
        Ok(Self::new(
            rows.into_iter()
                .map(|(re, im, multiplicity)| Root {
                    value: Complex64::new(re, im),
                    multiplicity,
                })
                .collect(),
        ))
    }
}

/// Polynomial with complex coefficients over the scalar backend `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<R: Real = f64> {
    coeffs: Vec<Complex<R>>,
}

impl<R: Real> Polynomial<R> {
    /// Build from ascending coefficients, trimming exact zeros at the top.
    pub fn new(mut coeffs: Vec<Complex<R>>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex<R>) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Complex::new(R::one(), R::zero()))
    }

    /// The monic linear factor `z - root`.
    pub fn linear(root: Complex<R>) -> Self {
        Self::new(vec![-root, Complex::new(R::one(), R::zero())])
    }

    pub fn coeffs(&self) -> &[Complex<R>] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<R>> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Complex<R> {
        self.coeffs.last().copied().unwrap_or_else(Complex::zero)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex<R>) -> Complex<R> {
        self.coeffs.iter().rev().fold(Complex::zero(), |acc, &c| acc * z + c)
    }

    /// Largest coefficient modulus.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|&c| lower(c).norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: Complex<R>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * R::from_usize(k))
                .collect(),
        )
    }

    /// Coefficients of `p(z0 + w)` in powers of `w`.
    pub fn taylor_at(&self, z0: Complex<R>) -> Vec<Complex<R>> {
        // repeated synthetic division by (z - z0)
        let mut work = self.coeffs.clone();
        let n = work.len();
        for k in 0..n {
            for j in (k..n - 1).rev() {
                let upper = work[j + 1];
                work[j] += upper * z0;
            }
        }
        work
    }

    /// Monic-times-`leading` expansion of the given roots.
    pub fn from_root_values(roots: &[Complex<R>], leading: Complex<R>) -> Self {
        let mut coeffs = vec![leading];
        for &r in roots {
            coeffs.push(Complex::zero());
            for k in (1..coeffs.len()).rev() {
                let prev = coeffs[k - 1];
                coeffs[k] = prev - r * coeffs[k];
            }
            coeffs[0] = -r * coeffs[0];
        }
        Self::new(coeffs)
    }

    /// Expansion `leading * prod (z - r)^mult`.
    pub fn from_roots(roots: &RootSet, leading: Complex<R>) -> Self {
        let values: Vec<Complex<R>> = roots.expanded().into_iter().map(lift).collect();
        Self::from_root_values(&values, leading)
    }

    /// Divide by `z - r`, returning quotient and remainder `p(r)`.
    ///
    /// Forward (Horner) deflation is used for `|r| <= 1`, backward deflation
    /// from the constant term otherwise, which keeps both directions stable.
    pub fn deflate(&self, r: Complex<R>) -> (Self, Complex<R>) {
        let d = match self.degree() {
            None | Some(0) => return (Self::zero(), self.eval(r)),
            Some(d) => d,
        };
        let a = &self.coeffs;
        let mut q = vec![Complex::zero(); d];
        if lower(r).norm() <= 1.0 {
            q[d - 1] = a[d];
            for k in (1..d).rev() {
                q[k - 1] = a[k] + r * q[k];
            }
            let rem = a[0] + r * q[0];
            (Self::new(q), rem)
        } else {
            q[0] = -a[0] / r;
            for k in 1..d {
                q[k] = (q[k - 1] - a[k]) / r;
            }
            let rem = a[d] - q[d - 1];
            (Self::new(q), rem * r)
        }
    }

    pub fn to_f64(&self) -> Polynomial<f64> {
        Polynomial::new(self.coeffs.iter().map(|&c| lower(c)).collect())
    }

    pub fn lift_from(p: &Polynomial<f64>) -> Self {
        Self::new(p.coeffs.iter().map(|&c| lift(c)).collect())
    }

    /// All roots with multiplicities; see [`poly_roots`].
    pub fn roots(&self, tol: f64) -> Result<RootSet, PolyError> {
        poly_roots(&self.to_f64(), tol)
    }
}

impl<R: Real> Add for &Polynomial<R> {
    type Output = Polynomial<R>;
    fn add(self, rhs: Self) -> Polynomial<R> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or_else(Complex::zero)
                        + rhs.coeffs.get(k).copied().unwrap_or_else(Complex::zero)
                })
                .collect(),
        )
    }
}

impl<R: Real> Neg for &Polynomial<R> {
    type Output = Polynomial<R>;
    fn neg(self) -> Polynomial<R> {
        Polynomial::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

impl<R: Real> Sub for &Polynomial<R> {
    type Output = Polynomial<R>;
    fn sub(self, rhs: Self) -> Polynomial<R> {
        self + &(-rhs)
    }
}

impl<R: Real> Mul for &Polynomial<R> {
    type Output = Polynomial<R>;
    fn mul(self, rhs: Self) -> Polynomial<R> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Complex::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl<R: Real> Serialize for Polynomial<R> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self
            .coeffs
            .iter()
            .map(|&c| {
                let c = lower(c);
                [c.re, c.im]
            })
            .collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial<f64> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        if pairs.iter().flatten().any(|x| !x.is_finite()) {
            return Err(D::Error::custom("polynomial coefficients must be finite"));
        }
        Ok(Self::new(
            pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        ))
    }
}

/// Initial Aberth guesses from the upper convex hull of `(k, log|a_k|)`.
fn newton_polygon_guesses(a: &[Complex64]) -> Vec<Complex64> {
    let d = a.len() - 1;
    let pts: Vec<(usize, f64)> = a
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(k, c)| (k, c.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (o, a1) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a1.0 as f64 - o.0 as f64) * (p.1 - o.1) - (a1.1 - o.1) * (p.0 as f64 - o.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut guesses = Vec::with_capacity(d);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (k0, l0) = w[0];
        let (k1, l1) = w[1];
        let count = k1 - k0;
        let radius = ((l0 - l1) / count as f64).exp();
        for j in 0..count {
            let angle = TAU * j as f64 / count as f64 + TAU * k0 as f64 / d as f64 + sigma;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}

/// Value and derivative by Horner.
fn eval_with_derivative(a: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    for &c in a.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Rounding-error bound of Horner's scheme at `z`.
fn horner_bound(a: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    a.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

fn aberth(a: &[Complex64]) -> Result<Vec<Complex64>, PolyError> {
    let d = a.len() - 1;
    if d == 1 {
        return Ok(vec![-a[0] / a[1]]);
    }
    let mut z = newton_polygon_guesses(a);
    let mut done = vec![false; d];
    let eps = f64::EPSILON;
    for _iteration in 0..MAX_ABERTH_ITERATIONS {
        if done.iter().all(|&x| x) {
            return Ok(z);
        }
        for i in 0..d {
            if done[i] {
                continue;
            }
            let (p, dp) = eval_with_derivative(a, z[i]);
            if p.norm() <= 4.0 * eps * horner_bound(a, z[i]) {
                done[i] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..d).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                // nudge off a critical point
                let kick = Complex64::new(eps.sqrt(), eps.sqrt()) * (1.0 + z[i].norm());
                z[i] += kick;
                continue;
            }
            z[i] -= step;
            // The Newton correction, not the Aberth step: near a colliding
            // estimate the repulsion term makes the step tiny.
            if ratio.norm() <= eps * z[i].norm() {
                done[i] = true;
            }
        }
    }
    let worst = z
        .iter()
        .zip(&done)
        .filter(|(_, &ok)| !ok)
        .map(|(&zi, _)| eval_with_derivative(a, zi).0.norm() / horner_bound(a, zi).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let unconverged = done.iter().filter(|&&x| !x).count();
    // Multiple roots converge linearly and stall at the noise level; accept
    // them when the backward error is still tiny.
    if worst <= eps.sqrt() {
        return Ok(z);
    }
    Err(PolyError::NoConvergence {
        iterations: MAX_ABERTH_ITERATIONS,
        unconverged,
        degree: d,
        worst_residual: worst,
    })
}

/// Refine each root of multiplicity `k` by Newton on `p^(k-1)`, where it is
/// simple. Refinements that leave the cluster radius are discarded.
fn polish_clusters(p: &Polynomial<f64>, roots: RootSet) -> RootSet {
    let mut derivatives = vec![p.clone()];
    let polished = roots
        .iter()
        .map(|r| {
            while derivatives.len() < r.multiplicity {
                let next = derivatives.last().unwrap().derivative();
                derivatives.push(next);
            }
            let g = &derivatives[r.multiplicity - 1];
            let dg = g.derivative();
            let mut z = r.value;
            for _ in 0..8 {
                let (num, den) = (g.eval(z), dg.eval(z));
                if num.is_zero() || den.is_zero() {
                    break;
                }
                let step = num / den;
                z -= step;
                if step.norm() <= f64::EPSILON * z.norm().max(1.0) {
                    break;
                }
            }
            let moved = relative_distance(z, r.value);
            let value = if z.re.is_finite() && z.im.is_finite() && moved <= 10.0 * CLUSTER_TOL {
                z
            } else {
                r.value
            };
            Root {
                value,
                multiplicity: r.multiplicity,
            }
        })
        .collect();
    RootSet::new(polished)
}

/// All roots of `p` with multiplicities.
///
/// Roots within relative distance [`CLUSTER_TOL`] are merged into one root
/// with multiplicity. Each reported root `r` is checked against
/// `|p(r)| <= tol * scale(p) * max(1, |r|)^deg`.
pub fn poly_roots(p: &Polynomial<f64>, tol: f64) -> Result<RootSet, PolyError> {
    let d = p.degree().ok_or(PolyError::UndefinedRoots)?;
    if d == 0 {
        return Ok(RootSet::default());
    }
    let a = p.coeffs();
    let zeros_at_origin = a.iter().take_while(|c| c.is_zero()).count();
    let rest = &a[zeros_at_origin..];
    let mut values = vec![Complex64::zero(); zeros_at_origin];
    if rest.len() > 1 {
        values.extend(aberth(rest)?);
    }
    let roots = polish_clusters(p, RootSet::clustered(values, CLUSTER_TOL));
    let scale = p.scale();
    for r in roots.iter() {
        let residual = p.eval(r.value).norm();
        let bound = tol * scale * r.value.norm().max(1.0).powi(d as i32);
        if residual > bound {
            return Err(PolyError::ResidualCheck {
                root: r.value,
                residual,
                bound,
            });
        }
    }
    Ok(roots)
}

/// Expansion `leading * prod (z - r)^mult` in binary64.
pub fn poly_from_roots(roots: &RootSet, leading: Complex64) -> Polynomial<f64> {
    Polynomial::from_roots(roots, leading)
}

/// Cancel root pairs of `p` and `q` closer than `tol_gcd` (relative).
///
/// Matching is greedy nearest-first with lexicographic tie-breaking; each
/// matched root is divided out of its own polynomial, so coefficients keep the
/// backend's precision. A zero numerator returns `(0, 1)`.
pub fn remove_common_factors<R: Real>(
    p: &Polynomial<R>,
    q: &Polynomial<R>,
    tol_gcd: f64,
) -> Result<(Polynomial<R>, Polynomial<R>), PolyError> {
    if q.is_zero() {
        return Err(PolyError::UndefinedRoots);
    }
    if p.is_zero() {
        return Ok((Polynomial::zero(), Polynomial::one()));
    }
    if p.degree() == Some(0) || q.degree() == Some(0) {
        return Ok((p.clone(), q.clone()));
    }
    let p_roots = p.roots(1e-6)?.expanded();
    let q_roots = q.roots(1e-6)?.expanded();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &a) in p_roots.iter().enumerate() {
        for (j, &b) in q_roots.iter().enumerate() {
            let dist = relative_distance(a, b);
            if dist <= tol_gcd {
                candidates.push((dist, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then_with(|| lex_cmp(&p_roots[x.1], &p_roots[y.1]))
            .then_with(|| lex_cmp(&q_roots[x.2], &q_roots[y.2]))
    });
    let mut used_p = vec![false; p_roots.len()];
    let mut used_q = vec![false; q_roots.len()];
    let (mut p_out, mut q_out) = (p.clone(), q.clone());
    for (_, i, j) in candidates {
        if used_p[i] || used_q[j] {
            continue;
        }
        used_p[i] = true;
        used_q[j] = true;
        p_out = p_out.deflate(lift(p_roots[i])).0;
        q_out = q_out.deflate(lift(q_roots[j])).0;
    }
    Ok((p_out, q_out))
}
