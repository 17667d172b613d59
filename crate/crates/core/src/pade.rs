//! Multipoint Padé approximants on a triangular table.
//!
//! For order `(n, m)` the engine takes row `n + m + 1`, orders it by Leja's
//! rule (repeated nodes kept adjacent) and computes confluent Newton divided
//! differences of `f z^i`, `i = 0..=m`. The denominator coefficients `c` span
//! the null space of
//!
//! ```text
//! A[k][i] = dd(f z^i; x_0 .. x_{n+1+k}),   k = 0..m-1,
//! ```
//!
//! so the Newton coefficients of `g = f q` vanish at orders `n+1..=n+m` and
//! the numerator is the Newton interpolant of `g` truncated at order `n`.
//! Common factors are cancelled, then the denominator is normalized as
//! `prod (z - a') prod (1 - z/a'')` with `a'` inside the level region `D`.
//! Normalization rescales `P` and `Q` by the same constant, so the backend's
//! precision is never lost to re-expansion from rounded roots.

use num_complex::{Complex, Complex64};
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{canonical_phase, minimal_degree_vector, null_space};
use crate::model::{ModelError, TargetFunction};
use crate::poly::{lex_cmp, remove_common_factors, PolyError, Polynomial, RootSet};
use crate::potential::LevelRegion;
use crate::scalar::{cpowi, lift, modulus, Real};
use crate::table::{TableError, TriangularTable};

#[derive(Debug, Error)]
pub enum PadeError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(
        "ill-conditioned build: node residual {residual:e} exceeds {bound:e} \
         (condition estimate {condition:e})"
    )]
    IllConditioned { residual: f64, bound: f64, condition: f64 },
    #[error("normalization singular: the denominator vanishes at 0 outside D")]
    NormalizationSingular,
}

/// How the denominator is scaled after cancellation.
#[derive(Clone, Debug, PartialEq)]
pub enum Normalization {
    /// `prod (z - a') prod (1 - z/a'')`, `a'` inside the region.
    LevelRegion(LevelRegion),
    /// `Q(0) = 1`.
    ConstantTerm,
    /// Leading coefficient 1.
    Monic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuildOptions {
    /// Relative distance at which zero/pole pairs cancel.
    pub tol_gcd: f64,
    /// Node residual bound, relative to `max|f| * max(1, max|Q|)` over nodes.
    pub tol_residual: f64,
    /// Rank cutoff relative to the largest pivot; `None` uses `1e5 * eps`.
    pub rank_tol: Option<f64>,
    pub normalization: Normalization,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            tol_gcd: 1e-8,
            tol_residual: 1e-8,
            rank_tol: None,
            normalization: Normalization::ConstantTerm,
        }
    }
}

/// `pi_{n,m} = P/Q` with diagnostics.
#[derive(Clone, Debug)]
pub struct PadeApproximant<R: Real = f64> {
    pub n: usize,
    pub m: usize,
    pub p: Polynomial<R>,
    pub q: Polynomial<R>,
    pub free_zeros: RootSet,
    pub free_poles: RootSet,
    /// Zeros of `Q` inside `D` (the `a'`); empty unless normalized by region.
    pub alpha_inside: RootSet,
    pub k_n: usize,
    pub degenerate: bool,
    /// Max over nodes of `|f Q - P|` and its derivatives at confluent nodes.
    pub residual: f64,
    pub residual_scale: f64,
    pub condition: f64,
    /// The `n + m + 1` nodes in the order used.
    pub nodes: Vec<Complex64>,
}

impl<R: Real> PadeApproximant<R> {
    pub fn eval(&self, z: Complex<R>) -> Complex<R> {
        self.p.eval(z) / self.q.eval(z)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        #[serde(bound = "")]
        struct Json<'a, R: Real> {
            n: usize,
            m: usize,
            #[serde(rename = "P")]
            p: &'a Polynomial<R>,
            #[serde(rename = "Q")]
            q: &'a Polynomial<R>,
            free_poles: &'a RootSet,
            free_zeros: &'a RootSet,
            residual: f64,
            degenerate: bool,
            k_n: usize,
        }
        serde_json::to_value(Json {
            n: self.n,
            m: self.m,
            p: &self.p,
            q: &self.q,
            free_poles: &self.free_poles,
            free_zeros: &self.free_zeros,
            residual: self.residual,
            degenerate: self.degenerate,
            k_n: self.k_n,
        })
        .expect("approximant fields are serializable")
    }
}

/// Leja order: start at the largest modulus, then repeatedly take the node
/// maximizing the product of distances to those already taken. Equal nodes
/// are emitted together. Ties break lexicographically.
pub fn leja_order(nodes: &[Complex64]) -> Vec<Complex64> {
    let mut groups: Vec<(Complex64, usize)> = Vec::new();
    let mut sorted = nodes.to_vec();
    sorted.sort_by(lex_cmp);
    for z in sorted {
        match groups.last_mut() {
            Some((v, count)) if *v == z => *count += 1,
            _ => groups.push((z, 1)),
        }
    }
    let mut out = Vec::with_capacity(nodes.len());
    let mut taken = vec![false; groups.len()];
    // log of the distance product to the nodes chosen so far
    let mut score: Vec<f64> = groups.iter().map(|(z, _)| z.norm()).collect();
    let mut first = true;
    for _ in 0..groups.len() {
        let mut best: Option<usize> = None;
        for g in 0..groups.len() {
            if taken[g] {
                continue;
            }
            if best.map_or(true, |b| score[g] > score[b]) {
                best = Some(g);
            }
        }
        let b = best.expect("an untaken group remains");
        taken[b] = true;
        let (z, count) = groups[b];
        out.extend(std::iter::repeat(z).take(count));
        if first {
            score.iter_mut().for_each(|s| *s = 0.0);
            first = false;
        }
        for g in 0..groups.len() {
            if !taken[g] {
                score[g] += count as f64 * (groups[g].0 - z).norm().ln();
            }
        }
    }
    out
}

/// Maximal runs of equal nodes as `(start, length)`.
fn blocks(nodes: &[Complex64]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (k, z) in nodes.iter().enumerate() {
        match out.last_mut() {
            Some((s, len)) if nodes[*s] == *z => *len += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

/// Full Newton coefficient table `dd(g; x_0..x_k)`, `k = 0..N-1`.
///
/// `taylor[b]` holds Taylor coefficients of `g` at the node of block `b`, at
/// least as many as the block length. Repeated nodes must be adjacent.
fn newton_coefficients<R: Real>(
    nodes: &[Complex<R>],
    block_of: &[usize],
    taylor: &[Vec<Complex<R>>],
) -> Vec<Complex<R>> {
    let n = nodes.len();
    let mut d: Vec<Complex<R>> = (0..n).map(|k| taylor[block_of[k]][0]).collect();
    let mut out = Vec::with_capacity(n);
    out.push(d[0]);
    for j in 1..n {
        for k in (j..n).rev() {
            d[k] = if block_of[k] == block_of[k - j] {
                taylor[block_of[k]][j]
            } else {
                (d[k] - d[k - 1]) / (nodes[k] - nodes[k - j])
            };
        }
        out.push(d[j]);
    }
    out
}

/// Confluent divided difference of `g` over `nodes`.
///
/// `g(z, k)` returns the Taylor coefficients `0..=k` of `g` at `z`. A block
/// of `k + 1` equal nodes contributes `g^(k)(x) / k!`.
pub fn divided_difference<R: Real, G>(g: G, nodes: &[Complex64]) -> Result<Complex<R>, ModelError>
where
    G: Fn(Complex<R>, usize) -> Result<Vec<Complex<R>>, ModelError>,
{
    let bl = blocks(nodes);
    let mut block_of = vec![0; nodes.len()];
    let mut taylor = Vec::with_capacity(bl.len());
    for (b, &(start, len)) in bl.iter().enumerate() {
        block_of[start..start + len].iter_mut().for_each(|x| *x = b);
        taylor.push(g(lift(nodes[start]), len - 1)?);
    }
    let lifted: Vec<Complex<R>> = nodes.iter().map(|&z| lift(z)).collect();
    Ok(*newton_coefficients(&lifted, &block_of, &taylor)
        .last()
        .expect("at least one node"))
}

/// Product of truncated power series.
fn series_mul<R: Real>(a: &[Complex<R>], b: &[Complex<R>], len: usize) -> Vec<Complex<R>> {
    (0..len)
        .map(|k| {
            (0..=k)
                .filter(|&i| i < a.len() && k - i < b.len())
                .fold(Complex::zero(), |acc: Complex<R>, i| acc + a[i] * b[k - i])
        })
        .collect()
}

/// Taylor coefficients `0..len` of `z^i` at `x`.
fn monomial_taylor<R: Real>(x: Complex<R>, i: usize, len: usize) -> Vec<Complex<R>> {
    let mut out = vec![Complex::zero(); len];
    // binom(i, l) x^(i - l)
    let mut binom = R::one();
    for (l, slot) in out.iter_mut().enumerate().take(i + 1) {
        *slot = cpowi(x, i - l) * binom;
        binom = binom * R::from_usize(i - l) / R::from_usize(l + 1);
    }
    out
}

/// Scale factor and `a'` list for the requested normalization of `q`.
fn normalization_scale<R: Real>(
    q: &Polynomial<R>,
    normalization: &Normalization,
    roots: &RootSet,
) -> Result<(Complex<R>, RootSet), PadeError> {
    match normalization {
        Normalization::Monic => Ok((q.leading().inv(), RootSet::default())),
        Normalization::ConstantTerm => {
            let q0 = q.coeffs()[0];
            if modulus(q0) <= f64::MIN_POSITIVE {
                return Err(PadeError::NormalizationSingular);
            }
            Ok((q0.inv(), RootSet::default()))
        }
        Normalization::LevelRegion(region) => {
            let mut inside = Vec::new();
            let mut denom = q.leading();
            for r in roots.iter() {
                if region.contains_closed(r.value) {
                    inside.push(*r);
                } else {
                    if r.value == Complex64::zero() {
                        return Err(PadeError::NormalizationSingular);
                    }
                    for _ in 0..r.multiplicity {
                        denom *= -lift::<R>(r.value);
                    }
                }
            }
            Ok((denom.inv(), RootSet::new(inside)))
        }
    }
}

/// Normalize `q_raw` as `prod (z - a') prod (1 - z/a'')` against `region`.
pub fn normalize_denominator<R: Real>(q_raw: &Polynomial<R>, region: &LevelRegion) -> Result<Polynomial<R>, PadeError> {
    let roots = if q_raw.degree().unwrap_or(0) == 0 {
        RootSet::default()
    } else {
        q_raw.roots(1e-8)?
    };
    let (s, _) = normalization_scale(q_raw, &Normalization::LevelRegion(region.clone()), &roots)?;
    Ok(q_raw.scaled(s))
}

fn roots_or_empty<R: Real>(p: &Polynomial<R>) -> Result<RootSet, PolyError> {
    match p.degree() {
        None | Some(0) => Ok(RootSet::default()),
        Some(_) => p.roots(1e-8),
    }
}

/// The multipoint Padé approximant of order `(n, m)` on row `n + m + 1`.
pub fn build_pade<R: Real>(
    f: &TargetFunction,
    t: &TriangularTable,
    n: usize,
    m: usize,
    opts: &BuildOptions,
) -> Result<PadeApproximant<R>, PadeError> {
    let nodes = leja_order(&t.row(n + m + 1)?);
    let count = nodes.len();
    let bl = blocks(&nodes);
    let mut block_of = vec![0; count];
    let mut f_taylor: Vec<Vec<Complex<R>>> = Vec::with_capacity(bl.len());
    for (b, &(start, len)) in bl.iter().enumerate() {
        block_of[start..start + len].iter_mut().for_each(|x| *x = b);
        let x = lift::<R>(nodes[start]);
        f_taylor.push(if len == 1 {
            vec![f.eval(x)?]
        } else {
            f.taylor(x, len - 1)?
        });
    }
    let lifted: Vec<Complex<R>> = nodes.iter().map(|&z| lift(z)).collect();

    // Newton coefficients of f z^i
    let tables: Vec<Vec<Complex<R>>> = (0..=m)
        .map(|i| {
            let taylor: Vec<Vec<Complex<R>>> = bl
                .iter()
                .enumerate()
                .map(|(b, &(start, len))| series_mul(&f_taylor[b], &monomial_taylor(lifted[start], i, len), len))
                .collect();
            newton_coefficients(&lifted, &block_of, &taylor)
        })
        .collect();

    // Columns and rows are equilibrated; divided differences of f z^i are
    // strongly graded in both i and k.
    let mut system: Vec<Vec<Complex<R>>> = (0..m)
        .map(|k| (0..=m).map(|i| tables[i][n + 1 + k]).collect())
        .collect();
    let col_scale: Vec<R> = (0..=m)
        .map(|i| {
            let norm = system.iter().fold(R::zero(), |acc, row| acc + row[i].norm_sqr()).sqrt();
            if norm.is_zero() {
                R::one()
            } else {
                norm
            }
        })
        .collect();
    for row in system.iter_mut() {
        for (x, &d) in row.iter_mut().zip(&col_scale) {
            *x /= d;
        }
        let norm = row.iter().fold(R::zero(), |acc, x| acc + x.norm_sqr()).sqrt();
        if !norm.is_zero() {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
    let rank_tol = opts.rank_tol.unwrap_or(1e5 * R::EPSILON);
    let ns = null_space(&system, m + 1, rank_tol);
    let degenerate = ns.basis.len() > 1;
    let mut v = minimal_degree_vector(&ns.basis);
    for (x, &d) in v.iter_mut().zip(&col_scale) {
        *x /= d;
    }
    canonical_phase(&mut v);

    let newton: Vec<Complex<R>> = (0..=n)
        .map(|k| (0..=m).fold(Complex::zero(), |acc: Complex<R>, i| acc + v[i] * tables[i][k]))
        .collect();
    let mut p_coeffs = vec![newton[n]];
    for k in (0..n).rev() {
        // p <- p (z - x_k) + a_k
        let x = lifted[k];
        let mut next = vec![Complex::zero(); p_coeffs.len() + 1];
        for (j, &c) in p_coeffs.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= c * x;
        }
        next[0] += newton[k];
        p_coeffs = next;
    }
    let p_raw = Polynomial::new(p_coeffs);
    let q_raw = Polynomial::new(v.clone());

    let node_residual = |p: &Polynomial<R>, q: &Polynomial<R>| {
        // derivatives through the block length at confluent nodes
        let mut residual: f64 = 0.0;
        let mut f_max: f64 = 0.0;
        let mut q_max: f64 = 0.0;
        for (b, &(start, len)) in bl.iter().enumerate() {
            let x = lifted[start];
            let mut q_t = q.taylor_at(x);
            q_t.resize(len, Complex::zero());
            let mut p_t = p.taylor_at(x);
            p_t.resize(len, Complex::zero());
            let fq = series_mul(&f_taylor[b], &q_t, len);
            for l in 0..len {
                residual = residual.max(modulus(fq[l] - p_t[l]));
            }
            f_max = f_max.max(modulus(f_taylor[b][0]));
            q_max = q_max.max(modulus(q_t[0]));
        }
        (residual, f_max.max(f64::MIN_POSITIVE) * q_max.max(1.0))
    };
    let (residual, residual_scale) = node_residual(&p_raw, &q_raw);
    let bound = opts.tol_residual * residual_scale;
    if residual.is_nan() || residual > bound {
        return Err(PadeError::IllConditioned {
            residual,
            bound,
            condition: ns.condition,
        });
    }

    let (p, q) = remove_common_factors(&p_raw, &q_raw, opts.tol_gcd)?;
    let q_roots = roots_or_empty(&q)?;
    let (s, alpha_inside) = normalization_scale(&q, &opts.normalization, &q_roots)?;
    let (p, q) = (p.scaled(s), q.scaled(s));
    let free_zeros = roots_or_empty(&p)?;
    let (residual, residual_scale) = node_residual(&p, &q);
    Ok(PadeApproximant {
        n,
        m,
        p,
        q,
        free_zeros,
        free_poles: q_roots,
        k_n: alpha_inside.total_multiplicity(),
        alpha_inside,
        degenerate,
        residual,
        residual_scale,
        condition: ns.condition,
        nodes,
    })
}

/// Disks of radius `eps / (2 m n^2)` about each `a'`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceptionalSet {
    pub epsilon: f64,
    pub radius: f64,
    #[serde(with = "crate::cpair::many")]
    pub centers: Vec<Complex64>,
}

impl ExceptionalSet {
    pub fn radius_sum(&self) -> f64 {
        self.radius * self.centers.len() as f64
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.centers.iter().any(|c| (z - c).norm() < self.radius)
    }
}

/// `Omega(eps)` for one approximant; `n = 0` is treated as `n = 1`.
pub fn exceptional_set<R: Real>(approx: &PadeApproximant<R>, eps: f64) -> ExceptionalSet {
    let centers = approx.alpha_inside.expanded();
    let radius = if approx.m == 0 {
        0.0
    } else {
        let n = approx.n.max(1) as f64;
        eps / (2.0 * approx.m as f64 * n * n)
    };
    ExceptionalSet {
        epsilon: eps,
        radius,
        centers,
    }
}

/// Lowered copy of `P/Q`, for binary64 consumers.
pub fn lowered<R: Real>(a: &PadeApproximant<R>) -> (Polynomial, Polynomial) {
    (a.p.to_f64(), a.q.to_f64())
}

impl<R: Real> PadeApproximant<R> {
    /// `|f - P/Q|` at `z`, subtracting in the backend.
    pub fn error_at(&self, f: &TargetFunction, z: Complex64) -> Result<f64, ModelError> {
        let zl = lift::<R>(z);
        Ok(modulus(f.eval(zl)? - self.eval(zl)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Measure;
    use crate::scalar::DoubleDouble;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_poly(coeffs: &[f64]) -> Polynomial {
        Polynomial::new(coeffs.iter().map(|&x| c(x, 0.0)).collect())
    }

    fn close(a: &Polynomial, b: &Polynomial, tol: f64) -> bool {
        (a - b).scale() <= tol
    }

    #[test]
    fn divided_difference_examples() {
        let square = |z: Complex64, k: usize| -> Result<Vec<Complex64>, ModelError> {
            Ok(real_poly(&[0.0, 0.0, 1.0])
                .taylor_at(z)
                .into_iter()
                .chain(std::iter::repeat(c(0.0, 0.0)))
                .take(k + 1)
                .collect())
        };
        let d: Complex64 = divided_difference(square, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(d, c(1.0, 0.0));
        let d: Complex64 = divided_difference(square, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert_eq!(d, c(1.0, 0.0));
        let e = TargetFunction::exponential(c(1.0, 0.0), c(1.0, 0.0));
        let d: Complex64 = divided_difference(|z, k| e.taylor(z, k), &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(d, c(1.0, 0.0));
    }

    #[test]
    fn leja_starts_at_largest_and_keeps_repeats_together() {
        let nodes = [c(0.5, 0.0), c(0.0, 0.0), c(-2.0, 0.0), c(0.5, 0.0), c(1.0, 0.0)];
        let ordered = leja_order(&nodes);
        assert_eq!(ordered[0], c(-2.0, 0.0));
        let pos: Vec<usize> = ordered
            .iter()
            .enumerate()
            .filter(|(_, z)| **z == c(0.5, 0.0))
            .map(|(k, _)| k)
            .collect();
        assert_eq!(pos.len(), 2);
        assert_eq!(pos[1], pos[0] + 1);
        let mut sorted = ordered.clone();
        sorted.sort_by(lex_cmp);
        let mut want = nodes.to_vec();
        want.sort_by(lex_cmp);
        assert_eq!(sorted, want);
    }

    #[test]
    fn lagrange_case() {
        let f = TargetFunction::rational(Polynomial::zero(), Polynomial::one())
            .unwrap()
            .with_poly(real_poly(&[0.0, 0.0, 1.0]));
        let t = TriangularTable::explicit(vec![vec![c(5.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let a = build_pade::<f64>(&f, &t, 1, 0, &BuildOptions::default()).unwrap();
        // Lagrange interpolant of z^2 at {0, 1}: 0 + (z - 0) * 1
        assert!(close(&a.p, &real_poly(&[0.0, 1.0]), 1e-15));
        assert_eq!(a.q, Polynomial::one());
        assert_eq!(a.nodes.len(), 2);
    }

    #[test]
    fn rational_of_same_type_is_reproduced() {
        let f = TargetFunction::rational(real_poly(&[1.0]), real_poly(&[1.0, -1.0])).unwrap();
        let t = TriangularTable::explicit(vec![vec![c(0.0, 0.0)], vec![c(0.3, 0.0), c(-0.5, 0.2)]]).unwrap();
        let a = build_pade::<f64>(&f, &t, 0, 1, &BuildOptions::default()).unwrap();
        assert!(close(&a.p, &real_poly(&[1.0]), 1e-14));
        assert!(close(&a.q, &real_poly(&[1.0, -1.0]), 1e-14));
        assert!(!a.degenerate);
    }

    #[test]
    fn classical_exponential_1_1() {
        let f = TargetFunction::exponential(c(1.0, 0.0), c(1.0, 0.0));
        let t = TriangularTable::confluent(c(0.0, 0.0));
        {
            let opts = BuildOptions::default();
            let a = build_pade::<f64>(&f, &t, 1, 1, &opts).unwrap();
            assert!(close(&a.p, &real_poly(&[1.0, 0.5]), 1e-12), "{:?}", a.p);
            assert!(close(&a.q, &real_poly(&[1.0, -0.5]), 1e-12), "{:?}", a.q);
            let dd = build_pade::<DoubleDouble>(&f, &t, 1, 1, &opts).unwrap();
            assert!(close(&dd.p.to_f64(), &real_poly(&[1.0, 0.5]), 1e-15));
        }
    }

    fn disk4() -> LevelRegion {
        LevelRegion::new(
            Measure::UniformCircle {
                center: c(0.0, 0.0),
                radius: 1.0,
            },
            4.0,
        )
    }

    #[test]
    fn normalization_examples() {
        let q = real_poly(&[16.0, -10.0, 1.0]); // (z-2)(z-8)
        let got = normalize_denominator(&q, &disk4()).unwrap();
        let want = &real_poly(&[-2.0, 1.0]) * &real_poly(&[1.0, -1.0 / 8.0]);
        assert!(close(&got, &want, 1e-14));
        let inside = real_poly(&[-6.0, 5.0, -1.0]); // -(z-2)(z-3)
        let got = normalize_denominator(&inside, &disk4()).unwrap();
        assert!(close(&got, &real_poly(&[6.0, -5.0, 1.0]), 1e-14));
        let outside = real_poly(&[40.0, -13.0, 1.0]); // (z-5)(z-8)
        let got = normalize_denominator(&outside, &disk4()).unwrap();
        assert!((got.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn boundary_zero_counts_as_inside() {
        let q = real_poly(&[-4.0 * (1.0 + 1e-12), 1.0]);
        let got = normalize_denominator(&q, &disk4()).unwrap();
        assert!((got.leading() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn exceptional_set_radius() {
        let f = TargetFunction::from_poles(real_poly(&[1.0]), &[(c(2.0, 0.0), 1), (c(3.0, 0.0), 1)]).unwrap();
        let t = TriangularTable::roots_of_unity(c(0.0, 0.0), 1.0, 0.0);
        let opts = BuildOptions {
            normalization: Normalization::LevelRegion(disk4()),
            ..Default::default()
        };
        let a = build_pade::<f64>(&f, &t, 10, 2, &opts).unwrap();
        assert_eq!(a.k_n, 2);
        let omega = exceptional_set(&a, 0.1);
        assert_eq!(omega.centers.len(), 2);
        assert_eq!(omega.radius, 2.5e-4);
        assert!(omega.radius_sum() <= 0.1);
        assert!(omega.contains(c(2.0, 1e-4)));
        let none = build_pade::<f64>(&f, &t, 10, 0, &opts).unwrap();
        assert!(exceptional_set(&none, 0.1).centers.is_empty());
    }

    #[test]
    fn json_keys() {
        let f = TargetFunction::exponential(c(1.0, 0.0), c(1.0, 0.0));
        let a = build_pade::<f64>(
            &f,
            &TriangularTable::confluent(c(0.0, 0.0)),
            2,
            1,
            &BuildOptions::default(),
        )
        .unwrap();
        let v = a.to_json();
        for key in ["n", "m", "P", "Q", "free_poles", "free_zeros", "residual", "degenerate"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
