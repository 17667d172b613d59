//! Null spaces of small dense complex matrices by Householder QR with column
//! pivoting, generic over the scalar backend.
//!
//! For `A` (`rows x cols`), `A^H P = Q R`; the trailing `cols - rank` columns
//! of `Q` span the null space of `A`.

use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::{modulus, Real};

/// Orthonormal null-space basis with rank diagnostics.
#[derive(Clone, Debug)]
pub struct NullSpace<R: Real> {
    pub basis: Vec<Vec<Complex<R>>>,
    pub rank: usize,
    /// `|R_00| / |R_{rank-1,rank-1}|`, 1 for rank 0.
    pub condition: f64,
}

fn norm_sq<R: Real>(v: &[Complex<R>]) -> R {
    v.iter().fold(R::zero(), |acc, z| acc + z.norm_sqr())
}

/// Null space of `a`, whose rows all have length `cols`.
///
/// A diagonal entry `|R_kk| <= rank_tol * |R_00|` ends the numerical rank.
pub fn null_space<R: Real>(a: &[Vec<Complex<R>>], cols: usize, rank_tol: f64) -> NullSpace<R> {
    let rows = a.len();
    // b = a^H, stored by columns: b[j] is column j (length cols)
    let mut b: Vec<Vec<Complex<R>>> = a.iter().map(|row| row.iter().map(|z| z.conj()).collect()).collect();
    let mut q: Vec<Vec<Complex<R>>> = (0..cols)
        .map(|i| {
            (0..cols)
                .map(|j| {
                    if i == j {
                        Complex::new(R::one(), R::zero())
                    } else {
                        Complex::zero()
                    }
                })
                .collect()
        })
        .collect(); // q[i][j], row-major
    let steps = rows.min(cols);
    let mut rank = 0;
    let mut r00 = 0.0;
    let mut rlast = 1.0;
    for k in 0..steps {
        // pivot: remaining column with the largest trailing norm
        let (piv, best) = (k..rows)
            .map(|j| (j, norm_sq(&b[j][k..]).to_f64()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        b.swap(k, piv);
        let alpha_norm = norm_sq(&b[k][k..]).sqrt();
        let diag = best.sqrt();
        if k == 0 {
            r00 = diag;
        }
        if diag == 0.0 || diag <= rank_tol * r00 {
            break;
        }
        rank += 1;
        rlast = diag;
        let x0 = b[k][k];
        let x0_abs = x0.norm_sqr().sqrt();
        let phase = if x0_abs.is_zero() {
            Complex::new(R::one(), R::zero())
        } else {
            x0 / x0_abs
        };
        let alpha = -(phase * alpha_norm);
        let mut v: Vec<Complex<R>> = b[k][k..].to_vec();
        v[0] -= alpha;
        let vv = norm_sq(&v);
        if vv.is_zero() {
            continue;
        }
        let two_over = (R::one() + R::one()) / vv;
        // apply H = I - 2 v v^H / (v^H v) to the trailing columns of b
        for col in b.iter_mut().skip(k) {
            let dot = v
                .iter()
                .zip(&col[k..])
                .fold(Complex::zero(), |acc: Complex<R>, (vi, ci)| acc + vi.conj() * ci);
            let s = dot * two_over;
            for (ci, vi) in col[k..].iter_mut().zip(&v) {
                *ci -= *vi * s;
            }
        }
        // accumulate q <- q H
        for row in q.iter_mut() {
            let dot = row[k..]
                .iter()
                .zip(&v)
                .fold(Complex::zero(), |acc: Complex<R>, (qi, vi)| acc + *qi * vi);
            let s = dot * two_over;
            for (qi, vi) in row[k..].iter_mut().zip(&v) {
                *qi -= s * vi.conj();
            }
        }
    }
    let basis = (rank..cols).map(|j| (0..cols).map(|i| q[i][j]).collect()).collect();
    NullSpace {
        basis,
        rank,
        condition: if rank == 0 { 1.0 } else { r00 / rlast },
    }
}

/// Scale `v` to unit norm with its first non-negligible entry real-positive.
pub fn canonical_phase<R: Real>(v: &mut [Complex<R>]) {
    let norm = norm_sq(v).sqrt();
    if norm.is_zero() {
        return;
    }
    let threshold = R::EPSILON.sqrt() * norm.to_f64();
    let lead = v.iter().copied().find(|z| modulus(*z) > threshold).unwrap_or(v[0]);
    let lead_abs = lead.norm_sqr().sqrt();
    let rot = lead.conj() / (lead_abs * norm);
    for z in v.iter_mut() {
        *z *= rot;
    }
}

/// The null vector of least degree: the combination of `basis` whose last
/// `d - 1` entries vanish, where `d` is the basis size.
pub fn minimal_degree_vector<R: Real>(basis: &[Vec<Complex<R>>]) -> Vec<Complex<R>> {
    let d = basis.len();
    let n = basis[0].len();
    let mut out = if d == 1 {
        basis[0].clone()
    } else {
        // rows: the top d-1 coefficients of each basis vector
        let system: Vec<Vec<Complex<R>>> = (n - d + 1..n).map(|i| basis.iter().map(|v| v[i]).collect()).collect();
        let combo = null_space(&system, d, 0.0);
        let c = &combo.basis[0];
        (0..n)
            .map(|i| {
                basis
                    .iter()
                    .zip(c)
                    .fold(Complex::zero(), |acc: Complex<R>, (v, ci)| acc + v[i] * ci)
            })
            .collect()
    };
    canonical_phase(&mut out);
    out
}
