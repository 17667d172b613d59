//! Fixtures and independent oracles shared by the integration suites.
#![allow(dead_code)]

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use padelab::{CompactSet, GridSpec, Lab, Measure, Polynomial, TargetFunction, TriangularTable};
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn unit_circle_measure() -> Measure {
    Measure::UniformCircle {
        center: c(0.0, 0.0),
        radius: 1.0,
    }
}

/// `1/(z-2) + 1/(z-3) + 1/(z-4)`.
pub fn montessus() -> TargetFunction {
    let num = Polynomial::new(vec![c(26.0, 0.0), c(-18.0, 0.0), c(3.0, 0.0)]);
    TargetFunction::from_poles(num, &[(c(2.0, 0.0), 1), (c(3.0, 0.0), 1), (c(4.0, 0.0), 1)]).unwrap()
}

pub fn montessus_lab(f: TargetFunction, table: TriangularTable) -> Lab {
    Lab::new(
        f,
        table,
        CompactSet::disk(c(0.0, 0.0), 1.0),
        unit_circle_measure(),
        2,
        GridSpec::default(),
        None,
    )
    .unwrap()
}

pub fn roots_table() -> TriangularTable {
    TriangularTable::roots_of_unity(c(0.0, 0.0), 1.0, 0.0)
}

/// Classical `[n/m]` Padé coefficients from the Taylor coefficients `t`,
/// solving the Toeplitz conditions with `q_0 = 1` exactly over the
/// rationals, then rounding.
pub fn taylor_pade_oracle(t: &[BigRational], n: usize, m: usize) -> (Vec<f64>, Vec<f64>) {
    let zero = BigRational::zero();
    let coef = |k: isize| if k < 0 { zero.clone() } else { t[k as usize].clone() };
    // augmented rows [A | b] for sum_{j=1..m} q_j t_{n+i-j} = -t_{n+i}
    let mut rows: Vec<Vec<BigRational>> = (1..=m)
        .map(|i| {
            let mut row: Vec<BigRational> = (1..=m).map(|j| coef((n + i) as isize - j as isize)).collect();
            row.push(-coef((n + i) as isize));
            row
        })
        .collect();
    for col in 0..m {
        let pivot = (col..m).find(|&r| !rows[r][col].is_zero()).expect("normal Padé table");
        rows.swap(col, pivot);
        for r in 0..m {
            if r != col && !rows[r][col].is_zero() {
                let factor = &rows[r][col] / &rows[col][col];
                let pivot_row = rows[col].clone();
                for (x, p) in rows[r].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= &factor * p;
                }
            }
        }
    }
    let mut q = vec![BigRational::one()];
    q.extend((0..m).map(|i| &rows[i][m] / &rows[i][i]));
    let p: Vec<BigRational> = (0..=n)
        .map(|k| {
            (0..=k.min(m)).fold(BigRational::zero(), |acc, j| {
                acc + &q[j] * coef(k as isize - j as isize)
            })
        })
        .collect();
    let lower = |v: &[BigRational]| v.iter().map(|x| x.to_f64().unwrap()).collect();
    (lower(&p), lower(&q))
}

/// `1/k!` for `k < len`, exactly.
pub fn exp_taylor(len: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::one()];
    for k in 1..len {
        let next = &out[k - 1] / BigRational::from_integer((k as u64).into());
        out.push(next);
    }
    out
}

/// A random rational of type `(n, m)`: numerator coefficients in the unit
/// square, simple poles with modulus in `[0.3, 0.8]` or `[1.25, 3]`.
pub fn random_rational<G: Rng>(rng: &mut G, n: usize, m: usize) -> TargetFunction {
    let num = Polynomial::new(
        (0..=n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    );
    let mut poles: Vec<(Complex64, usize)> = Vec::new();
    while poles.len() < m {
        let r = if rng.gen_bool(0.5) {
            rng.gen_range(0.3..0.8)
        } else {
            rng.gen_range(1.25..3.0)
        };
        let z = Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU));
        if poles.iter().all(|(p, _)| (p - z).norm() > 0.2) && num.eval(z).norm() > 1e-3 {
            poles.push((z, 1));
        }
    }
    TargetFunction::from_poles(num, &poles).unwrap()
}

pub fn circle_points(radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / count as f64))
        .collect()
}
