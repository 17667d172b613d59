//! Fixtures shared by the benchmarks in `benches/`.

use num_complex::Complex64;
use padelab::{Measure, Polynomial, TargetFunction, TriangularTable};

/// `1/(z-2) + 1/(z-3) + 1/(z-4)`, the three-pole workload.
pub fn three_poles() -> TargetFunction {
    let c = |re| Complex64::new(re, 0.0);
    let num = Polynomial::new(vec![c(26.0), c(-18.0), c(3.0)]);
    TargetFunction::from_poles(num, &[(c(2.0), 1), (c(3.0), 1), (c(4.0), 1)]).expect("distinct poles")
}

pub fn unit_roots() -> TriangularTable {
    TriangularTable::roots_of_unity(Complex64::new(0.0, 0.0), 1.0, 0.0)
}

pub fn unit_circle() -> Measure {
    Measure::UniformCircle {
        center: Complex64::new(0.0, 0.0),
        radius: 1.0,
    }
}

/// Degree-`n` polynomial with roots spread over two circles.
pub fn two_ring_polynomial(n: usize) -> Polynomial<f64> {
    let roots: Vec<Complex64> = (0..n)
        .map(|k| {
            let r = if k % 2 == 0 { 0.8 } else { 1.6 };
            Complex64::from_polar(r, std::f64::consts::TAU * (k as f64 + 0.25) / n as f64)
        })
        .collect();
    roots.iter().fold(Polynomial::one(), |p, &z| {
        &p * &Polynomial::new(vec![-z, Complex64::new(1.0, 0.0)])
    })
}
