//! Convergence experiments over sweeps of approximants `pi_{n,m}`.
//!
//! Asymptotic quantities are read off tail windows of `n` with geometric
//! means; the windows are part of every report.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{CompactSet, GridSpec};
use crate::model::TargetFunction;
use crate::pade::{build_pade, exceptional_set, BuildOptions, ExceptionalSet, Normalization, PadeApproximant};
use crate::poly::RootSet;
use crate::potential::{
    level_value, potential_discrepancy, radius_of_meromorphy, Discrepancy, Measure, MeromorphyReport,
};
use crate::scalar::{lift, modulus, Real};
use crate::table::{counting_measure_mass, DiscretePointMeasure, Region, TriangularTable};

/// Errors at or below `FLOOR_FACTOR * eps * scale` count as exact.
pub const FLOOR_FACTOR: f64 = 1e6;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("exclusion swallowed K: every grid point lies in the exceptional set")]
    ExclusionSwallowedK,
    #[error("every build in the sweep failed; first failure: {0}")]
    AllBuildsFailed(String),
    #[error("R_m is infinite: f has at most m poles, so no finite target exists")]
    InfiniteRadius,
    #[error("test point {0} lies in E")]
    TestPointInE(Complex64),
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error(transparent)]
    Table(#[from] crate::table::TableError),
}

/// Shared context of an experiment.
#[derive(Clone, Debug)]
pub struct Lab {
    pub f: TargetFunction,
    pub table: TriangularTable,
    pub e: CompactSet,
    pub measure: Measure,
    pub m: usize,
    pub grid: GridSpec,
    pub meromorphy: MeromorphyReport,
    pub options: BuildOptions,
}

impl Lab {
    /// Normalizes denominators against `D_{m,mu}` unless `normalization` is
    /// given.
    pub fn new(
        f: TargetFunction,
        table: TriangularTable,
        e: CompactSet,
        measure: Measure,
        m: usize,
        grid: GridSpec,
        normalization: Option<Normalization>,
    ) -> Result<Self, LabError> {
        let meromorphy = radius_of_meromorphy(&f, &measure, m, &e)?;
        let normalization = normalization.unwrap_or_else(|| Normalization::LevelRegion(meromorphy.domain(&measure)));
        Ok(Self {
            f,
            table,
            e,
            measure,
            m,
            grid,
            meromorphy,
            options: BuildOptions {
                normalization,
                ..BuildOptions::default()
            },
        })
    }

    /// Same experiment for `c * f`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            f: self.f.scaled(c),
            ..self.clone()
        }
    }

    /// Build `pi_{n,m}` for every `n` in `lo..=hi`, in parallel.
    pub fn sweep<R: Real>(&self, (lo, hi): (usize, usize)) -> Sweep<R> {
        let entries = (lo..=hi)
            .into_par_iter()
            .map(|n| SweepEntry {
                n,
                result: build_pade::<R>(&self.f, &self.table, n, self.m, &self.options).map_err(|e| e.to_string()),
            })
            .collect();
        Sweep { entries }
    }

    /// `max_K e^{-U^mu}`.
    pub fn level_norm(&self, k: &CompactSet) -> f64 {
        k.sample_points(&self.grid)
            .into_iter()
            .map(|z| level_value(&self.measure, z))
            .fold(0.0, f64::max)
    }

    /// `max_K e^{-U} / R_m`; zero when `R_m` is infinite.
    pub fn target(&self, k: &CompactSet) -> f64 {
        self.level_norm(k) / self.meromorphy.r_m
    }
}

#[derive(Clone, Debug)]
pub struct SweepEntry<R: Real> {
    pub n: usize,
    pub result: Result<PadeApproximant<R>, String>,
}

/// Approximants in ascending `n`; failed builds keep their message.
#[derive(Clone, Debug)]
pub struct Sweep<R: Real> {
    pub entries: Vec<SweepEntry<R>>,
}

impl<R: Real> Sweep<R> {
    pub fn built(&self) -> impl Iterator<Item = &PadeApproximant<R>> {
        self.entries.iter().filter_map(|e| e.result.as_ref().ok())
    }

    pub fn get(&self, n: usize) -> Option<&PadeApproximant<R>> {
        self.built().find(|a| a.n == n)
    }

    fn check_any(&self) -> Result<(), LabError> {
        if self.built().next().is_none() {
            let first = self
                .entries
                .first()
                .and_then(|e| e.result.as_ref().err().cloned())
                .unwrap_or_else(|| "empty sweep".to_string());
            return Err(LabError::AllBuildsFailed(first));
        }
        Ok(())
    }
}

/// `max |g|` over the samples of `k` not covered by `exclusions`.
pub fn sup_norm_on_grid<G: Fn(Complex64) -> f64>(
    g: G,
    k: &CompactSet,
    grid: &GridSpec,
    exclusions: Option<&ExceptionalSet>,
) -> Result<f64, LabError> {
    let mut any = false;
    let mut best: f64 = 0.0;
    for z in k.sample_points(grid) {
        if exclusions.is_some_and(|x| x.contains(z)) {
            continue;
        }
        any = true;
        best = best.max(g(z));
    }
    if any {
        Ok(best)
    } else {
        Err(LabError::ExclusionSwallowedK)
    }
}

fn geometric_mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v.ln(), c + 1));
    (count > 0).then(|| (sum / count as f64).exp())
}

/// Least-squares slope of `y` against `x`; needs two distinct `x`.
fn log_slope(points: impl Iterator<Item = (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.collect();
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (pts.len() >= 2 && sxx > 0.0).then(|| sxy / sxx)
}

/// Upper half of `lo..=hi`.
pub fn default_tail((lo, hi): (usize, usize)) -> (usize, usize) {
    ((lo + hi).div_ceil(2), hi)
}

fn in_window(n: usize, (lo, hi): (usize, usize)) -> bool {
    (lo..=hi).contains(&n)
}

/// Greedy nearest matching of true poles to computed poles; the worst
/// matched distance.
fn pole_error(truth: &RootSet, computed: &RootSet) -> Option<f64> {
    let truth = truth.expanded();
    let mut pool = computed.expanded();
    if truth.is_empty() || pool.len() < truth.len() {
        return None;
    }
    let mut worst: f64 = 0.0;
    for t in truth {
        let (idx, d) = pool
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p - t).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        worst = worst.max(d);
        pool.swap_remove(idx);
    }
    Some(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct RateRow {
    pub n: usize,
    /// `sup |f - pi_n|` over `K` minus `Omega(eps)`.
    pub e_n: Option<f64>,
    pub root_rate: Option<f64>,
    pub k_n: Option<usize>,
    /// Worst distance from a pole of `Q_f` to its matched free pole.
    pub pole_error: Option<f64>,
    pub omega_radius_sum: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateSeries {
    pub rows: Vec<RateRow>,
    pub level_norm: f64,
    /// `null` in JSON when infinite.
    pub r_m: f64,
    pub target: f64,
    pub tail: (usize, usize),
    pub tail_geomean: Option<f64>,
    /// `exp` of the least-squares slope of `ln e_n` over the tail; free of
    /// the `C^(1/n)` bias that the geometric mean carries at finite `n`.
    pub tail_slope_rate: Option<f64>,
    /// `R` solving `level_norm / R = tail_slope_rate`.
    pub inferred_r: Option<f64>,
    /// `R` solving `level_norm / R = tail_geomean`.
    pub inferred_r_geomean: Option<f64>,
    /// `inferred_r <= r_m * 1.1`.
    pub radius_bound_ok: Option<bool>,
    /// Max over the tail of `pole_error^(1/n)`.
    pub pole_error_rate: Option<f64>,
    pub epsilon: f64,
    pub max_omega_radius_sum: f64,
    /// Every error at the numerical floor.
    pub exact: bool,
}

/// Errors `e_n` on `K` minus `Omega(eps)` and their root rates.
pub fn rate_sequence<R: Real>(
    lab: &Lab,
    sweep: &Sweep<R>,
    k: &CompactSet,
    eps: f64,
    tail: (usize, usize),
) -> Result<RateSeries, LabError> {
    sweep.check_any()?;
    let f_scale = k
        .sample_points(&lab.grid)
        .into_iter()
        .filter_map(|z| lab.f.eval(z).ok())
        .map(|v| v.norm())
        .fold(1.0, f64::max);
    let floor = FLOOR_FACTOR * R::EPSILON * f_scale;
    let rows: Vec<RateRow> = sweep
        .entries
        .par_iter()
        .map(|entry| match &entry.result {
            Err(msg) => RateRow {
                n: entry.n,
                e_n: None,
                root_rate: None,
                k_n: None,
                pole_error: None,
                omega_radius_sum: None,
                failure: Some(msg.clone()),
            },
            Ok(a) => {
                let omega = exceptional_set(a, eps);
                let err = sup_norm_on_grid(
                    |z| a.error_at(&lab.f, z).unwrap_or(f64::INFINITY),
                    k,
                    &lab.grid,
                    Some(&omega),
                );
                let (e_n, failure) = match err {
                    Ok(v) => (Some(v), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                RateRow {
                    n: entry.n,
                    e_n,
                    root_rate: e_n
                        .filter(|_| entry.n > 0)
                        .map(|v| v.max(f64::MIN_POSITIVE).powf(1.0 / entry.n as f64)),
                    k_n: Some(a.k_n),
                    pole_error: pole_error(&lab.meromorphy.poles_inside, &a.free_poles),
                    omega_radius_sum: Some(omega.radius_sum()),
                    failure,
                }
            }
        })
        .collect();
    let exact = rows.iter().all(|r| r.e_n.map_or(true, |e| e <= floor)) && rows.iter().any(|r| r.e_n.is_some());
    let tail_rows = || rows.iter().filter(|r| in_window(r.n, tail));
    let tail_geomean = geometric_mean(tail_rows().filter_map(|r| r.root_rate));
    let level_norm = lab.level_norm(k);
    let r_m = lab.meromorphy.r_m;
    let tail_slope_rate =
        log_slope(tail_rows().filter_map(|r| r.e_n.filter(|&e| e > 0.0).map(|e| (r.n as f64, e.ln())))).map(f64::exp);
    let inferred_r = tail_slope_rate.map(|g| level_norm / g);
    let radius_bound_ok = inferred_r.filter(|_| r_m.is_finite()).map(|r| r <= r_m * 1.1);
    let pole_error_rate = tail_rows()
        .filter_map(|r| {
            r.pole_error
                .map(|e| e.max(f64::MIN_POSITIVE).powf(1.0 / r.n.max(1) as f64))
        })
        .reduce(f64::max);
    let max_omega_radius_sum = rows.iter().filter_map(|r| r.omega_radius_sum).fold(0.0, f64::max);
    Ok(RateSeries {
        rows,
        level_norm,
        r_m,
        target: level_norm / r_m,
        tail,
        tail_geomean,
        tail_slope_rate,
        inferred_r,
        inferred_r_geomean: tail_geomean.map(|g| level_norm / g),
        radius_bound_ok,
        pole_error_rate,
        epsilon: eps,
        max_omega_radius_sum,
        exact,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactnessRow {
    pub n: usize,
    /// `||F Q_n - Q_f P_n||_K^(1/n)`.
    pub h_n: Option<f64>,
    /// Same with the norm divided by `||f||_E`; invariant under `f -> c f`.
    pub h_hat: Option<f64>,
    pub in_lambda: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactnessReport {
    pub rows: Vec<ExactnessRow>,
    pub target: f64,
    pub delta: f64,
    pub lambda: Vec<usize>,
    /// Max of `n_{k+1} / n_k` over `lambda`.
    pub density_ratio: Option<f64>,
    /// The same over the upper half of `lambda`.
    pub tail_density_ratio: Option<f64>,
    pub f_norm_e: f64,
    pub degenerate: bool,
    pub diagnostic: Option<String>,
}

fn density_ratio(lambda: &[usize]) -> Option<f64> {
    lambda
        .windows(2)
        .filter(|w| w[0] > 0)
        .map(|w| w[1] as f64 / w[0] as f64)
        .reduce(f64::max)
}

/// `Lambda = { n : |h_hat_n - target| <= delta }` with `F = f Q_f`.
///
/// Detection uses `h_hat`, which divides out `||f||_E` so that constant
/// multiples of `f` yield the same `Lambda`; `h_n` is reported alongside.
pub fn exactness_subsequence<R: Real>(
    lab: &Lab,
    sweep: &Sweep<R>,
    k: &CompactSet,
    delta: f64,
) -> Result<ExactnessReport, LabError> {
    sweep.check_any()?;
    if !lab.meromorphy.r_m.is_finite() {
        return Err(LabError::InfiniteRadius);
    }
    let target = lab.target(k);
    let f_norm_e = lab
        .e
        .sample_points(&lab.grid)
        .into_par_iter()
        .filter_map(|z| lab.f.eval(z).ok())
        .map(|v| v.norm())
        .reduce(|| 0.0, f64::max);
    let q_f = crate::poly::Polynomial::<R>::lift_from(&lab.meromorphy.q_f);
    let points = k.sample_points(&lab.grid);
    let floor = FLOOR_FACTOR * R::EPSILON * f_norm_e.max(1.0);
    let raw: Vec<(usize, Option<f64>)> = sweep
        .entries
        .par_iter()
        .map(|entry| {
            let norm = entry.result.as_ref().ok().map(|a| {
                points
                    .iter()
                    .map(|&z| {
                        let zl = lift::<R>(z);
                        let qf = q_f.eval(zl);
                        match lab.f.eval(zl) {
                            Ok(fz) => modulus(fz * qf * a.q.eval(zl) - qf * a.p.eval(zl)),
                            Err(_) => f64::INFINITY,
                        }
                    })
                    .fold(0.0, f64::max)
            });
            (entry.n, norm)
        })
        .collect();
    let degenerate = raw.iter().all(|(_, v)| v.map_or(true, |x| x <= floor)) && raw.iter().any(|(_, v)| v.is_some());
    let mut rows: Vec<ExactnessRow> = raw
        .iter()
        .map(|&(n, norm)| {
            let root = |x: f64| x.max(f64::MIN_POSITIVE).powf(1.0 / n.max(1) as f64);
            ExactnessRow {
                n,
                h_n: norm.map(root),
                h_hat: norm.map(|x| root(x / f_norm_e)),
                in_lambda: false,
            }
        })
        .collect();
    let diagnostic = if degenerate {
        Some("errors at the numerical floor: f is reproduced exactly, Lambda is empty by convention".to_string())
    } else if delta <= 0.0 {
        Some("delta is zero: exact equality with the target has measure zero".to_string())
    } else {
        for row in rows.iter_mut() {
            row.in_lambda = row.h_hat.is_some_and(|h| (h - target).abs() <= delta);
        }
        None
    };
    let lambda: Vec<usize> = rows.iter().filter(|r| r.in_lambda).map(|r| r.n).collect();
    let diagnostic = diagnostic.or_else(|| lambda.is_empty().then(|| "no n within delta of the target".to_string()));
    Ok(ExactnessReport {
        density_ratio: density_ratio(&lambda),
        tail_density_ratio: density_ratio(&lambda[lambda.len() / 2..]),
        rows,
        target,
        delta,
        lambda,
        f_norm_e,
        degenerate,
        diagnostic,
    })
}

/// Potential discrepancy between row `n`'s counting measure and `mu`.
pub fn interpolation_distribution_test(
    table: &TriangularTable,
    mu: &Measure,
    e: Option<&CompactSet>,
    n_list: &[usize],
    test_points: &[Complex64],
) -> Result<Vec<(usize, Discrepancy)>, LabError> {
    if let Some(e) = e {
        if let Some(z) = test_points.iter().find(|&&z| e.contains(z, 0.0)) {
            return Err(LabError::TestPointInE(*z));
        }
    }
    n_list
        .iter()
        .map(|&n| {
            let row = table.row(n)?;
            let counting = Measure::counting(row).expect("rows are nonempty");
            Ok((n, potential_discrepancy(&counting, mu, test_points)))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterRow {
    pub sample: usize,
    pub n: usize,
    pub mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterReport {
    #[serde(with = "crate::cpair::many")]
    pub samples: Vec<Complex64>,
    pub r: f64,
    pub ns: Vec<usize>,
    pub rows: Vec<ClusterRow>,
    /// Per sample, the max of its masses over `ns`.
    pub per_sample_max: Vec<f64>,
    pub summary: f64,
    /// Scanned all built `n` in the window because `Lambda` was empty.
    pub no_lambda: bool,
}

/// Masses of the zero counting measures in `disk(z0, r)` for each sample
/// `z0` and each `n` in `Lambda` (or every `n` when `Lambda` is empty),
/// restricted to `window`.
pub fn zero_cluster_scan(
    zeros: &[(usize, RootSet)],
    lambda: &[usize],
    samples: &[Complex64],
    r: f64,
    window: (usize, usize),
) -> ClusterReport {
    let no_lambda = lambda.is_empty();
    let chosen: Vec<&(usize, RootSet)> = zeros
        .iter()
        .filter(|(n, _)| in_window(*n, window) && (no_lambda || lambda.contains(n)))
        .collect();
    let measures: Vec<(usize, Option<DiscretePointMeasure>)> = chosen
        .iter()
        .map(|(n, z)| (*n, DiscretePointMeasure::new(z.expanded())))
        .collect();
    let mut rows = Vec::with_capacity(samples.len() * measures.len());
    let mut per_sample_max = vec![0.0f64; samples.len()];
    for (s, &z0) in samples.iter().enumerate() {
        let region = Region::Disk { center: z0, radius: r };
        for (n, m) in &measures {
            let mass = m.as_ref().map_or(0.0, |m| counting_measure_mass(m, &region));
            per_sample_max[s] = per_sample_max[s].max(mass);
            rows.push(ClusterRow { sample: s, n: *n, mass });
        }
    }
    ClusterReport {
        samples: samples.to_vec(),
        r,
        ns: measures.iter().map(|m| m.0).collect(),
        summary: per_sample_max.iter().copied().fold(0.0, f64::max),
        per_sample_max,
        rows,
        no_lambda,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sup_norm_examples() {
        let grid = GridSpec {
            resolution: 11,
            boundary_samples: 64,
        };
        let circle = CompactSet::circle(c(0.0, 0.0), 1.5);
        assert_eq!(sup_norm_on_grid(|_| 2.5, &circle, &grid, None).unwrap(), 2.5);
        let id = sup_norm_on_grid(|z| z.norm(), &circle, &grid, None).unwrap();
        assert!((id - 1.5).abs() < 1e-15);
        let mu = Measure::UniformCircle {
            center: c(0.0, 0.0),
            radius: 1.0,
        };
        let lv = sup_norm_on_grid(|z| level_value(&mu, z), &circle, &grid, None).unwrap();
        assert!((lv - 1.5).abs() < 1e-15);
        let swallow = ExceptionalSet {
            epsilon: 1.0,
            radius: 10.0,
            centers: vec![c(0.0, 0.0)],
        };
        assert!(matches!(
            sup_norm_on_grid(|_| 1.0, &circle, &grid, Some(&swallow)),
            Err(LabError::ExclusionSwallowedK)
        ));
    }

    #[test]
    fn cluster_masses_match_brute_force() {
        let zeros = vec![
            (
                4,
                RootSet::simple([c(4.0, 0.0), c(4.2, 0.0), c(-4.0, 0.0), c(0.0, 0.0)]),
            ),
            (
                5,
                RootSet::simple([c(0.0, 4.1), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(5.0, 5.0)]),
            ),
        ];
        let samples = [c(4.0, 0.0), c(0.0, 4.0), c(-4.0, 0.0), c(0.0, -4.0)];
        let rep = zero_cluster_scan(&zeros, &[], &samples, 0.5, (0, 10));
        assert!(rep.no_lambda);
        for row in &rep.rows {
            let (_, set) = zeros.iter().find(|(n, _)| *n == row.n).unwrap();
            let pts = set.expanded();
            let count = pts.iter().filter(|z| (*z - samples[row.sample]).norm() <= 0.5).count();
            assert_eq!(row.mass, count as f64 / pts.len() as f64);
        }
        assert_eq!(rep.summary, 0.5);
        let far = zero_cluster_scan(&zeros, &[5], &[c(100.0, 0.0)], 0.5, (0, 10));
        assert_eq!(far.summary, 0.0);
        assert_eq!(far.ns, vec![5]);
    }

    fn geometric_lab(m: usize) -> Lab {
        let f = TargetFunction::from_poles(Polynomial::one(), &[(c(2.0, 0.0), 1)]).unwrap();
        Lab::new(
            f,
            TriangularTable::roots_of_unity(c(0.0, 0.0), 1.0, 0.0),
            CompactSet::disk(c(0.0, 0.0), 1.0),
            Measure::UniformCircle {
                center: c(0.0, 0.0),
                radius: 1.0,
            },
            m,
            GridSpec {
                resolution: 41,
                boundary_samples: 256,
            },
            None,
        )
        .unwrap()
    }

    #[test]
    fn polynomial_interpolation_rate() {
        let lab = geometric_lab(0);
        let sweep = lab.sweep::<f64>((4, 30));
        let unit = CompactSet::disk(c(0.0, 0.0), 1.0);
        let rates = rate_sequence(&lab, &sweep, &unit, 0.01, (16, 30)).unwrap();
        assert_eq!(rates.target, 0.5);
        let g = rates.tail_geomean.unwrap();
        assert!((g - 0.5).abs() < 0.05, "{g}");
        assert!(!rates.exact);
    }

    #[test]
    fn rational_of_matching_type_is_exact() {
        let lab = geometric_lab(1);
        let sweep = lab.sweep::<f64>((2, 10));
        let k = CompactSet::circle(c(0.0, 0.0), 1.5);
        let rates = rate_sequence(&lab, &sweep, &k, 0.01, (6, 10)).unwrap();
        assert!(rates.exact);
        assert_eq!(rates.r_m, f64::INFINITY);
        assert!(matches!(
            exactness_subsequence(&lab, &sweep, &k, 0.05),
            Err(LabError::InfiniteRadius)
        ));
    }

    #[test]
    fn distribution_examples() {
        let t = TriangularTable::roots_of_unity(c(0.0, 0.0), 1.0, 0.0);
        let mu = Measure::UniformCircle {
            center: c(0.0, 0.0),
            radius: 1.0,
        };
        let pts = [c(2.0, 0.0), c(0.0, 1.8), c(-2.5, 0.0)];
        let e = CompactSet::disk(c(0.0, 0.0), 1.0);
        let out = interpolation_distribution_test(&t, &mu, Some(&e), &[1, 64], &pts).unwrap();
        assert!(out[1].1.value <= 1e-2);
        assert!(out[0].1.value.is_finite() && out[0].1.value > 0.0);
        assert!(matches!(
            interpolation_distribution_test(&t, &mu, Some(&e), &[4], &[c(0.5, 0.0)]),
            Err(LabError::TestPointInE(_))
        ));
    }
}
