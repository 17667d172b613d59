pub mod cpair;
pub mod experiment;
pub mod geometry;
pub mod lab;
pub mod linalg;
pub mod model;
pub mod pade;
pub mod poly;
pub mod potential;
pub mod scalar;
pub mod table;

pub use experiment::{
    export_report, run_experiment, ExperimentConfig, ExperimentError, ReportFormat, RunManifest, Stage,
};
pub use geometry::{CompactSet, GridSpec};
pub use lab::{ClusterReport, ExactnessReport, Lab, RateSeries, Sweep};
pub use model::{TargetFunction, TargetSpec};
pub use pade::{build_pade, exceptional_set, BuildOptions, ExceptionalSet, Normalization, PadeApproximant, PadeError};
pub use poly::{poly_roots, Polynomial, Root, RootSet};
pub use potential::{LevelGrid, LevelRegion, Measure, MeromorphyReport};
pub use scalar::{DoubleDouble, Precision, Real};
pub use table::{DiscretePointMeasure, Region, TableSpec, TriangularTable};

/// Errors shared by several modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Potential(#[from] potential::PotentialError),
}

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-4, 1e15)`. Never locale dependent.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
