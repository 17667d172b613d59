//! Configuration-driven pipeline: sweep, rates, exactness, distribution,
//! level region and cluster scan, each written as CSV plus a JSON summary.
//!
//! Output names are `{id}-{hash8}-{part}.{ext}`. Every byte written depends
//! only on the config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{CompactSet, GridSpec};
use crate::lab::{
    default_tail, exactness_subsequence, interpolation_distribution_test, rate_sequence, zero_cluster_scan,
    ExactnessReport, Lab, Sweep,
};
use crate::model::{TargetFunction, TargetSpec};
use crate::pade::{build_pade, Normalization};
use crate::poly::RootSet;
use crate::potential::{level_value, LevelGrid, Measure};
use crate::scalar::{DoubleDouble, Precision, Real};
use crate::table::{TableSpec, TriangularTable};
use crate::{cpair, fmt_f64};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shipped presets, `(name, json)`.
pub const PRESETS: &[(&str, &str)] = &[
    ("montessus-m2", include_str!("../presets/montessus-m2.json")),
    ("montessus-m0", include_str!("../presets/montessus-m0.json")),
    ("classical-exp", include_str!("../presets/classical-exp.json")),
    ("rational-exact", include_str!("../presets/rational-exact.json")),
    ("roots-distribution", include_str!("../presets/roots-distribution.json")),
    ("arc-control", include_str!("../presets/arc-control.json")),
];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config schema error at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown preset '{name}' (available: {available})")]
    UnknownPreset { name: String, available: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("stage '{stage}' failed: {message}")]
    Stage { stage: String, message: String },
    #[error("missing stage outputs: {}", .0.join(", "))]
    MissingOutputs(Vec<String>),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl ExperimentError {
    /// 2 for config problems, 3 for numerical stage failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Schema { .. } | Self::UnknownPreset { .. } | Self::Invalid(_) => 2,
            Self::Stage { .. } => 3,
            Self::MissingOutputs(_) | Self::Io { .. } => 1,
        }
    }

    fn stage(stage: Stage, e: impl std::fmt::Display) -> Self {
        Self::Stage {
            stage: stage.name().to_string(),
            message: e.to_string(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Pipeline stages in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Rates,
    Exactness,
    Distribution,
    Level,
    Clusters,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Self::Rates,
        Self::Exactness,
        Self::Distribution,
        Self::Level,
        Self::Clusters,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rates => "rates",
            Self::Exactness => "exactness",
            Self::Distribution => "distribution",
            Self::Level => "level",
            Self::Clusters => "clusters",
        }
    }

    fn needs_sweep(self) -> bool {
        matches!(self, Self::Rates | Self::Exactness | Self::Clusters)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationKind {
    /// Against `D_{m,mu}` of the experiment.
    #[default]
    LevelRegion,
    ConstantTerm,
    Monic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    #[serde(default = "ClusterSpec::default_r")]
    pub r: f64,
    /// Points sampled on the boundary of `D_{m,mu}`.
    #[serde(default = "ClusterSpec::default_samples")]
    pub samples: usize,
    /// Window of `n`; the upper half of `n_range` when absent.
    #[serde(default)]
    pub tail: Option<[usize; 2]>,
}

impl ClusterSpec {
    fn default_r() -> f64 {
        0.5
    }

    fn default_samples() -> usize {
        256
    }
}

impl Default for ClusterSpec {
    fn default() -> Self {
        Self {
            r: Self::default_r(),
            samples: Self::default_samples(),
            tail: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    #[serde(default)]
    pub n_list: Vec<usize>,
    #[serde(default, with = "cpair::many")]
    pub test_points: Vec<Complex64>,
}

fn default_eps() -> f64 {
    0.01
}

fn default_delta() -> f64 {
    0.05
}

fn default_stages() -> Vec<Stage> {
    Stage::ALL.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub function: TargetSpec,
    pub table: TableSpec,
    #[serde(rename = "E")]
    pub e: CompactSet,
    pub measure: Measure,
    pub m: usize,
    pub n_range: [usize; 2],
    #[serde(rename = "K")]
    pub k: CompactSet,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub normalization: NormalizationKind,
    #[serde(default = "default_stages")]
    pub stages: Vec<Stage>,
    /// Window for tail statistics of rates; the upper half of `n_range`
    /// when absent.
    #[serde(default)]
    pub rate_tail: Option<[usize; 2]>,
    #[serde(default)]
    pub cluster: ClusterSpec,
    #[serde(default)]
    pub distribution: DistributionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Where relative table paths resolve.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self, ExperimentError> {
        let mut config: Self = serde_json::from_str(text).map_err(|e| ExperimentError::Schema {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        config.base_dir = base_dir.to_path_buf();
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json_str(&text, &base)
    }

    pub fn preset(name: &str) -> Result<Self, ExperimentError> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| ExperimentError::UnknownPreset {
                name: name.to_string(),
                available: PRESETS.iter().map(|p| p.0).collect::<Vec<_>>().join(", "),
            })?;
        let mut config = Self::from_json_str(text, Path::new("."))?;
        config.preset = Some(name.to_string());
        Ok(config)
    }

    /// Stages sorted into execution order without duplicates.
    pub fn stage_list(&self) -> Vec<Stage> {
        let mut s = self.stages.clone();
        s.sort();
        s.dedup();
        s
    }

    /// Sorted-key JSON of everything that affects results.
    pub fn canonical_json(&self) -> String {
        let mut semantic = self.clone();
        semantic.output_dir = None;
        semantic.preset = None;
        semantic.stages = self.stage_list();
        let value = serde_json::to_value(&semantic).expect("config serializes");
        let mut out = String::new();
        write_canonical(&value, &mut out);
        out
    }

    /// Hex SHA-256 of [`canonical_json`](Self::canonical_json), followed by
    /// the bytes of an explicit table file when there is one.
    pub fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_json().as_bytes());
        if let TableSpec::Explicit { path: Some(path), .. } = &self.table {
            if let Ok(bytes) = std::fs::read(self.base_dir.join(path)) {
                hasher.update([0u8]);
                hasher.update(bytes);
            }
        }
        hex::encode(hasher.finalize())
    }

    pub fn n_lo(&self) -> usize {
        self.n_range[0]
    }

    pub fn n_hi(&self) -> usize {
        self.n_range[1]
    }

    fn rate_window(&self) -> (usize, usize) {
        self.rate_tail
            .map_or_else(|| default_tail((self.n_lo(), self.n_hi())), |t| (t[0], t[1]))
    }

    fn cluster_window(&self) -> (usize, usize) {
        self.cluster
            .tail
            .map_or_else(|| default_tail((self.n_lo(), self.n_hi())), |t| (t[0], t[1]))
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Invalid(msg));
        if self.id.is_empty()
            || !self
                .id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return bad(format!("id '{}' must be nonempty [A-Za-z0-9_-]", self.id));
        }
        if self.n_lo() > self.n_hi() {
            return bad(format!("n_range {:?} is not ascending", self.n_range));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return bad(format!("delta must be nonnegative, got {}", self.delta));
        }
        if self.grid.resolution < 2 || self.grid.boundary_samples == 0 {
            return bad("grid needs resolution >= 2 and boundary_samples >= 1".into());
        }
        if !(self.cluster.r.is_finite() && self.cluster.r > 0.0) {
            return bad(format!("cluster radius must be positive, got {}", self.cluster.r));
        }
        for (name, set) in [("E", &self.e), ("K", &self.k)] {
            set.validate()
                .map_err(|e| ExperimentError::Invalid(format!("{name}: {e}")))?;
        }
        self.measure
            .validate()
            .map_err(|e| ExperimentError::Invalid(format!("measure: {e}")))?;
        if let Some(z) = self.distribution.test_points.iter().find(|&&z| self.e.contains(z, 0.0)) {
            return bad(format!("distribution test point {z} lies in E"));
        }
        Ok(())
    }

    fn normalization(&self) -> Option<Normalization> {
        match self.normalization {
            NormalizationKind::LevelRegion => None,
            NormalizationKind::ConstantTerm => Some(Normalization::ConstantTerm),
            NormalizationKind::Monic => Some(Normalization::Monic),
        }
    }

    /// Validated experiment context.
    pub fn lab(&self) -> Result<Lab, ExperimentError> {
        self.validate()?;
        let invalid = |e: &dyn std::fmt::Display| ExperimentError::Invalid(e.to_string());
        let f = TargetFunction::from_spec(&self.function).map_err(|e| invalid(&e))?;
        let table = TriangularTable::from_spec(&self.table, &self.base_dir).map_err(|e| invalid(&e))?;
        let needed = self.n_hi() + self.m + 1;
        if needed > table.max_row() {
            return Err(ExperimentError::Invalid(format!(
                "n_range needs row {needed} but the table has {} rows",
                table.max_row()
            )));
        }
        Lab::new(
            f,
            table,
            self.e.clone(),
            self.measure.clone(),
            self.m,
            self.grid,
            self.normalization(),
        )
        .map_err(|e| invalid(&e))
    }
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            let sorted: BTreeMap<&String, &Value> = map.iter().collect();
            out.push('{');
            for (i, (k, v)) in sorted.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(v, out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(v, out);
            }
            out.push(']');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

/// Files of one stage, relative to the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageOutput {
    pub stage: Stage,
    pub summary: String,
    pub files: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub id: String,
    pub config_hash: String,
    pub version: String,
    pub stages: Vec<StageOutput>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl RunManifest {
    pub fn file_name(id: &str, hash: &str) -> String {
        format!("{id}-{}-manifest.json", &hash[..8])
    }

    pub fn path(&self) -> PathBuf {
        self.output_dir.join(Self::file_name(&self.id, &self.config_hash))
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut manifest: Self = serde_json::from_str(&text).map_err(|e| ExperimentError::Schema {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        manifest.output_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(manifest)
    }

    /// Every listed file, with its path.
    pub fn all_files(&self) -> Vec<PathBuf> {
        self.stages
            .iter()
            .flat_map(|s| std::iter::once(&s.summary).chain(&s.files))
            .map(|f| self.output_dir.join(f))
            .collect()
    }
}

struct Writer {
    dir: PathBuf,
    prefix: String,
}

impl Writer {
    fn name(&self, part: &str, ext: &str) -> String {
        format!("{}-{part}.{ext}", self.prefix)
    }

    fn bytes(&self, part: &str, ext: &str, data: &[u8]) -> Result<String, ExperimentError> {
        let name = self.name(part, ext);
        let path = self.dir.join(&name);
        std::fs::write(&path, data).map_err(io_err(&path))?;
        Ok(name)
    }

    fn json(&self, part: &str, value: &Value) -> Result<String, ExperimentError> {
        let mut text = serde_json::to_string_pretty(value).expect("json serializes");
        text.push('\n');
        self.bytes(part, "json", text.as_bytes())
    }

    fn csv(&self, part: &str, header: &[&str], rows: &[Vec<String>]) -> Result<String, ExperimentError> {
        self.bytes(part, "csv", &csv_bytes(header, rows))
    }
}

/// `\n`-terminated CSV with a header row.
pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn opt_usize(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Half-width of the level grid: 1.5 times the largest modulus among `E`,
/// `K` and the poles up to level `R_m`.
pub fn level_grid_half_width(lab: &Lab, k: &CompactSet) -> f64 {
    let r_m = lab.meromorphy.r_m;
    let poles = lab
        .f
        .poles()
        .iter()
        .filter(|p| level_value(&lab.measure, p.value) <= r_m * (1.0 + 1e-9))
        .map(|p| p.value.norm())
        .fold(0.0, f64::max);
    1.5 * lab.e.extent().max(k.extent()).max(poles).max(1e-3)
}

/// Run the stages of `config` and write their outputs; the manifest is
/// written last.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunManifest, ExperimentError> {
    let lab = config.lab()?;
    match config.precision {
        Precision::F64 => run_with::<f64>(config, &lab),
        Precision::DoubleDouble => run_with::<DoubleDouble>(config, &lab),
    }
}

fn run_with<R: Real>(config: &ExperimentConfig, lab: &Lab) -> Result<RunManifest, ExperimentError> {
    let hash = config.config_hash();
    let dir = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let out = Writer {
        dir: dir.clone(),
        prefix: format!("{}-{}", config.id, &hash[..8]),
    };
    let stages = config.stage_list();
    let mut warnings = Vec::new();
    if lab.meromorphy.r_m.is_finite() {
        let r_m = lab.meromorphy.r_m;
        if config
            .k
            .sample_points(&config.grid)
            .iter()
            .any(|&z| level_value(&lab.measure, z) >= r_m)
        {
            warnings.push("K is not contained in D_{m,mu}".to_string());
        }
    }
    if config
        .k
        .sample_points(&config.grid)
        .iter()
        .any(|&z| config.e.contains(z, 0.0))
    {
        warnings.push("K meets E".to_string());
    }
    let sweep: Option<Sweep<R>> = stages
        .iter()
        .any(|s| s.needs_sweep())
        .then(|| lab.sweep::<R>((config.n_lo(), config.n_hi())));
    let mut exactness: Option<ExactnessReport> = None;
    let mut level: Option<LevelGrid> = None;
    let mut outputs = Vec::new();
    for &stage in &stages {
        let fail = |e: &dyn std::fmt::Display| ExperimentError::stage(stage, e);
        let output = match stage {
            Stage::Rates => {
                let sweep = sweep.as_ref().expect("sweep built");
                let rates =
                    rate_sequence(lab, sweep, &config.k, config.eps, config.rate_window()).map_err(|e| fail(&e))?;
                let failures = rates.rows.iter().filter(|r| r.failure.is_some()).count();
                if failures > 0 {
                    warnings.push(format!("{failures} of {} builds failed", rates.rows.len()));
                }
                let rows: Vec<Vec<String>> = rates
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.n.to_string(),
                            opt(r.e_n),
                            opt(r.root_rate),
                            fmt_f64(rates.target),
                            opt_usize(r.k_n),
                            opt(r.pole_error),
                            opt(r.omega_radius_sum),
                            if r.failure.is_some() { "failed" } else { "ok" }.to_string(),
                        ]
                    })
                    .collect();
                let files = vec![
                    out.csv(
                        "rates",
                        &[
                            "n",
                            "e_n",
                            "root_rate",
                            "target",
                            "k_n",
                            "pole_error",
                            "omega_radius_sum",
                            "status",
                        ],
                        &rows,
                    )?,
                    out.csv("roots", &["n", "kind", "re", "im", "multiplicity"], &roots_rows(sweep))?,
                    out.json("approximants", &approximants_json(sweep))?,
                ];
                let summary = json!({
                    "target": rates.target,
                    "level_norm": rates.level_norm,
                    "r_m": rates.r_m,
                    "tail": rates.tail,
                    "tail_geomean": rates.tail_geomean,
                    "tail_slope_rate": rates.tail_slope_rate,
                    "inferred_r": rates.inferred_r,
                    "inferred_r_geomean": rates.inferred_r_geomean,
                    "radius_bound_ok": rates.radius_bound_ok,
                    "pole_error_rate": rates.pole_error_rate,
                    "epsilon": rates.epsilon,
                    "max_omega_radius_sum": rates.max_omega_radius_sum,
                    "exact": rates.exact,
                    "failures": failures,
                });
                (summary, files)
            }
            Stage::Exactness => {
                let sweep = sweep.as_ref().expect("sweep built");
                let report = exactness_subsequence(lab, sweep, &config.k, config.delta).map_err(|e| fail(&e))?;
                let rows: Vec<Vec<String>> = report
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.n.to_string(),
                            opt(r.h_n),
                            opt(r.h_hat),
                            fmt_f64(report.target),
                            u8::from(r.in_lambda).to_string(),
                        ]
                    })
                    .collect();
                let files = vec![out.csv("exactness", &["n", "h_n", "h_hat", "target", "in_lambda"], &rows)?];
                let summary = exactness_summary(&report);
                exactness = Some(report);
                (summary, files)
            }
            Stage::Distribution => {
                let results = interpolation_distribution_test(
                    &lab.table,
                    &lab.measure,
                    Some(&lab.e),
                    &config.distribution.n_list,
                    &config.distribution.test_points,
                )
                .map_err(|e| fail(&e))?;
                let rows: Vec<Vec<String>> = results
                    .iter()
                    .map(|(n, d)| vec![n.to_string(), fmt_f64(d.value), d.skipped.to_string()])
                    .collect();
                let files = vec![out.csv("distribution", &["n", "discrepancy", "skipped"], &rows)?];
                let summary = json!({
                    "test_points": config.distribution.test_points.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                    "n": results.iter().map(|r| r.0).collect::<Vec<_>>(),
                    "discrepancy": results.iter().map(|r| r.1.value).collect::<Vec<_>>(),
                });
                (summary, files)
            }
            Stage::Level => {
                let grid = level_grid(lab, config);
                let boundary = grid.boundary_samples(config.cluster.samples);
                let components = grid.components();
                if components > 1 {
                    warnings.push(format!("D_{{m,mu}} has {components} components on the grid"));
                }
                let mut csv_data = Vec::new();
                grid.write_csv(&mut csv_data).map_err(|e| fail(&e))?;
                let files = vec![
                    out.bytes("level-grid", "csv", &csv_data)?,
                    out.csv("level-boundary", &["index", "x", "y"], &boundary_rows(&boundary))?,
                ];
                let summary = json!({
                    "r_m": lab.meromorphy.r_m,
                    "pole_levels": lab.meromorphy.pole_levels,
                    "half_width": level_grid_half_width(lab, &config.k),
                    "resolution": config.grid.resolution,
                    "components": components,
                    "connected": components == 1,
                    "boundary_samples": boundary.len(),
                });
                level = Some(grid);
                (summary, files)
            }
            Stage::Clusters => {
                let sweep = sweep.as_ref().expect("sweep built");
                if !lab.meromorphy.r_m.is_finite() {
                    return Err(fail(&"R_m is infinite, so D_{m,mu} has no boundary to scan"));
                }
                let report = match exactness.take() {
                    Some(r) => r,
                    None => exactness_subsequence(lab, sweep, &config.k, config.delta).map_err(|e| fail(&e))?,
                };
                let grid = level.take().unwrap_or_else(|| level_grid(lab, config));
                let samples = grid.boundary_samples(config.cluster.samples);
                if samples.is_empty() {
                    return Err(fail(&"level grid shows no boundary of D_{m,mu}"));
                }
                let zeros: Vec<(usize, RootSet)> = sweep.built().map(|a| (a.n, a.free_zeros.clone())).collect();
                let scan = zero_cluster_scan(
                    &zeros,
                    &report.lambda,
                    &samples,
                    config.cluster.r,
                    config.cluster_window(),
                );
                let rows: Vec<Vec<String>> = scan
                    .rows
                    .iter()
                    .map(|r| {
                        let z = scan.samples[r.sample];
                        vec![
                            r.sample.to_string(),
                            fmt_f64(z.re),
                            fmt_f64(z.im),
                            r.n.to_string(),
                            fmt_f64(r.mass),
                        ]
                    })
                    .collect();
                let files = vec![out.csv("clusters", &["sample", "x", "y", "n", "mass"], &rows)?];
                let summary = json!({
                    "r": scan.r,
                    "samples": scan.samples.len(),
                    "window": config.cluster_window(),
                    "ns": scan.ns,
                    "summary": scan.summary,
                    "no_lambda": scan.no_lambda,
                });
                (summary, files)
            }
        };
        let (summary, files) = output;
        outputs.push(StageOutput {
            stage,
            summary: out.json(stage.name(), &summary)?,
            files,
        });
    }
    let manifest = RunManifest {
        id: config.id.clone(),
        config_hash: hash,
        version: VERSION.to_string(),
        stages: outputs,
        warnings,
        output_dir: dir,
    };
    out.json(
        "manifest",
        &serde_json::to_value(&manifest).expect("manifest serializes"),
    )?;
    Ok(manifest)
}

fn level_grid(lab: &Lab, config: &ExperimentConfig) -> LevelGrid {
    LevelGrid::sample(
        &lab.meromorphy.domain(&lab.measure),
        level_grid_half_width(lab, &config.k),
        config.grid.resolution,
    )
}

fn exactness_summary(report: &ExactnessReport) -> Value {
    json!({
        "target": report.target,
        "delta": report.delta,
        "lambda": report.lambda,
        "density_ratio": report.density_ratio,
        "tail_density_ratio": report.tail_density_ratio,
        "f_norm_e": report.f_norm_e,
        "degenerate": report.degenerate,
        "diagnostic": report.diagnostic,
    })
}

fn boundary_rows(points: &[Complex64]) -> Vec<Vec<String>> {
    points
        .iter()
        .enumerate()
        .map(|(i, z)| vec![i.to_string(), fmt_f64(z.re), fmt_f64(z.im)])
        .collect()
}

fn roots_rows<R: Real>(sweep: &Sweep<R>) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for a in sweep.built() {
        for (kind, set) in [("zero", &a.free_zeros), ("pole", &a.free_poles)] {
            for r in set.iter() {
                rows.push(vec![
                    a.n.to_string(),
                    kind.to_string(),
                    fmt_f64(r.value.re),
                    fmt_f64(r.value.im),
                    r.multiplicity.to_string(),
                ]);
            }
        }
    }
    rows
}

fn approximants_json<R: Real>(sweep: &Sweep<R>) -> Value {
    Value::Array(
        sweep
            .entries
            .iter()
            .map(|e| match &e.result {
                Ok(a) => a.to_json(),
                Err(msg) => json!({ "n": e.n, "error": msg }),
            })
            .collect(),
    )
}

/// The approximant of order `n` as JSON.
pub fn compute_approximant(config: &ExperimentConfig, n: usize) -> Result<Value, ExperimentError> {
    let lab = config.lab()?;
    let fail = |e: crate::pade::PadeError| ExperimentError::Stage {
        stage: "compute".into(),
        message: e.to_string(),
    };
    Ok(match config.precision {
        Precision::F64 => build_pade::<f64>(&lab.f, &lab.table, n, lab.m, &lab.options)
            .map_err(fail)?
            .to_json(),
        Precision::DoubleDouble => build_pade::<DoubleDouble>(&lab.f, &lab.table, n, lab.m, &lab.options)
            .map_err(fail)?
            .to_json(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// The consolidated summary: one section per completed stage.
pub fn summary_value(manifest: &RunManifest) -> Result<Value, ExperimentError> {
    let mut missing = Vec::new();
    let mut sections = serde_json::Map::new();
    for s in &manifest.stages {
        for f in std::iter::once(&s.summary).chain(&s.files) {
            if !manifest.output_dir.join(f).is_file() {
                missing.push(format!("{}: {f}", s.stage.name()));
            }
        }
        let path = manifest.output_dir.join(&s.summary);
        if let Ok(text) = std::fs::read_to_string(&path) {
            let value: Value = serde_json::from_str(&text).map_err(|e| ExperimentError::Schema {
                line: e.line(),
                column: e.column(),
                message: format!("{}: {e}", path.display()),
            })?;
            sections.insert(s.stage.name().to_string(), value);
        }
    }
    if !missing.is_empty() {
        return Err(ExperimentError::MissingOutputs(missing));
    }
    Ok(json!({
        "id": manifest.id,
        "config_hash": manifest.config_hash,
        "version": manifest.version,
        "warnings": manifest.warnings,
        "sections": Value::Object(sections),
    }))
}

/// Leaves of `value` as `(section, key, value)`; keys are dotted paths with
/// `[i]` for array entries.
pub fn flatten_summary(value: &Value) -> Vec<[String; 3]> {
    fn walk(section: &str, key: String, v: &Value, out: &mut Vec<[String; 3]>) {
        match v {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if key.is_empty() {
                        k.clone()
                    } else {
                        format!("{key}.{k}")
                    };
                    walk(section, key, v, out);
                }
            }
            Value::Array(items) => {
                for (i, v) in items.iter().enumerate() {
                    walk(section, format!("{key}[{i}]"), v, out);
                }
            }
            Value::Number(n) => out.push([section.into(), key, n.as_f64().map_or_else(|| n.to_string(), fmt_f64)]),
            Value::String(s) => out.push([section.into(), key, s.clone()]),
            other => out.push([section.into(), key, other.to_string()]),
        }
    }
    let mut out = Vec::new();
    for head in ["id", "config_hash", "version"] {
        if let Some(v) = value.get(head) {
            walk("run", head.to_string(), v, &mut out);
        }
    }
    if let Some(Value::Object(sections)) = value.get("sections") {
        for (name, v) in sections {
            walk(name, String::new(), v, &mut out);
        }
    }
    out
}

/// Write `{id}-{hash8}-summary.{csv|json}` next to the manifest.
pub fn export_report(manifest: &RunManifest, format: ReportFormat) -> Result<PathBuf, ExperimentError> {
    let value = summary_value(manifest)?;
    let out = Writer {
        dir: manifest.output_dir.clone(),
        prefix: format!("{}-{}", manifest.id, &manifest.config_hash[..8]),
    };
    let name = match format {
        ReportFormat::Json => out.json("summary", &value)?,
        ReportFormat::Csv => {
            let rows: Vec<Vec<String>> = flatten_summary(&value).into_iter().map(|r| r.to_vec()).collect();
            out.csv("summary", &["section", "key", "value"], &rows)?
        }
    };
    Ok(manifest.output_dir.join(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_validates() {
        for (name, _) in PRESETS {
            let c = ExperimentConfig::preset(name).unwrap();
            c.lab().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(c.preset.as_deref(), Some(*name));
        }
        let e = ExperimentConfig::preset("nope").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn schema_errors_carry_positions() {
        let e = ExperimentConfig::from_json_str("{\n  \"id\": \"x\",\n  \"bogus\": 1\n}", Path::new(".")).unwrap_err();
        match e {
            ExperimentError::Schema { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn hash_ignores_plumbing_and_key_order() {
        let a = ExperimentConfig::preset("montessus-m2").unwrap();
        let mut b = a.clone();
        b.output_dir = Some("elsewhere".into());
        b.preset = None;
        b.stages.reverse();
        assert_eq!(a.config_hash(), b.config_hash());
        let mut value: serde_json::Map<String, Value> =
            serde_json::from_str(PRESETS.iter().find(|p| p.0 == "montessus-m2").unwrap().1).unwrap();
        let reversed: serde_json::Map<String, Value> = {
            let mut keys: Vec<_> = value.keys().cloned().collect();
            keys.reverse();
            keys.into_iter()
                .map(|k| (k.clone(), value.remove(&k).unwrap()))
                .collect()
        };
        let c = ExperimentConfig::from_json_str(&Value::Object(reversed).to_string(), Path::new(".")).unwrap();
        assert_eq!(a.config_hash(), c.config_hash());
        let mut d = a.clone();
        d.eps = 0.02;
        assert_ne!(a.config_hash(), d.config_hash());
    }

    #[test]
    fn flatten_paths() {
        let v = json!({"id": "a", "sections": {"rates": {"tail": [24, 44], "x": {"y": 0.5}, "b": true, "z": null}}});
        let flat = flatten_summary(&v);
        assert!(flat.contains(&["run".into(), "id".into(), "a".into()]));
        assert!(flat.contains(&["rates".into(), "tail[1]".into(), "44".into()]));
        assert!(flat.contains(&["rates".into(), "x.y".into(), "0.5".into()]));
        assert!(flat.contains(&["rates".into(), "b".into(), "true".into()]));
        assert!(flat.contains(&["rates".into(), "z".into(), "null".into()]));
    }
}
