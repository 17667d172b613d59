//! `padelab`: run multipoint Padé experiments from JSON configs or presets.
//!
//! Exit codes: 0 success, 1 I/O, 2 config or usage, 3 numerical stage
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use padelab::experiment::{compute_approximant, PRESETS};
use padelab::{export_report, run_experiment, ExperimentConfig, ExperimentError, ReportFormat, RunManifest, Stage};

#[derive(Parser)]
#[command(name = "padelab", version, about = "Multipoint Padé approximant experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one approximant and print it as JSON.
    Compute {
        #[command(flatten)]
        source: Source,
        /// Numerator degree; the denominator degree is the config's `m`.
        #[arg(long)]
        n: usize,
    },
    /// Error sweep and root rates.
    Sweep(StageArgs),
    /// Exact maximally convergent subsequence.
    Exactness(StageArgs),
    /// Node distribution against the measure.
    Distribution(StageArgs),
    /// Zero clustering along the boundary of the meromorphy region.
    Clusters(StageArgs),
    /// Every stage listed in the config.
    Run(StageArgs),
    /// Consolidated summary of a finished run.
    Export {
        /// Manifest written by a run; otherwise located from the config.
        #[arg(long, conflicts_with_all = ["config", "preset"])]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        source: OptionalSource,
        /// Directory holding the run, overriding `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// List shipped presets.
    Presets,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Shipped preset name; see `padelab presets`.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
#[group(multiple = false)]
struct OptionalSource {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Shipped preset name; see `padelab presets`.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct StageArgs {
    #[command(flatten)]
    source: Source,
    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// First n of the sweep.
    #[arg(long)]
    n_min: Option<usize>,
    /// Last n of the sweep.
    #[arg(long)]
    n_max: Option<usize>,
    /// Total radius budget of the excluded disks.
    #[arg(long)]
    eps: Option<f64>,
    /// Half-width of the band around the target rate.
    #[arg(long)]
    delta: Option<f64>,
    /// Write the consolidated summary as well.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

fn load(config: Option<&PathBuf>, preset: Option<&String>) -> Result<ExperimentConfig, ExperimentError> {
    match (config, preset) {
        (Some(path), _) => ExperimentConfig::from_path(path),
        (None, Some(name)) => ExperimentConfig::preset(name),
        (None, None) => Err(ExperimentError::Invalid(
            "one of --config or --preset is required".into(),
        )),
    }
}

fn run_stage(args: StageArgs, stages: Option<Vec<Stage>>) -> Result<(), ExperimentError> {
    let mut config = load(args.source.config.as_ref(), args.source.preset.as_ref())?;
    if let Some(stages) = stages {
        config.stages = stages;
    }
    if let Some(n) = args.n_min {
        config.n_range[0] = n;
    }
    if let Some(n) = args.n_max {
        config.n_range[1] = n;
    }
    if let Some(eps) = args.eps {
        config.eps = eps;
    }
    if let Some(delta) = args.delta {
        config.delta = delta;
    }
    if args.out.is_some() {
        config.output_dir = args.out;
    }
    let manifest = run_experiment(&config)?;
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    for file in manifest.all_files() {
        println!("{}", file.display());
    }
    println!("{}", manifest.path().display());
    if let Some(format) = args.format {
        println!("{}", export_report(&manifest, format.into())?.display());
    }
    Ok(())
}

fn export(
    manifest: Option<PathBuf>,
    source: OptionalSource,
    out: Option<PathBuf>,
    format: Format,
) -> Result<(), ExperimentError> {
    let path = match manifest {
        Some(p) => p,
        None => {
            let mut config = load(source.config.as_ref(), source.preset.as_ref())?;
            if out.is_some() {
                config.output_dir = out;
            }
            let dir = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
            dir.join(RunManifest::file_name(&config.id, &config.config_hash()))
        }
    };
    let manifest = RunManifest::load(&path)?;
    println!("{}", export_report(&manifest, format.into())?.display());
    Ok(())
}

fn configure_threads() -> Result<(), ExperimentError> {
    let Ok(value) = std::env::var("PADE_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        ExperimentError::Invalid(format!("PADE_LAB_THREADS must be a positive integer, got '{value}'"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| ExperimentError::Invalid(e.to_string()))
}

fn dispatch(cli: Cli) -> Result<(), ExperimentError> {
    configure_threads()?;
    match cli.command {
        Command::Compute { source, n } => {
            let config = load(source.config.as_ref(), source.preset.as_ref())?;
            println!("{:#}", compute_approximant(&config, n)?);
            Ok(())
        }
        Command::Sweep(args) => run_stage(args, Some(vec![Stage::Rates])),
        Command::Exactness(args) => run_stage(args, Some(vec![Stage::Exactness])),
        Command::Distribution(args) => run_stage(args, Some(vec![Stage::Distribution])),
        Command::Clusters(args) => run_stage(args, Some(vec![Stage::Clusters])),
        Command::Run(args) => run_stage(args, None),
        Command::Export {
            manifest,
            source,
            out,
            format,
        } => export(manifest, source, out, format),
        Command::Presets => {
            for (name, _) in PRESETS {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
