//! Command-line interface: argument definitions, dispatch, and the
//! exit-status contract.
//!
//! Exit statuses are total and documented:
//!
//! | status | meaning                                             |
//! |--------|-----------------------------------------------------|
//! | 0      | `test`: favor-z; other commands: success            |
//! | 1      | `test`: favor-y                                     |
//! | 2      | `test`: inconclusive                                |
//! | 3      | usage or configuration error (flags, grids, env)    |
//! | 4      | input problem (unreadable, ragged, non-finite, ...) |
//! | 5      | cannot write an output file                         |
//! | 6      | estimation failed mid-run                           |
//!
//! `--help`/`--version` print and exit 0.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::csvio::{read_sample, CsvError};
use crate::experiments::{
    calibration_run, gamma_sweep, isocurve_validation, power_comparison, CalibrationGeometry,
    ExperimentConfig, ExperimentError, KernelConfig,
};
use crate::report::{
    calibration_csv, isocurve_csv, power_csv, sweep_csv, InputEcho, ResultDocument, TestResultDoc,
    TOOL_VERSION,
};
use relmmd_core::kernels::{relative_bandwidth, KernelFamily, KernelSpec, SampleSet};
use relmmd_core::reltest::{relative_test_from_samples, Decision};

/// Sample sizes below this raise an advisory warning: the test is built on
/// asymptotic arguments.
const SMALL_SAMPLE_WARNING: usize = 50;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Estimation(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 3,
            AppError::Input(_) => 4,
            AppError::Output { .. } => 5,
            AppError::Estimation(_) => 6,
        }
    }
}

impl From<CsvError> for AppError {
    fn from(e: CsvError) -> Self {
        AppError::Input(e.to_string())
    }
}

impl From<ExperimentError> for AppError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(_) => AppError::Usage(e.to_string()),
            ExperimentError::Repetition { .. } => AppError::Estimation(e.to_string()),
        }
    }
}

fn core_error(e: relmmd_core::Error) -> AppError {
    match e {
        relmmd_core::Error::InvalidBandwidth(_) | relmmd_core::Error::InvalidAlpha(_) => {
            AppError::Usage(e.to_string())
        }
        other => AppError::Input(other.to_string()),
    }
}

/// Cap rayon's parallelism from the `RELMMD_THREADS` environment variable.
/// Must run before any parallel work.
pub fn init_threads() -> Result<(), AppError> {
    let Ok(raw) = std::env::var("RELMMD_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| AppError::Usage(format!("RELMMD_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| AppError::Usage(format!("cannot configure the thread pool: {e}")))?;
    Ok(())
}

#[derive(Debug, Parser)]
#[command(
    name = "relmmd",
    version,
    about = "Relative similarity testing: which of two candidate sample sets \
             is significantly closer to a reference, in maximum mean discrepancy",
    after_help = "Gaussian kernel convention: k(u,v) = exp(-||u-v||^2 / (2 sigma^2)). \
                  With --bandwidth median, sigma is the median cross-pair distance, \
                  averaged between the (reference, y) and (reference, z) pairs.\n\n\
                  Exit status of `test`: 0 favor-z, 1 favor-y, 2 inconclusive, >2 error.\n\
                  RELMMD_THREADS caps internal parallelism."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test whether candidate Z's distribution is significantly closer to
    /// the reference than candidate Y's (small p favors Z, large p favors Y)
    Test(TestArgs),
    /// Sweep the synthetic three-Gaussian study over a gamma grid
    Sweep(SweepArgs),
    /// Compare the joint test's power against the split-reference baseline
    Power(SweepArgs),
    /// Repeated tests at the null boundary; p-values should be uniform
    Calibrate(CalibrateArgs),
    /// Scatter of the paired MMD estimates against their analytic Gaussian
    Isocurve(IsocurveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Rbf,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeometryArg {
    /// Distinct means, identity covariances (needs gamma = 0.5)
    Means,
    /// Mirrored means and mirrored anisotropic covariances
    MeansOrientations,
    /// Common mean, mirrored anisotropic covariances
    Orientations,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Reference sample CSV (rows = observations, columns = features)
    #[arg(long = "ref")]
    pub ref_path: PathBuf,
    /// Candidate Y sample CSV
    #[arg(long)]
    pub y: PathBuf,
    /// Candidate Z sample CSV
    #[arg(long)]
    pub z: PathBuf,
    /// Kernel family
    #[arg(long, value_enum, default_value_t = KernelArg::Rbf)]
    pub kernel: KernelArg,
    /// "median" (averaged median heuristic) or a positive real; rbf only
    #[arg(long)]
    pub bandwidth: Option<String>,
    /// Significance level of each one-sided decision
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Output format on stdout
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    /// Skip one header row in each input file
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct ExperimentFlags {
    /// Mean of candidate Y (comma-separated coordinates)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-5,-5")]
    pub mu_y: Vec<f64>,
    /// Mean of candidate Z
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "5,5")]
    pub mu_z: Vec<f64>,
    /// Reference sample size
    #[arg(long, default_value_t = 500)]
    pub m: usize,
    /// Candidate Y sample size
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Candidate Z sample size
    #[arg(long, default_value_t = 500)]
    pub r: usize,
    /// Repetitions per grid point
    #[arg(long = "reps", default_value_t = 100)]
    pub repetitions: usize,
    /// RNG seed; identical seeds give byte-identical reports
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = KernelArg::Rbf)]
    pub kernel: KernelArg,
    /// "median" or a positive real; rbf only
    #[arg(long)]
    pub bandwidth: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Report file to write (CSV with `#` comment lines)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub flags: ExperimentFlags,
    /// Gamma grid as start:end:count, endpoints included
    #[arg(long, default_value = "0.1:0.9:41")]
    pub gammas: String,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub flags: ExperimentFlags,
    /// Interpolation weight for the reference mean
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = GeometryArg::Means)]
    pub geometry: GeometryArg,
}

#[derive(Debug, Args)]
pub struct IsocurveArgs {
    #[command(flatten)]
    pub flags: ExperimentFlags,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
}

fn kernel_config(kernel: KernelArg, bandwidth: &Option<String>) -> Result<KernelConfig, AppError> {
    match (kernel, bandwidth.as_deref()) {
        (KernelArg::Rbf, None) | (KernelArg::Rbf, Some("median")) => {
            Ok(KernelConfig::RbfMedianHeuristic)
        }
        (KernelArg::Rbf, Some(text)) => {
            let bandwidth: f64 = text.parse().map_err(|_| {
                AppError::Usage(format!(
                    "--bandwidth must be \"median\" or a positive real, got {text:?}"
                ))
            })?;
            if !(bandwidth.is_finite() && bandwidth > 0.0) {
                return Err(AppError::Usage(format!(
                    "--bandwidth must be positive and finite, got {bandwidth}"
                )));
            }
            Ok(KernelConfig::RbfFixed { bandwidth })
        }
        (KernelArg::Linear, None) => Ok(KernelConfig::Linear),
        (KernelArg::Linear, Some(_)) => Err(AppError::Usage(
            "--bandwidth applies only to --kernel rbf".into(),
        )),
    }
}

/// Parse "start:end:count" into an inclusive linear grid.
fn parse_gammas(text: &str) -> Result<Vec<f64>, AppError> {
    let bad = || {
        AppError::Usage(format!(
            "--gammas must be start:end:count (e.g. 0.1:0.9:41), got {text:?}"
        ))
    };
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let end: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if count == 0 {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    if !(end > start) {
        return Err(AppError::Usage(format!(
            "--gammas needs end > start for count > 1, got {text:?}"
        )));
    }
    let step = (end - start) / (count as f64 - 1.0);
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

fn experiment_config(
    flags: &ExperimentFlags,
    gammas: Vec<f64>,
) -> Result<ExperimentConfig, AppError> {
    let config = ExperimentConfig {
        mu_y: flags.mu_y.clone(),
        mu_z: flags.mu_z.clone(),
        gammas,
        m: flags.m,
        n: flags.n,
        r: flags.r,
        repetitions: flags.repetitions,
        seed: flags.seed,
        kernel: kernel_config(flags.kernel, &flags.bandwidth)?,
        alpha: flags.alpha,
    };
    config.validate()?;
    Ok(config)
}

fn write_report(path: &PathBuf, contents: &str) -> Result<(), AppError> {
    fs::write(path, contents).map_err(|source| AppError::Output {
        path: path.display().to_string(),
        source,
    })
}

fn resolve_test_kernel(
    kernel: KernelArg,
    bandwidth: &Option<String>,
    x: &SampleSet,
    y: &SampleSet,
    z: &SampleSet,
) -> Result<(KernelSpec, Option<f64>, &'static str), AppError> {
    match kernel_config(kernel, bandwidth)? {
        KernelConfig::RbfMedianHeuristic => {
            let bw = relative_bandwidth(x, y, z).map_err(core_error)?;
            let spec = KernelSpec::gaussian_rbf(bw).map_err(core_error)?;
            Ok((spec, Some(bw), "median"))
        }
        KernelConfig::RbfFixed { bandwidth } => {
            let spec = KernelSpec::gaussian_rbf(bandwidth).map_err(core_error)?;
            Ok((spec, Some(bandwidth), "fixed"))
        }
        KernelConfig::Linear => Ok((KernelSpec::linear(), None, "none")),
    }
}

fn cmd_test(args: &TestArgs) -> Result<i32, AppError> {
    let x = read_sample(&args.ref_path, args.header)?;
    let y = read_sample(&args.y, args.header)?;
    let z = read_sample(&args.z, args.header)?;
    for (name, s) in [("reference", &x), ("y", &y), ("z", &z)] {
        if s.dim() != x.dim() {
            return Err(AppError::Input(format!(
                "dimension mismatch: {} has {} columns, reference has {}",
                name,
                s.dim(),
                x.dim()
            )));
        }
        if s.len() < 3 {
            return Err(AppError::Input(format!(
                "sample {} has {} rows; the variance estimators need at least 3",
                name,
                s.len()
            )));
        }
    }

    let (spec, bandwidth, rule) = resolve_test_kernel(args.kernel, &args.bandwidth, &x, &y, &z)?;
    let result = relative_test_from_samples(&x, &y, &z, &spec, args.alpha).map_err(core_error)?;

    let mut warnings = Vec::new();
    if result.degenerate_variance {
        warnings.push(
            "degenerate variance: the projected variance was floored; the p-value is nominal"
                .to_string(),
        );
    }
    let smallest = x.len().min(y.len()).min(z.len());
    if smallest < SMALL_SAMPLE_WARNING {
        warnings.push(format!(
            "small-sample: only {smallest} observations in the smallest set; \
             the Gaussian approximation may be inaccurate"
        ));
    }

    let doc = ResultDocument {
        version: TOOL_VERSION.to_string(),
        inputs: InputEcho {
            ref_path: args.ref_path.display().to_string(),
            y_path: args.y.display().to_string(),
            z_path: args.z.display().to_string(),
            m: x.len(),
            n: y.len(),
            r: z.len(),
            dim: x.dim(),
            kernel: match spec.family() {
                KernelFamily::GaussianRbf => "gaussian-rbf".to_string(),
                KernelFamily::Linear => "linear".to_string(),
            },
            bandwidth,
            bandwidth_rule: rule.to_string(),
            alpha: args.alpha,
            seed: None,
        },
        result: TestResultDoc::from(&result),
        warnings,
    };

    match args.format {
        FormatArg::Json => println!("{}", doc.to_json()),
        FormatArg::Csv => print!("{}", doc.to_csv()),
        FormatArg::Text => print!("{}", doc.to_text()),
    }

    Ok(match result.decision {
        Decision::FavorZ => 0,
        Decision::FavorY => 1,
        Decision::Inconclusive => 2,
    })
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32, AppError> {
    let config = experiment_config(&args.flags, parse_gammas(&args.gammas)?)?;
    let report = gamma_sweep(&config)?;
    write_report(&args.flags.out, &sweep_csv(&report))?;
    println!(
        "wrote sweep report: {} ({} gammas x {} repetitions)",
        args.flags.out.display(),
        config.gammas.len(),
        config.repetitions
    );
    Ok(0)
}

fn cmd_power(args: &SweepArgs) -> Result<i32, AppError> {
    let config = experiment_config(&args.flags, parse_gammas(&args.gammas)?)?;
    let report = power_comparison(&config)?;
    write_report(&args.flags.out, &power_csv(&report))?;
    println!(
        "wrote power comparison: {} ({} gammas x {} repetitions, joint vs split)",
        args.flags.out.display(),
        config.gammas.len(),
        config.repetitions
    );
    Ok(0)
}

fn cmd_calibrate(args: &CalibrateArgs) -> Result<i32, AppError> {
    let config = experiment_config(&args.flags, vec![args.gamma])?;
    let geometry = match args.geometry {
        GeometryArg::Means => CalibrationGeometry::DistinctMeans,
        GeometryArg::MeansOrientations => CalibrationGeometry::MeansAndOrientations,
        GeometryArg::Orientations => CalibrationGeometry::OrientationsOnly,
    };
    let report = calibration_run(&config, geometry)?;
    write_report(&args.flags.out, &calibration_csv(&report))?;
    println!(
        "wrote calibration report: {} ({} repetitions, ks_p_value={})",
        args.flags.out.display(),
        config.repetitions,
        report.ks_p_value
    );
    Ok(0)
}

fn cmd_isocurve(args: &IsocurveArgs) -> Result<i32, AppError> {
    let config = experiment_config(&args.flags, vec![args.gamma])?;
    let report = isocurve_validation(&config)?;
    write_report(&args.flags.out, &isocurve_csv(&report))?;
    println!(
        "wrote iso-curve report: {} (coverage at 2 sigma: {})",
        args.flags.out.display(),
        report.coverage_2sigma
    );
    Ok(0)
}

/// Dispatch a parsed command line; returns the process exit status.
pub fn run(cli: &Cli) -> Result<i32, AppError> {
    match &cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Power(args) => cmd_power(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Isocurve(args) => cmd_isocurve(args),
    }
}
