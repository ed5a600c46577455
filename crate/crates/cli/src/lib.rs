//! Command-line front end: single-scenario analysis, simulation, analytic
//! versus simulated comparison, state counts and parameter sweeps. All
//! results are written as CSV.

mod commands;
pub mod config;
mod output;

use std::fmt;
use std::path::PathBuf;

use aoi_core::{Horizon, Policy, SourceParams};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::execute;

/// Exit status of a numerical failure.
pub const EXIT_NUMERICAL: i32 = 1;
/// Exit status of a malformed command line or config file.
pub const EXIT_USAGE: i32 = 2;
/// Exit status of `compare` when a sup-distance exceeds `--threshold`.
pub const EXIT_THRESHOLD: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
    Threshold(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_NUMERICAL,
            CliError::Threshold(_) => EXIT_THRESHOLD,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
            CliError::Threshold(m) => write!(f, "threshold exceeded: {m}"),
        }
    }
}

impl From<aoi_core::Error> for CliError {
    fn from(e: aoi_core::Error) -> Self {
        match e {
            aoi_core::Error::InvalidParams(_) | aoi_core::Error::InvalidArgument(_) => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "aoi", version, about = "Per-source Age-of-Information distributions for multi-source servers")]
pub struct Cli {
    /// Flat `key = value` file supplying defaults for any long flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic CDF, pdf and summary for each source.
    Analyze(AnalyzeArgs),
    /// Simulated time-average CDF, means and observer-state frequencies.
    Simulate(SimulateArgs),
    /// Sup-distance between analytic and simulated CDFs per source.
    Compare(CompareArgs),
    /// Number of positive-drift fluid-queue states per policy.
    Statecount(StatecountArgs),
    /// Mean age or violation probability over a parameter range.
    Sweep(SweepArgs),
}

/// Source rates: explicit vectors or a balanced load.
#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Arrival rates, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub lambdas: Option<Vec<f64>>,
    /// Service rates, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub mus: Option<Vec<f64>>,
    /// Use `--n` identical sources with total load `--rho`.
    #[arg(long)]
    pub balanced: bool,
    #[arg(long)]
    pub n: Option<usize>,
    /// Total load `Σ λ_n / μ_n`.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Common service rate of a balanced scenario.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
}

impl ScenarioArgs {
    pub fn params(&self) -> Result<SourceParams, CliError> {
        if self.balanced {
            if self.lambdas.is_some() || self.mus.is_some() {
                return Err(CliError::Usage("--balanced excludes --lambdas/--mus".into()));
            }
            let n = self.n.ok_or_else(|| CliError::Usage("--balanced needs --n".into()))?;
            let rho = self.rho.ok_or_else(|| CliError::Usage("--balanced needs --rho".into()))?;
            return Ok(SourceParams::balanced(n, rho, self.mu)?);
        }
        match (&self.lambdas, &self.mus) {
            (Some(l), Some(m)) => Ok(SourceParams::new(l.clone(), m.clone())?),
            _ => Err(CliError::Usage("give --lambdas and --mus, or --balanced --n --rho".into())),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PolicyArgs {
    /// One or more of fsfs, esfs, sbr.
    #[arg(long = "policies", alias = "policy", value_delimiter = ',', num_args = 1.., default_value = "fsfs,esfs,sbr")]
    pub policies: Vec<Policy>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Age grid: a point count over `[0, x_99.99]`, or `lo:hi:points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    Points(usize),
    Range { lo: f64, hi: f64, points: usize },
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<_> = s.split(':').collect();
        let points = |p: &str| match p.trim().parse::<usize>() {
            Ok(k) if k >= 2 => Ok(k),
            _ => Err(format!("grid point count `{p}` must be an integer ≥ 2")),
        };
        match parts.as_slice() {
            [p] => Ok(GridSpec::Points(points(p)?)),
            [lo, hi, p] => {
                let (lo, hi) = (parse_f64(lo)?, parse_f64(hi)?);
                if !(lo >= 0.0 && hi > lo) {
                    return Err(format!("grid range {lo}:{hi} must satisfy 0 ≤ lo < hi"));
                }
                Ok(GridSpec::Range { lo, hi, points: points(p)? })
            }
            _ => Err(format!("grid `{s}` is neither POINTS nor LO:HI:POINTS")),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

/// `lo:hi` with `0 < lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl std::str::FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s.split_once(':').ok_or_else(|| format!("range `{s}` must be LO:HI"))?;
        let (lo, hi) = (parse_f64(lo)?, parse_f64(hi)?);
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(format!("range {lo}:{hi} must satisfy 0 < lo < hi"));
        }
        Ok(Range { lo, hi })
    }
}

/// Simulation length: an event count (`1e7`) or seconds (`5000s`).
pub fn parse_horizon(s: &str) -> Result<Horizon, String> {
    let s = s.trim();
    if let Some(secs) = s.strip_suffix('s') {
        let t = parse_f64(secs)?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(format!("time horizon {t} must be positive"));
        }
        return Ok(Horizon::Time(t));
    }
    let e = parse_f64(s)?;
    if !(e >= 1.0 && e.fract() == 0.0 && e <= u64::MAX as f64) {
        return Err(format!("event budget `{s}` must be a positive integer"));
    }
    Ok(Horizon::Events(e as u64))
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// POINTS over `[0, x_99.99]` or LO:HI:POINTS.
    #[arg(long, default_value = "400")]
    pub grid: GridSpec,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Event count (`1e7`) or simulated seconds (`5000s`).
    #[arg(long, default_value = "1e7", value_parser = parse_horizon)]
    pub horizon: Horizon,
    /// Fraction of the horizon discarded, in [0, 0.5).
    #[arg(long, default_value_t = aoi_core::sim::DEFAULT_WARMUP)]
    pub warmup: f64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Thresholds reported in the summary as violation probabilities.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub gammas: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Independent replications, run in parallel.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Largest acceptable sup-distance between the two CDFs.
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StatecountArgs {
    /// Source counts, `LO..HI` inclusive or a single value.
    #[arg(long, default_value = "2..5")]
    pub n: String,
    /// Directory for `statecount.csv`; stdout only if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    /// Total load of a balanced scenario.
    Rho,
    /// Share `ρ_1/ρ` of source 1 at fixed total load, two sources.
    Rho1,
    /// Age threshold `γ` of the violation probability.
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    /// Average of the per-source mean ages.
    Mean,
    /// Average violation probability at `--gamma`.
    Violation,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: Axis,
    #[arg(long)]
    pub range: Range,
    #[arg(long, default_value_t = 24)]
    pub points: usize,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// Quantity swept on the `rho` and `rho1` axes.
    #[arg(long, value_enum, default_value = "mean")]
    pub metric: Metric,
    /// Threshold for `--metric violation`.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parse `argv` (program name first), merge any config file, and run.
/// Returns the process exit status.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match config::merge(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("aoi: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("aoi: {e}");
            e.exit_code()
        }
    }
}
