use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hdlrt::multisplit::PcaPolicy;
use hdlrt::simlab::{GrowthCase, MethodSpec, Noise};
use hdlrt::{Convention, FRule};

/// Likelihood-ratio and largest-root tests for multivariate linear regression.
#[derive(Debug, Parser)]
#[command(name = "hdlrt", version, about)]
pub struct Cli {
    /// Flat key=value file; keys are long flag names, flags given on the
    /// command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Size of the worker pool (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Seed for every random draw of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, default_value_t = 0.05)]
    pub alpha: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

pub const COMMANDS: [&str; 5] = ["test", "multisplit", "simulate", "power", "boundary"];

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test CB = 0 on data files.
    Test(TestArgs),
    /// Split, screen, test and aggregate for p > n.
    Multisplit(MultisplitArgs),
    /// Monte Carlo rejection rates over a grid of designs.
    Simulate(ExperimentArgs),
    /// Power sweep with the asymptotic T1 power, or the formula alone.
    Power(PowerArgs),
    /// Distance of (n, p, m, r) from the classical regimes.
    Boundary(BoundaryArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Design matrix CSV (n x p, one header line).
    #[arg(long)]
    pub x: PathBuf,
    /// Response matrix CSV (n x m).
    #[arg(long)]
    pub y: PathBuf,
    /// Contrast matrix CSV (r x p); the identity when omitted.
    #[arg(long)]
    pub c: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatArgs {
    /// Largest-root convention: johnstone or paper.
    #[arg(long, default_value = "johnstone")]
    pub convention: Convention,
    /// T3 threshold: loglog or a constant.
    #[arg(long, default_value = "loglog")]
    pub f_rule: FRule,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated chi2, bartlett, t1, t2, t3, or all.
    #[arg(long, value_delimiter = ',', default_value = "t3")]
    pub method: Vec<String>,
    #[command(flatten)]
    pub stat: StatArgs,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Screening keeps floor(delta * p) predictors.
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    /// Fraction of rows used for screening.
    #[arg(long, default_value_t = 0.3)]
    pub split_ratio: f64,
    /// none, parallel[:B:pct] or fixed:m0.
    #[arg(long, default_value = "none")]
    pub pca: PcaPolicy,
    /// Lower end of the quantile search (default max(0.5/J, 1e-4)).
    #[arg(long)]
    pub gamma_min: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MultisplitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Number of splits; 0 screens and tests on the same rows.
    #[arg(long, default_value_t = 200)]
    pub j: usize,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub stat: StatArgs,
    /// Permit J = 0, whose p-values are not valid.
    #[arg(long)]
    pub allow_unsafe_no_split: bool,
    /// Per-split CSV destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    Canonical,
    Linear,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum, default_value_t = GeneratorKind::Canonical)]
    pub generator: GeneratorKind,
    /// AR(1) correlation of the linear generator.
    #[arg(long, default_value_t = 0.3)]
    pub rho: f64,
    /// gaussian, t:<df> or multinomial (linear generator).
    #[arg(long, default_value = "gaussian")]
    pub noise: Noise,
    /// Growth case a, b, c or d, combined with --n and --eta.
    #[arg(long)]
    pub case: Option<GrowthCase>,
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub eta: Vec<f64>,
    /// Explicit designs as NxPxMxR, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<String>,
    /// null, diag:rk:v, trace:rk:t, spikes:a/b/..., single:v or dense:sd;
    /// crossed with every design.
    #[arg(long, value_delimiter = ',', default_value = "null")]
    pub signal: Vec<String>,
    /// Test names or multisplit:<J>.
    #[arg(long, value_delimiter = ',', default_value = "t1")]
    pub methods: Vec<MethodSpec>,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub stat: StatArgs,
    /// Result table CSV destination (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Long-format CSV (cell, method, x, metric, value).
    #[arg(long)]
    pub long_out: Option<PathBuf>,
    /// gnuplot script plotting the long-format file.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
    /// Add a runtime column (output then differs between runs).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Print the asymptotic T1 power without simulating.
    #[arg(long)]
    pub formula: bool,
    #[arg(long)]
    pub rho_p: Option<f64>,
    #[arg(long)]
    pub rho_r: Option<f64>,
    #[arg(long)]
    pub rho_m: Option<f64>,
    /// Nonzero eigenvalues of Omega / n.
    #[arg(long, value_delimiter = ',')]
    pub deltas: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub r: usize,
}
