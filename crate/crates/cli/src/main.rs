//! `acd`: simulate ACD(1,1) durations, fit them by exponential QMLE and run
//! the Monte Carlo suites.

mod commands;
mod durations;
mod error;
mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ACD_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "acd",
    version,
    about = "ACD(1,1) duration models: simulation, QMLE and Monte Carlo checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a durations file.
    Simulate(SimulateArgs),
    /// Fit a durations file by exponential quasi-maximum likelihood.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo suite.
    Mc(McArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Innovation law: exponential, weibull:K or gamma:A.
    #[arg(long, default_value = "exponential")]
    pub law: String,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Observation window [0, T].
    #[arg(long, required_unless_present = "n", conflicts_with = "n")]
    pub horizon: Option<f64>,
    /// Fixed number of durations.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Permit alpha + beta >= 1.
    #[arg(long)]
    pub allow_nonstationary: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReparamArg {
    Log,
    Raw,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Observation window; defaults to the last event time.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Filter initialization: sample-mean, fixed:X0,PSI0 or model.
    #[arg(long, default_value = "sample-mean")]
    pub init: String,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = ReparamArg::Log)]
    pub reparam: ReparamArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Normality,
    CountingRate,
    RateFactor,
    Fclt,
    Breakdown,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Comma-separated horizons (counting-rate, breakdown).
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<f64>>,
    /// Fixed sample size (normality in fixed-count mode, fclt).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated fractions in [0, 1] (fclt).
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Length of the long reference path (rate-factor, fclt).
    #[arg(long)]
    pub reference_n: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    pub nominal_coverage: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let args = &argv[1..];
    let outcome = match cli.command {
        Command::Simulate(a) => commands::simulate(&a, args),
        Command::Estimate(a) => commands::estimate(&a, args),
        Command::Mc(a) => commands::mc(&a, args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("acd: {e}");
            e.exit_code()
        }
    }
}
