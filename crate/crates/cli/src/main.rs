mod commands;
mod config;
mod demo;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

/// Observation-driven duration models: simulate, fit, forecast, diagnose.
#[derive(Debug, Parser)]
#[command(name = "flexdur", version)]
pub struct Cli {
    /// Worker threads for restarts and rolling windows.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// `key = value` configuration file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate durations from a model.
    Simulate(SimulateArgs),
    /// Fit one or more models by maximum likelihood.
    Fit(FitArgs),
    /// Rolling-window estimation and one-step forecasting.
    Backtest(BacktestArgs),
    /// Residual diagnostics of a fitted model on a duration file.
    Diagnose(DiagnoseArgs),
    /// Descriptive statistics of a duration file.
    Describe(DescribeArgs),
    /// Build one-tick mid-price durations from a quote file.
    BuildDurations(BuildArgs),
    /// Write a synthetic quote stream for end-to-end runs.
    GenDemo(DemoArgs),
}

#[derive(Debug, Args, Default)]
pub struct ModelParams {
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub b0: Option<f64>,
    #[arg(long = "a")]
    pub a: Option<f64>,
    #[arg(long)]
    pub b1: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long = "d")]
    pub d: Option<f64>,
    #[arg(long = "p")]
    pub p: Option<f64>,
    #[arg(long)]
    pub s1: Option<f64>,
    #[arg(long)]
    pub s2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// se | acd | logacd | logaci | renewal
    #[arg(long)]
    pub dynamics: Option<String>,
    /// exp | gamma | ggamma | burr
    #[arg(long)]
    pub residual: Option<String>,
    #[command(flatten)]
    pub params: ModelParams,
    /// Number of durations.
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Events discarded before recording.
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub initial_state: Option<f64>,
    /// Reject parameters that violate the stationarity condition.
    #[arg(long)]
    pub require_stable: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct FitFlags {
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub truncation_lag: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Duration CSV (`arrival_time,duration`).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Model name such as `se-gamma`, a comma list, or `all`.
    #[arg(long)]
    pub model: Option<String>,
    #[command(flatten)]
    pub fit: FitFlags,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BacktestArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub step: Option<usize>,
    /// Lags of the out-of-sample residual ACF.
    #[arg(long)]
    pub acf_lags: Option<usize>,
    #[command(flatten)]
    pub fit: FitFlags,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Fit JSON written by `fit`.
    #[arg(long = "fit")]
    pub fit: Option<PathBuf>,
    /// Selects one entry when the fit file holds several.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub acf_lags: Option<usize>,
    #[arg(long)]
    pub initial_state: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DescribeArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Also write describe.csv, describe.json and a manifest here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Quote CSV (`timestamp,best_bid,best_ask`).
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long)]
    pub tick: Option<f64>,
    /// Optional `time,factor` table for deseasonalization.
    #[arg(long)]
    pub factors: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of one-tick events.
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
    #[arg(long)]
    pub tick: Option<f64>,
    #[arg(long)]
    pub start_price: Option<f64>,
    #[command(flatten)]
    pub params: ModelParams,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot size worker pool: {e}")))?;
    }
    let mut settings = config::Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate(a) => commands::simulate(a, &mut settings),
        Command::Fit(a) => commands::fit(a, &mut settings),
        Command::Backtest(a) => commands::backtest(a, &mut settings),
        Command::Diagnose(a) => commands::diagnose(a, &mut settings),
        Command::Describe(a) => commands::describe(a, &mut settings),
        Command::BuildDurations(a) => commands::build_durations(a, &mut settings),
        Command::GenDemo(a) => commands::gen_demo(a, &mut settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code)
        }
    }
}
