//! `edur` — command-line driver for the error-disturbance simulator.
//!
//! Subcommands: `surface` (correction-unitary disturbance surface),
//! `sweep` (detuning sweeps with bounds and inequality evaluations),
//! `three-state` (intensity-level reconstruction with optional Poisson
//! counting noise), and `audit` (the full verification suite).
//!
//! Exit codes: 0 success, 1 audit failure, 2 usage or I/O error.

mod commands;
mod config;
mod options;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use config::FileConfig;

#[derive(Parser)]
#[command(
    name = "edur",
    version,
    about = "Exact simulator for error-disturbance trade-offs in successive spin-1/2 measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Disturbance over the correction-target grid at a fixed detuning.
    Surface(SurfaceArgs),
    /// Error-disturbance sweep over the detuning grid with bounds and
    /// inequality evaluations.
    Sweep(SweepArgs),
    /// Intensity tables for the five reconstruction states plus the
    /// reconstructed error and disturbance.
    ThreeState(ThreeStateArgs),
    /// Run the full verification suite and report each criterion.
    Audit(AuditArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Optional key=value configuration file; flags override its entries.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_name = "csv|json")]
    format: Option<options::Format>,
    /// Interpret all angle inputs as degrees (files stay in radians).
    #[arg(long)]
    degrees: bool,
}

#[derive(Args, Debug)]
struct SurfaceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Detuning angle of the apparatus observable.
    #[arg(long, value_name = "ANGLE")]
    theta_oa: Option<f64>,
    /// Angle of the second observable.
    #[arg(long, value_name = "ANGLE")]
    theta_b: Option<f64>,
    /// Mixing parameter of the input state.
    #[arg(long, value_name = "ALPHA")]
    alpha: Option<f64>,
    /// Grid step for the correction-target search.
    #[arg(long, value_name = "ANGLE")]
    step: Option<f64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Restrict the sweep to a single detuning angle.
    #[arg(long, value_name = "ANGLE")]
    theta_oa: Option<f64>,
    /// Angle of the second observable.
    #[arg(long, value_name = "ANGLE")]
    theta_b: Option<f64>,
    /// Comma-separated mixing parameters.
    #[arg(long, value_name = "LIST")]
    alpha: Option<String>,
    /// Detuning grid step.
    #[arg(long, value_name = "ANGLE")]
    step: Option<f64>,
    /// Correction branch: both | optimal | anti-optimal | none |
    /// explicit:VARTHETA,PHI.
    #[arg(long, value_name = "KIND")]
    correction: Option<String>,
    /// Counting mode: exact | poisson | poisson:MEAN.
    #[arg(long, value_name = "MODE")]
    counts: Option<String>,
    /// Base seed for Poisson sampling.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct ThreeStateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Detuning angle of the apparatus observable.
    #[arg(long, value_name = "ANGLE")]
    theta_oa: Option<f64>,
    /// Angle of the second observable.
    #[arg(long, value_name = "ANGLE")]
    theta_b: Option<f64>,
    /// Mixing parameter of the input state.
    #[arg(long, value_name = "ALPHA")]
    alpha: Option<f64>,
    /// Correction branch: optimal | anti-optimal | none |
    /// explicit:VARTHETA,PHI.
    #[arg(long, value_name = "KIND")]
    correction: Option<String>,
    /// Counting mode: exact | poisson | poisson:MEAN.
    #[arg(long, value_name = "MODE")]
    counts: Option<String>,
    /// Seed for Poisson sampling.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Base seed for the statistical criterion.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Detuning grid step used to validate sweep configs.
    #[arg(long, value_name = "ANGLE")]
    step: Option<f64>,
    /// Test hook: corrupt one reconstruction term to verify the audit
    /// fails on a broken pipeline.
    #[arg(long, hide = true)]
    inject_reconstruction_fault: bool,
}

/// Errors that decide the process exit code.
#[derive(Debug)]
enum CliError {
    /// Bad flags, bad config, invalid grid, or I/O failure: exit 2.
    Usage(String),
    /// One or more audit criteria failed: exit 1.
    AuditFailed,
}

impl From<edur::EdurError> for CliError {
    fn from(e: edur::EdurError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<String> for CliError {
    fn from(s: String) -> Self {
        CliError::Usage(s)
    }
}

fn load_config(common: &CommonArgs) -> Result<FileConfig, CliError> {
    match &common.config {
        Some(path) => Ok(FileConfig::load(path)?),
        None => Ok(FileConfig::default()),
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Surface(args) => commands::surface(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::ThreeState(args) => commands::three_state(&args),
        Command::Audit(args) => commands::audit(&args),
    };
    match outcome {
        Ok(()) => {}
        Err(CliError::AuditFailed) => std::process::exit(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}
