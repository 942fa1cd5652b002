//! Command-line front end: `analyze`, `optimize`, `sweep` and `simulate`
//! driven by a JSON config, writing CSV.

pub mod commands;
pub mod config;
pub mod error;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "outreach", version, about = "Outbreak sizes and incentive allocation for two-type information epidemics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Threshold, fixed point and outbreak size for a policy.
    Analyze(CommonArgs),
    /// Solve the incentive-allocation LP.
    Optimize(CommonArgs),
    /// Re-solve the LP over a grid of one parameter.
    Sweep(CommonArgs),
    /// Monte Carlo check of the analytic predictions.
    Simulate(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides `simulation.master_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Runs one parsed command line, printing summaries to `console`.
pub fn run(cli: &Cli, console: &mut dyn Write) -> Result<(), CliError> {
    let (Command::Analyze(args) | Command::Optimize(args) | Command::Sweep(args) | Command::Simulate(args)) =
        &cli.command;
    let cfg = RunConfig::from_path(&args.config)?;
    match &cli.command {
        Command::Analyze(_) => commands::analyze(&cfg, &args.out, console).map(drop),
        Command::Optimize(_) => commands::optimize(&cfg, &args.out, console).map(drop),
        Command::Sweep(_) => commands::sweep(&cfg, &args.out, console).map(drop),
        Command::Simulate(_) => commands::simulate(&cfg, &args.out, args.seed, console).map(drop),
    }
}
