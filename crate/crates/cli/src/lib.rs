//! Command-line front end: reads a JSON run configuration and writes CSV tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod format;

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] pensionlab::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for invalid input, 3 for numerical divergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use pensionlab::Error;
        match self {
            CliError::Validation(_) => 2,
            CliError::Core(Error::Config(_) | Error::Domain(_) | Error::Ingest { .. }) => 2,
            CliError::Core(Error::Divergence { .. }) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Value table and consumption rates.
    Solve,
    /// Lognormal parameters of wealth and consumption.
    Distribution,
    /// Monte Carlo percentiles with analytic overlays.
    Simulate,
    /// Annuity outperformance per scenario.
    Scenarios,
    /// Finite-fund convergence towards the infinite fund.
    Converge,
}

#[derive(Debug, Parser)]
#[command(
    name = "pensionlab",
    version,
    about = "Optimal investment and consumption for collective pension funds"
)]
pub struct Cli {
    pub command: Command,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the parsed configuration as JSON and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug)]
pub enum Outcome {
    Config(String),
    Ran(commands::Report),
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let config = RunConfig::load(&cli.config)?;
    if cli.print_config {
        return Ok(Outcome::Config(config.to_json()));
    }
    let base = cli.config.parent().unwrap_or(Path::new("."));
    let out = cli
        .out
        .clone()
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let run = config.resolve(base)?;
    std::fs::create_dir_all(&out)?;
    let report = match cli.command {
        Command::Solve => commands::solve_cmd(&run, &out)?,
        Command::Distribution => commands::distribution_cmd(&run, &out)?,
        Command::Simulate => commands::simulate_cmd(&config, &run, &out)?,
        Command::Scenarios => commands::scenarios_cmd(&config, &run, &out)?,
        Command::Converge => commands::converge_cmd(&config, &run, &out)?,
    };
    Ok(Outcome::Ran(report))
}
