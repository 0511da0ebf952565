//! `cdiff`: experiment driver for composite diffusion operators.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use cdiff::embed::OperatorVariant;
use cdiff::{ComputeOptions, Execution};
use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "cdiff", version, about = "Common and difference embeddings of paired datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sphere and bumped sphere: embeddings and bump localization.
    Shapes(Common),
    /// Planted kernel differences: rank and support of A.
    Planted(Common),
    /// Two-channel fetal ECG extraction, synthetic or from CSV.
    Fecg(Common),
    /// Embeddings of two CSV point clouds.
    Embed(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; missing keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed of the chosen experiment.
    #[arg(long)]
    seed: Option<u64>,
    /// Operator family: plain, tilde or hat.
    #[arg(long)]
    operator: Option<OperatorVariant>,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common) = match &cli.command {
        Command::Shapes(c) => ("shapes", c),
        Command::Planted(c) => ("planted", c),
        Command::Fecg(c) => ("fecg", c),
        Command::Embed(c) => ("embed", c),
    };
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.override_seed(name, seed);
    }
    if let Some(op) = common.operator {
        cfg.override_operator(op);
    }
    if common.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let exec = if common.sequential { Execution::Sequential } else { Execution::default() };
    let opts = ComputeOptions::default().with_execution(exec);
    let out = &common.out;
    match cli.command {
        Command::Shapes(_) => commands::shapes(&cfg.shapes, out, &opts),
        Command::Planted(_) => commands::planted(&cfg.planted, out),
        Command::Fecg(_) => commands::fecg(&cfg.fecg, out, &opts),
        Command::Embed(_) => commands::embed(&cfg.embed, out, &opts),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
