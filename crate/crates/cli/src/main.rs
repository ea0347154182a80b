//! Command-line front end: load a parameter config, run a named
//! reproduction, write tables and reports.
//!
//! Exit codes: 0 success (within tolerance where one applies), 1 validation
//! or tolerance failure, 2 I/O failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CmdError, CmdStatus};
use config::{OutputFormat, RunConfig};

#[derive(Parser)]
#[command(
    name = "cvmem",
    about = "Gaussian quantum-memory reproductions: stored-state overlaps, added noise, fidelity curves, EPR diagnostics and classical benchmarks"
)]
struct Cli {
    /// Parameter config file (key = value with memory/alphabet/output sections)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format (overrides the config)
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Optimizer seed (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recompute the 18 stored-state overlaps beside the published values
    Table1,
    /// Invert the noise model for the per-phase added noise
    Table2,
    /// Averaged-fidelity curve with benchmark bound and envelope
    Curve,
    /// Stored-pair and hybrid EPR diagnostics
    Epr,
    /// Classical benchmark estimates (Gaussian strategy and seesaw)
    Benchmark,
    /// Two-pulse coupling calibration round trip
    Calibrate,
}

fn load_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            config::parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if let Some(format) = &cli.format {
        config.format = if format == "json" { OutputFormat::Json } else { OutputFormat::Csv };
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(&cli) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(1);
        }
    };
    let outcome = match cli.command {
        Command::Table1 => commands::cmd_table1(&config),
        Command::Table2 => commands::cmd_table2(&config),
        Command::Curve => commands::cmd_curve(&config),
        Command::Epr => commands::cmd_epr(&config),
        Command::Benchmark => commands::cmd_benchmark(&config),
        Command::Calibrate => commands::cmd_calibrate(&config),
    };
    match outcome {
        Ok(CmdStatus::WithinTolerance) => ExitCode::SUCCESS,
        Ok(CmdStatus::ToleranceExceeded) => {
            eprintln!("error: result outside the published tolerance");
            ExitCode::from(1)
        }
        Err(CmdError::Validation(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CmdError::Io(e)) => {
            eprintln!("i/o error: {e}");
            ExitCode::from(2)
        }
    }
}
