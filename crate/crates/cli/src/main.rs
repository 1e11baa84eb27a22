//! `tradetail` — analyze, simulate, and validate the tail behavior of
//! realized prices under regime-switching dynamics and random trade timing.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "tradetail",
    version,
    about = "Power-law tails of realized prices under random trade timing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the tail report (exponent, correction order, scale constant).
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw realized-price samples and write them as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured sample count.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Analyze, simulate, and test the estimators against the report.
    Validate {
        #[arg(long)]
        config: PathBuf,
        /// Optional CSV of the scaled empirical survival curve.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        /// JSON object overriding tolerance fields, e.g.
        /// '{"hill_relative": 0.2}'.
        #[arg(long, value_name = "JSON")]
        tolerance_json: Option<String>,
    },
    /// Tabulate the trade-time density (or probability mass) as CSV.
    Density {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the realized-price transform M_T(s) over its strip.
    Mgf {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze { config, out } => commands::cmd_analyze(config, out.as_deref()),
        Command::Simulate {
            config,
            out,
            seed,
            samples,
        } => commands::cmd_simulate(config, out, *seed, *samples),
        Command::Validate {
            config,
            out,
            seed,
            samples,
            tolerance_json,
        } => commands::cmd_validate(
            config,
            out.as_deref(),
            *seed,
            *samples,
            tolerance_json.as_deref(),
        ),
        Command::Density { config, out } => commands::cmd_density(config, out.as_deref()),
        Command::Mgf { config, out } => commands::cmd_mgf(config, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
