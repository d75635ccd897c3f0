use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod grid;
mod output;

/// Numerical checks and tools for erasure-channel hypercontractivity.
#[derive(Debug, Parser)]
#[command(name = "erasure-hc", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    /// JSON
    Structured,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a check suite; exits nonzero if any instance fails.
    Verify(commands::VerifyArgs),
    /// Tabulate the variable log-Sobolev inequality on random PSD operators.
    EntropySweep(commands::EntropySweepArgs),
    /// Search for the largest (ε,q)-norm to p-norm ratio.
    SearchRatio(commands::SearchRatioArgs),
    /// Search for positive path derivatives.
    SearchMonotone(commands::SearchMonotoneArgs),
    /// Communication lower bounds for common randomness generation.
    CrgBound(commands::CrgBoundArgs),
    /// Evaluate a common-randomness strategy exactly.
    CrgSim(commands::CrgSimArgs),
    /// Evaluate the (ε,q)-norm of one operator.
    Norm(commands::NormArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("QECHC_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .parse()
        .map_err(|_| format!("QECHC_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Verify(a) => commands::verify(a),
        Command::EntropySweep(a) => commands::entropy_sweep(a),
        Command::SearchRatio(a) => commands::search_ratio(a),
        Command::SearchMonotone(a) => commands::search_monotone(a),
        Command::CrgBound(a) => commands::crg_bound(a),
        Command::CrgSim(a) => commands::crg_sim(a),
        Command::Norm(a) => commands::norm(a),
    };
    match result {
        Ok(commands::Outcome::Done) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Failed(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
