use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "meixner", version, about = "Build, check and classify two-dimensional Meixner vectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Input JSON file ("-" for standard input).
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Truncation level N for specs that do not name one.
    #[arg(long, global = true)]
    truncation: Option<usize>,

    /// Moment degree for audits and moment tables.
    #[arg(long, global = true, default_value_t = 8)]
    degree: usize,

    /// Tolerance for moment comparisons and branch decisions.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tolerance: f64,

    /// Seed for a randomized self-test (classify without --input).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Decouple a system spec and certify the result by moments.
    Classify,
    /// Report the commutator table and M_L membership of a system spec.
    CheckMl,
    /// Recover a system from a moment table.
    Decompose,
    /// Emit the moment table of a system spec.
    Moments,
    /// List the preset one-dimensional families, or classify a JacobiSpec.
    Catalog,
    /// Compare the moments of {"left": spec, "right": spec}.
    VerifyEqual,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(outcome) => ExitCode::from(outcome),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.status)
        }
    }
}
