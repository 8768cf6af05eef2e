//! `copfrac`: evaluate, sweep and verify copula fractional inaccuracy
//! measures from JSON job files.

mod commands;
mod output;
mod schema;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use copfrac::orderings::DEFAULT_TOLERANCE;

use commands::{CliError, OutputArgs, ReportFormat};
use schema::Format;

#[derive(Debug, Parser)]
#[command(name = "copfrac", version, about = "Copula fractional inaccuracy measures")]
struct Cli {
    /// Write 0 for wall_time_ms so that outputs are byte-identical across runs.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every job in a job file.
    Measure {
        file: PathBuf,
        /// Output file (overrides the job file's output.path; default stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Evaluate every job over the job file's sweep grid.
    Sweep {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Closed-form Fréchet bounds with quadrature cross-checks.
    Bounds {
        #[arg(long, allow_negative_numbers = true)]
        eta: f64,
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Run the proposition scenarios (optionally those whose id starts with FILTER).
    Verify {
        filter: Option<String>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("COPFRAC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        CliError::Validation(vec![format!("COPFRAC_THREADS must be a non-negative integer, got {raw:?}")])
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(vec![format!("cannot configure thread pool: {e}")]))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let no_timing = cli.no_timing;
    match cli.command {
        Command::Measure { file, output, format } => commands::measure(
            &file,
            &OutputArgs {
                path: output,
                format,
                no_timing,
            },
        ),
        Command::Sweep { file, output, format } => commands::sweep(
            &file,
            &OutputArgs {
                path: output,
                format,
                no_timing,
            },
        ),
        Command::Bounds {
            eta,
            gamma,
            delta,
            format,
        } => commands::bounds(eta, gamma, delta, format),
        Command::Verify {
            filter,
            tolerance,
            format,
        } => commands::verify(filter.as_deref(), tolerance, format, no_timing),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
