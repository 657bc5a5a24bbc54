use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qnpu_core::Error;
use qnpu_lab::config::Experiment;
use qnpu_lab::{configure_threads, exit_status, run, RunArgs};

/// Runs one experiment described by a TOML config and writes a CSV table
/// plus a JSON manifest.
#[derive(Parser, Debug)]
#[command(name = "qnpu-lab", version)]
struct Cli {
    experiment: Experiment,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn report(cli: &Cli, e: &Error) {
    match e {
        Error::Config { line, column, message } => {
            eprintln!("{}:{line}:{column}: {message}", cli.config.display());
        }
        other => {
            let msg = serde_json::json!({ "status": "error", "kind": kind(other), "message": other.to_string() });
            eprintln!("{msg}");
        }
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidArgument(_) => "invalid_argument",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::Precondition(_) => "precondition",
        Error::OutOfRange { .. } => "out_of_range",
        Error::ConvergenceFailure { .. } => "convergence_failure",
        Error::DegenerateFunction => "degenerate_function",
        Error::ZeroNorm => "zero_norm",
        Error::UndefinedConstant => "undefined_constant",
        Error::DetectionFailure { .. } => "detection_failure",
        Error::Config { .. } => "config",
        Error::Io(_) => "io",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| {
        run(&RunArgs {
            experiment: cli.experiment,
            config: cli.config.clone(),
            out: cli.out.clone(),
            seed: cli.seed,
        })
    });
    match result {
        Ok(outcome) => {
            println!("{}", outcome.csv.display());
            println!("{}", outcome.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            report(&cli, &e);
            ExitCode::from(exit_status(&e))
        }
    }
}
