//! Configuration-driven runner for the qnpu-core experiments.

pub mod config;
pub mod experiments;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qnpu_core::{Error, Result};
use serde::de::DeserializeOwned;

use config::{line_column, parse, Experiment};
use output::{write_outputs, Manifest, Table, Versions};

pub const THREADS_VAR: &str = "QNPU_LAB_THREADS";

/// Installs the global worker pool, capped by `QNPU_LAB_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

#[derive(Clone, Debug)]
pub struct RunArgs {
    pub experiment: Experiment,
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

/// Rejects a config whose `experiment` key names another experiment.
fn check_experiment(text: &str, declared: &Option<String>, expected: Experiment) -> Result<()> {
    match declared {
        Some(name) if name != expected.name() => {
            let offset = text
                .lines()
                .scan(0, |pos, line| {
                    let start = *pos;
                    *pos += line.len() + 1;
                    Some((start, line))
                })
                .find(|(_, l)| l.trim_start().starts_with("experiment"))
                .map_or(0, |(s, _)| s);
            let (line, column) = line_column(text, offset);
            Err(Error::Config {
                line,
                column,
                message: format!("config is for experiment `{name}`, not `{expected}`"),
            })
        }
        _ => Ok(()),
    }
}

type Runner<C> = fn(&C, u64) -> Result<(Table, serde_json::Value)>;

fn dispatch<C: DeserializeOwned>(
    text: &str,
    header: fn(&C) -> (&Option<String>, Option<u64>),
    runner: Runner<C>,
    args: &RunArgs,
) -> Result<(u64, Table, serde_json::Value)> {
    let cfg: C = parse(text)?;
    let (declared, cfg_seed) = header(&cfg);
    check_experiment(text, declared, args.experiment)?;
    let seed = args.seed.or(cfg_seed).unwrap_or(0);
    let (table, summary) = runner(&cfg, seed)?;
    Ok((seed, table, summary))
}

macro_rules! header {
    () => {
        |c| (&c.experiment, c.seed)
    };
}

/// Parses the config, runs the experiment and writes its CSV and manifest.
pub fn run(args: &RunArgs) -> Result<RunOutcome> {
    let text = fs::read_to_string(&args.config)?;
    let start = Instant::now();
    let (seed, table, summary) = match args.experiment {
        Experiment::ScanCost => dispatch(&text, header!(), experiments::scan_cost, args)?,
        Experiment::SolveGpe => dispatch(&text, header!(), experiments::solve_gpe, args)?,
        Experiment::FitFidelity => dispatch(&text, header!(), experiments::fit_fidelity, args)?,
        Experiment::MpsCompile => dispatch(&text, header!(), experiments::mps_compile, args)?,
        Experiment::SamplingAnalysis => dispatch(&text, header!(), experiments::sampling_analysis, args)?,
        Experiment::BurgersEvolve => dispatch(&text, header!(), experiments::burgers_evolve, args)?,
    };
    let manifest = Manifest {
        experiment: args.experiment.name().to_string(),
        seed,
        config_path: args.config.display().to_string(),
        config: text,
        versions: Versions::current(),
        threads: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        csv: format!("{}.csv", args.experiment.name()),
        summary,
    };
    let (csv, manifest) = write_outputs(Path::new(&args.out), &table, &manifest)?;
    Ok(RunOutcome { csv, manifest })
}

/// Process exit status for an error: 2 for configuration problems, 1 otherwise.
pub fn exit_status(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 2,
        _ => 1,
    }
}
