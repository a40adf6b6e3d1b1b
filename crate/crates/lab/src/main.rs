use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use onesided_lab::{run, ExperimentConfig, LabError, RunOptions, Subcommand};

/// Numerical experiments on one-sided weights and causal singular integrals.
#[derive(Debug, Parser)]
#[command(name = "onesided", version)]
struct Cli {
    /// What to run.
    #[arg(long, value_enum)]
    subcommand: Subcommand,
    /// JSON experiment config; every field has a default.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory. Falls back to ONESIDED_OUT_DIR, then to
    /// `output.dir` in the config; without any, only stdout is written.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads. Falls back to ONESIDED_THREADS, then to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Runs a single grid size instead of the config list.
    #[arg(long)]
    m: Option<u32>,
}

fn env_threads() -> Result<Option<usize>, LabError> {
    match std::env::var("ONESIDED_THREADS") {
        Ok(v) => v
            .parse()
            .map(Some)
            .map_err(|_| LabError::Config { path: "ONESIDED_THREADS".into(), message: format!("`{v}` is not a thread count") }),
        Err(_) => Ok(None),
    }
}

fn main_inner(cli: Cli) -> Result<bool, LabError> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let opts = RunOptions { seed: cli.seed, m: cli.m, threads: cli.threads.or(env_threads()?) };
    let bundle = run(cli.subcommand, &cfg, &opts)?;
    print!("{}", bundle.stdout);
    let out = cli.out.or_else(|| std::env::var_os("ONESIDED_OUT_DIR").map(PathBuf::from)).or(cfg.output.dir.clone());
    if let Some(dir) = out {
        bundle.write_to(&dir)?;
    }
    for i in bundle.invariants.iter().filter(|i| !i.passed) {
        eprintln!("invariant failed: {} ({}): {}", i.id, i.name, i.detail);
    }
    Ok(bundle.passed())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
