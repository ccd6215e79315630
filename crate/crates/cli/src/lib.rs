//! Experiment drivers behind the `riesz-mmd` command-line tool.
//!
//! Each subcommand has a `run_*` function returning an in-memory report and a
//! `cmd_*` function that also writes the CSV (and optional SVG) outputs.

pub mod bench;
pub mod bounds;
pub mod config;
pub mod error;
pub mod flows;
pub mod output;
pub mod scaling;
pub mod selftest;
pub mod svg;

pub use config::{Command, ExperimentConfig, DEFAULT_SEED};
pub use error::{CliError, CliResult};

/// Runs the configured subcommand and returns its text summary.
pub fn run(cfg: &ExperimentConfig) -> CliResult<String> {
    match cfg.command {
        Command::Bench => bench::cmd_bench(cfg),
        Command::ErrorScaling => scaling::cmd_error_scaling(cfg),
        Command::Flow => flows::cmd_flow(cfg),
        Command::Bounds => bounds::cmd_bounds(cfg),
        Command::CompareKernels => flows::cmd_compare_kernels(cfg),
        Command::Selftest => selftest::cmd_selftest(cfg),
    }
}

/// Sizes the global thread pool from `RIESZ_MMD_THREADS` when it is set.
pub fn init_threads_from_env() -> CliResult<Option<usize>> {
    let Ok(raw) = std::env::var("RIESZ_MMD_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("RIESZ_MMD_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Some(n))
}
