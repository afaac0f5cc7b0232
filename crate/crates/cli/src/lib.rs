//! Seeded experiment runner for the isac-core waveforms: reads a JSON
//! config, fans trials out over a worker pool and writes CSV tables plus a
//! `run.json` manifest.

pub mod config;
mod error;
pub mod experiments;
pub mod output;
pub mod stats;

pub use error::{CliError, Result};

use std::path::Path;

use config::{Experiment, Overrides};
use experiments::Runner;

/// Loads `config_path`, runs `experiment` and writes its outputs to `out_dir`.
/// Returns the names of the files written (manifest last).
pub fn run(
    experiment: Experiment,
    config_path: &Path,
    out_dir: &Path,
    overrides: Overrides,
    workers: Option<usize>,
) -> Result<Vec<String>> {
    let resolved = config::load(config_path, experiment, overrides)?;
    let runner = Runner::new(workers)?;
    let tables = experiments::run(&resolved, &runner)?;
    output::write_run(out_dir, &resolved, &tables)?;
    let mut names: Vec<String> = tables.into_iter().map(|t| t.name).collect();
    names.push("run.json".into());
    Ok(names)
}
