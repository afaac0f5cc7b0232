use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use isac_runner::config::{Experiment, Overrides};

/// Runs one configured experiment and writes CSV tables plus run.json.
#[derive(Parser)]
#[command(name = "isac", version)]
struct Args {
    experiment: Experiment,
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let start = Instant::now();
    let overrides = Overrides {
        seed: args.seed,
        trials: args.trials,
    };
    match isac_runner::run(
        args.experiment,
        &args.config,
        &args.out,
        overrides,
        args.workers,
    ) {
        Ok(files) => {
            eprintln!(
                "{}: wrote {} to {} in {:.1} s",
                args.experiment.name(),
                files.join(", "),
                args.out.display(),
                start.elapsed().as_secs_f64()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
