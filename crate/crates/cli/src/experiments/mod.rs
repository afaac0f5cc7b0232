//! Experiment runners. Each trial draws from its own random stream keyed by
//! (seed, purpose, trial[, operating point]); the same trial index sees the
//! same data grid and channel in every scheme (common random numbers), and
//! results are gathered in trial order, so worker count never changes output.

mod ambiguity;
mod link;
mod papr;
mod sensing;
mod tables;

pub use ambiguity::{ambiguity_run, mainlobe_widths, AmbiguityRun, WidthRow};
pub use link::{link_points, LinkPoint};
pub use papr::{papr_series, PaprSeries};
pub use sensing::{sensing_points, SensingPoint};
pub use tables::{complexity_rows, limits_rows, ComplexityRow, LimitsRow};

use isac_core::rng::{stream, stream_id};
use isac_core::waveform::{ChirpPlan, Comb, ResourceGrid, WaveformConfig};
use rayon::prelude::*;

use crate::config::{Experiment, Placement, Resolved, Variant};
use crate::error::Result;
use crate::output::CsvTable;

/// Stream purposes.
pub(crate) const GRID: u64 = 1;
pub(crate) const CHANNEL: u64 = 2;
pub(crate) const NOISE: u64 = 3;
pub(crate) const BITS: u64 = 4;

/// Worker pool for trial fan-out.
pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    /// `None` uses one worker per available core.
    pub fn new(workers: Option<usize>) -> Result<Self> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = workers {
            b = b.num_threads(w.max(1));
        }
        Ok(Self { pool: b.build()? })
    }

    /// `f(0..n)` in parallel, results in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        self.pool
            .install(|| (0..n).into_par_iter().map(f).collect())
    }
}

/// Noise seed for `trial` at operating point `point` (shared by all schemes).
pub(crate) fn noise_seed(seed: u64, point: f64, trial: usize) -> u64 {
    stream_id(&[seed, NOISE, point.to_bits(), trial as u64])
}

/// Random QPSK grid of `trial`, with comb pilots when requested. Data values
/// come from the same stream either way.
pub(crate) fn trial_grid(
    cfg: &WaveformConfig,
    pilots: Option<&Comb>,
    seed: u64,
    trial: usize,
) -> ResourceGrid {
    let mut rng = stream(seed, stream_id(&[GRID, trial as u64]));
    match pilots {
        Some(comb) => {
            ResourceGrid::with_comb_pilots(cfg.n_symbols(), cfg.n_subcarriers(), comb, &mut rng)
        }
        None => ResourceGrid::random_qpsk(cfg.n_symbols(), cfg.n_subcarriers(), &mut rng),
    }
}

/// Full-band chirp plan for a placement.
pub(crate) fn plan_for(cfg: &WaveformConfig, placement: Placement) -> Result<ChirpPlan> {
    Ok(ChirpPlan::full(cfg, placement.mode())?)
}

/// (placement, variant, α) combinations in configuration order.
pub(crate) fn series(r: &Resolved) -> Vec<(Placement, Variant, f64)> {
    let mut out = Vec::new();
    for &p in &r.placements {
        for &v in &r.schemes {
            for a in v.alphas(&r.alphas) {
                out.push((p, v, a));
            }
        }
    }
    out
}

/// Runs `r.experiment` and returns its CSV tables.
pub fn run(r: &Resolved, runner: &Runner) -> Result<Vec<CsvTable>> {
    match r.experiment {
        Experiment::PaprCcdf => papr::tables(r, runner),
        Experiment::Ber => link::ber_tables(r, runner),
        Experiment::SpectralEfficiency => link::se_tables(r, runner),
        Experiment::RmseRange => sensing::range_tables(r, runner),
        Experiment::RmseVelocity => sensing::velocity_tables(r, runner),
        Experiment::Ambiguity => ambiguity::tables(r, runner),
        Experiment::Limits => tables::limits_tables(r),
        Experiment::Complexity => tables::complexity_tables(r),
    }
}
