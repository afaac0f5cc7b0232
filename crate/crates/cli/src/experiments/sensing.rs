use isac_core::channel::{apply_channel, ChannelRealization, PathTap};
use isac_core::rng::{stream, stream_id};
use isac_core::sensing::{
    chirp_symbol_template, cm_symbol_template, pilot_symbol_template, rmse_aggregate, sense_slot,
    sense_symbols, slot_template, PeakRule, ReceiverOptions, SensingEstimate, Template,
};
use isac_core::waveform::{
    build_frame, compose_cm, generate_chirp, ofdm_modulate, TimeSignal, WaveformConfig,
};
use isac_core::SPEED_OF_LIGHT;
use serde::Serialize;

use super::{noise_seed, plan_for, series, trial_grid, Runner, CHANNEL};
use crate::config::{Placement, Profile, Resolved, Variant};
use crate::error::Result;
use crate::output::CsvTable;

/// Pilot-only references repeat every comb period across the band, so the
/// earliest strong lobe is taken instead of the global maximum.
const PILOT_RULE: PeakRule = PeakRule::EarliestNearMax { fraction: 0.5 };

/// Range and velocity accuracy of one scheme at one SNR.
#[derive(Debug, Clone)]
pub struct SensingPoint {
    pub placement: Placement,
    pub scheme: Variant,
    pub alpha: f64,
    pub snr_db: f64,
    pub trials: usize,
    pub rmse_m: f64,
    pub rmse_mps: f64,
    pub mean_range_error_m: f64,
    pub mean_velocity_error_mps: f64,
}

fn taps_for(r: &Resolved, cfg: &WaveformConfig, trial: usize) -> Vec<PathTap> {
    let ch = r.channel();
    match ch.profile {
        Profile::PointTarget => {
            vec![ChannelRealization::point_target(
                ch.range_m.expect("resolved"),
                ch.velocity_mps.expect("resolved"),
                cfg,
            )]
        }
        Profile::ReferenceMultipath => ChannelRealization::reference_multipath(&mut stream(
            r.seed,
            stream_id(&[CHANNEL, trial as u64]),
        )),
        Profile::Taps => ch.taps.clone().expect("validated"),
    }
}

/// (range, velocity) of the earliest path.
fn truth(taps: &[PathTap], cfg: &WaveformConfig) -> (f64, f64) {
    let first = taps
        .iter()
        .min_by(|a, b| a.delay_samples.total_cmp(&b.delay_samples))
        .expect("nonempty taps");
    (
        SPEED_OF_LIGHT * first.delay_samples / (2.0 * cfg.sample_rate_hz()),
        SPEED_OF_LIGHT * first.doppler_hz / (2.0 * cfg.carrier_hz()),
    )
}

fn useful_template(x: &TimeSignal, cfg: &WaveformConfig) -> Template {
    Template::PerSymbol(
        (0..cfg.n_symbols())
            .map(|m| Some(x.samples[cfg.useful_range(m)].to_vec()))
            .collect(),
    )
}

struct Setup {
    placement: Placement,
    scheme: Variant,
    alpha: f64,
    cfg: WaveformConfig,
    plan: isac_core::waveform::ChirpPlan,
    chirp: TimeSignal,
    chirp_symbols: Template,
    opts: ReceiverOptions,
}

impl Setup {
    fn estimate(
        &self,
        r: &Resolved,
        snr_db: f64,
        trial: usize,
    ) -> Result<(SensingEstimate, (f64, f64))> {
        let cfg = &self.cfg;
        let grid = trial_grid(
            cfg,
            self.scheme.has_pilots().then(|| r.pilots()),
            r.seed,
            trial,
        );
        let tx = build_frame(&grid, &self.plan, cfg, self.scheme.scheme())?;
        let taps = taps_for(r, cfg, trial);
        let want = truth(&taps, cfg);
        let ch = r.channel();
        let realization = ChannelRealization {
            taps,
            snr_db: Some(snr_db),
            seed: noise_seed(r.seed, snr_db, trial),
            cfo_hz: ch.cfo_hz,
            timing_drift_s: ch.timing_drift_s,
        };
        let rx = apply_channel(&tx, &realization, cfg)?;
        let est = match self.placement {
            Placement::Slot => {
                let template = match self.scheme {
                    Variant::Ofdm | Variant::Cm => slot_template(&tx),
                    Variant::OfdmPilot => ofdm_modulate(&grid.pilots_only(), cfg)?.samples,
                    Variant::CmPilot => compose_cm(&grid.pilots_only(), &self.plan, cfg)?.samples,
                    Variant::Aac | Variant::Chirp => slot_template(&self.chirp),
                };
                sense_slot(&rx, &template, cfg, &self.opts)?
            }
            _ => {
                let owned;
                let template = match self.scheme {
                    Variant::Ofdm | Variant::Cm => {
                        owned = useful_template(&tx, cfg);
                        &owned
                    }
                    Variant::OfdmPilot => {
                        owned = pilot_symbol_template(&grid, cfg)?;
                        &owned
                    }
                    Variant::CmPilot => {
                        owned = cm_symbol_template(&grid.pilots_only(), &self.plan, cfg)?;
                        &owned
                    }
                    Variant::Aac | Variant::Chirp => &self.chirp_symbols,
                };
                sense_symbols(&rx, template, cfg, &self.opts)?
            }
        };
        Ok((est, want))
    }
}

/// `trials` noisy frames per (scheme, SNR). Trial t uses the same data grid,
/// target and noise draw for every scheme.
pub fn sensing_points(r: &Resolved, runner: &Runner) -> Result<Vec<SensingPoint>> {
    let base = r.waveform();
    let setups = series(r)
        .into_iter()
        .map(|(placement, scheme, alpha)| {
            let cfg = base.with_alpha(alpha)?;
            let plan = plan_for(&cfg, placement)?;
            let chirp = generate_chirp(&plan, &cfg)?;
            let chirp_symbols = chirp_symbol_template(&plan, &cfg)?;
            let mut opts = r.receiver();
            if scheme.has_pilots() {
                opts.rule = PILOT_RULE;
            }
            Ok(Setup {
                placement,
                scheme,
                alpha,
                cfg,
                plan,
                chirp,
                chirp_symbols,
                opts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = &r.snr_grid_db;
    let trials = r.trials();

    let estimates = runner.map(setups.len() * grid.len() * trials, |job| {
        let t = job % trials;
        let snr = grid[(job / trials) % grid.len()];
        setups[job / (trials * grid.len())].estimate(r, snr, t)
    })?;

    let mut out = Vec::new();
    for (si, s) in setups.iter().enumerate() {
        for (gi, &snr_db) in grid.iter().enumerate() {
            let start = (si * grid.len() + gi) * trials;
            let chunk = &estimates[start..start + trials];
            let range: Vec<(f64, f64)> = chunk.iter().map(|(e, w)| (e.range_m, w.0)).collect();
            let vel: Vec<(f64, f64)> = chunk.iter().map(|(e, w)| (e.velocity_mps, w.1)).collect();
            let mean =
                |p: &[(f64, f64)]| p.iter().map(|(e, t)| e - t).sum::<f64>() / p.len() as f64;
            out.push(SensingPoint {
                placement: s.placement,
                scheme: s.scheme,
                alpha: s.alpha,
                snr_db,
                trials,
                rmse_m: rmse_aggregate(&range)?,
                rmse_mps: rmse_aggregate(&vel)?,
                mean_range_error_m: mean(&range),
                mean_velocity_error_mps: mean(&vel),
            });
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct RangeRow {
    scheme: &'static str,
    alpha: f64,
    placement: &'static str,
    snr_db: f64,
    trials: usize,
    rmse_m: f64,
}

#[derive(Serialize)]
struct VelocityRow {
    scheme: &'static str,
    alpha: f64,
    placement: &'static str,
    snr_db: f64,
    trials: usize,
    rmse_mps: f64,
}

pub(super) fn range_tables(r: &Resolved, runner: &Runner) -> Result<Vec<CsvTable>> {
    let rows: Vec<RangeRow> = sensing_points(r, runner)?
        .iter()
        .map(|p| RangeRow {
            scheme: p.scheme.label(),
            alpha: p.alpha,
            placement: p.placement.label(),
            snr_db: p.snr_db,
            trials: p.trials,
            rmse_m: p.rmse_m,
        })
        .collect();
    let header = ["scheme", "alpha", "placement", "snr_db", "trials", "rmse_m"];
    Ok(vec![CsvTable::from_rows("rmse_range.csv", &header, &rows)?])
}

pub(super) fn velocity_tables(r: &Resolved, runner: &Runner) -> Result<Vec<CsvTable>> {
    let rows: Vec<VelocityRow> = sensing_points(r, runner)?
        .iter()
        .map(|p| VelocityRow {
            scheme: p.scheme.label(),
            alpha: p.alpha,
            placement: p.placement.label(),
            snr_db: p.snr_db,
            trials: p.trials,
            rmse_mps: p.rmse_mps,
        })
        .collect();
    let header = [
        "scheme",
        "alpha",
        "placement",
        "snr_db",
        "trials",
        "rmse_mps",
    ];
    Ok(vec![CsvTable::from_rows(
        "rmse_velocity.csv",
        &header,
        &rows,
    )?])
}
