use isac_core::waveform::{
    compose_aac, compose_cm, generate_chirp, ofdm_modulate, papr_per_symbol_db,
};
use serde::Serialize;

use super::{plan_for, series, trial_grid, Runner};
use crate::config::{Placement, Resolved, Variant};
use crate::error::Result;
use crate::output::CsvTable;
use crate::stats::{ccdf, exceedance};

/// Per-symbol PAPR samples (CP excluded) of one scheme.
#[derive(Debug, Clone)]
pub struct PaprSeries {
    pub placement: Placement,
    pub scheme: Variant,
    pub alpha: f64,
    pub papr_db: Vec<f64>,
}

/// `trials` OFDM symbols per series, drawn frame by frame; every series
/// sees the same data grids.
pub fn papr_series(r: &Resolved, runner: &Runner) -> Result<Vec<PaprSeries>> {
    let cfg = r.waveform();
    let m = cfg.n_symbols();
    let symbols = r.trials();
    let frames = symbols.div_ceil(m);
    let combos = series(r);
    let mut plans = Vec::new();
    for &p in &r.placements {
        let plan = plan_for(cfg, p)?;
        let chirp = generate_chirp(&plan, cfg)?;
        plans.push((p, plan, chirp));
    }

    let per_frame: Vec<Vec<Vec<f64>>> = runner.map(frames, |f| {
        let grid = trial_grid(cfg, None, r.seed, f);
        let s = ofdm_modulate(&grid, cfg)?;
        let keep = (symbols - f * m).min(m);
        combos
            .iter()
            .map(|&(p, v, alpha)| {
                let (_, plan, chirp) = plans
                    .iter()
                    .find(|(q, _, _)| *q == p)
                    .expect("plan per placement");
                let x = match v {
                    Variant::Ofdm | Variant::OfdmPilot => s.clone(),
                    Variant::Cm | Variant::CmPilot => compose_cm(&grid, plan, cfg)?,
                    Variant::Aac | Variant::Chirp => compose_aac(&s, chirp, alpha)?,
                };
                let mut v = papr_per_symbol_db(&x, cfg)?;
                v.truncate(keep);
                Ok(v)
            })
            .collect()
    })?;

    Ok(combos
        .iter()
        .enumerate()
        .map(|(i, &(placement, scheme, alpha))| PaprSeries {
            placement,
            scheme,
            alpha,
            papr_db: per_frame
                .iter()
                .flat_map(|f| f[i].iter().copied())
                .collect(),
        })
        .collect())
}

#[derive(Serialize)]
struct CurveRow {
    scheme: &'static str,
    alpha: f64,
    papr_db: f64,
    ccdf: f64,
}

#[derive(Serialize)]
struct LevelRow {
    scheme: &'static str,
    alpha: f64,
    placement: &'static str,
    ccdf: f64,
    papr_db: f64,
    symbols: usize,
}

pub(super) fn tables(r: &Resolved, runner: &Runner) -> Result<Vec<CsvTable>> {
    let spec = r.papr.as_ref().expect("papr section resolved");
    let all = papr_series(r, runner)?;
    let steps = (spec.max_db / spec.step_db).round() as usize;
    let mut out = Vec::new();
    let mut levels = Vec::new();
    for &p in &r.placements {
        let mut curve = Vec::new();
        for s in all.iter().filter(|s| s.placement == p) {
            let mut sorted = s.papr_db.clone();
            sorted.sort_by(f64::total_cmp);
            for k in 0..=steps {
                let t = k as f64 * spec.step_db;
                curve.push(CurveRow {
                    scheme: s.scheme.label(),
                    alpha: s.alpha,
                    papr_db: t,
                    ccdf: exceedance(&sorted, t),
                });
            }
            for (&level, papr_db) in spec.levels.iter().zip(ccdf(&s.papr_db, &spec.levels)?) {
                levels.push(LevelRow {
                    scheme: s.scheme.label(),
                    alpha: s.alpha,
                    placement: p.label(),
                    ccdf: level,
                    papr_db,
                    symbols: s.papr_db.len(),
                });
            }
        }
        let name = if r.placements.len() == 1 {
            "papr_ccdf.csv".to_string()
        } else {
            format!("papr_ccdf_{}.csv", p.label())
        };
        out.push(CsvTable::from_rows(
            name,
            &["scheme", "alpha", "papr_db", "ccdf"],
            &curve,
        )?);
    }
    out.push(CsvTable::from_rows(
        "papr_levels.csv",
        &["scheme", "alpha", "placement", "ccdf", "papr_db", "symbols"],
        &levels,
    )?);
    Ok(out)
}
