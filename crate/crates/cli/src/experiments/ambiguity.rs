use isac_core::ambiguity::{
    ambiguity_numeric, continuous_widths, default_delay_axis, default_doppler_axis,
    AmbiguitySurface, ContinuousModel,
};
use isac_core::waveform::{build_frame, ChirpPlan, ResourceGrid, WaveformConfig};
use isac_core::Complex64;
use serde::Serialize;

use super::{plan_for, series, trial_grid, Runner};
use crate::config::{Placement, Resolved, Variant};
use crate::error::Result;
use crate::output::CsvTable;

/// Delay span (samples) of the oversampled zero-Doppler cut.
const WIDTH_SPAN_SAMPLES: usize = 8;

#[derive(Debug, Clone)]
pub struct AmbiguityRun {
    pub placement: Placement,
    pub scheme: Variant,
    pub alpha: f64,
    pub surface: AmbiguitySurface,
    pub widths: WidthRow,
}

#[derive(Debug, Clone, Serialize)]
pub struct WidthRow {
    pub scheme: &'static str,
    pub alpha: f64,
    pub placement: &'static str,
    pub delay_width_s: f64,
    pub range_width_m: f64,
    pub doppler_width_hz: f64,
}

/// Half-power widths of the continuous-time waveform (delay at zero Doppler,
/// Doppler at zero delay), oversampled `os` times.
pub fn mainlobe_widths(
    cfg: &WaveformConfig,
    plan: &ChirpPlan,
    grid: &ResourceGrid,
    scheme: Variant,
    alpha: f64,
    os: usize,
    doppler_points: usize,
) -> Result<(f64, f64)> {
    let model = ContinuousModel::new(cfg, plan, grid)?;
    if scheme == Variant::Cm {
        model.cm_at(0.0)?;
    }
    let x = |t: f64| -> Complex64 {
        match scheme {
            Variant::Ofdm | Variant::OfdmPilot => model.ofdm_at(t),
            Variant::Cm | Variant::CmPilot => model.cm_at(t).expect("checked above"),
            Variant::Aac => model.aac_at(alpha, t),
            Variant::Chirp => model.chirp_at(t),
        }
    };
    let span = 2.0 / cfg.symbol_duration_s();
    let step = 2.0 * span / (doppler_points - 1) as f64;
    let dopplers: Vec<f64> = (0..doppler_points)
        .map(|k| -span + k as f64 * step)
        .collect();
    Ok(continuous_widths(
        x,
        model.duration_s(),
        cfg.sample_period_s(),
        os,
        WIDTH_SPAN_SAMPLES,
        &dopplers,
    )?)
}

/// Sampled surface on the default grid plus oversampled widths for every
/// configured scheme, all on the data grid of trial 0.
pub fn ambiguity_run(r: &Resolved, runner: &Runner) -> Result<Vec<AmbiguityRun>> {
    let spec = r.ambiguity.as_ref().expect("ambiguity section resolved");
    let combos = series(r);
    runner.map(combos.len(), |i| {
        let (placement, scheme, alpha) = combos[i];
        let cfg = r.waveform().with_alpha(alpha)?;
        let plan = plan_for(&cfg, placement)?;
        let grid = trial_grid(&cfg, None, r.seed, 0);
        let x = build_frame(&grid, &plan, &cfg, scheme.scheme())?;
        let surface =
            ambiguity_numeric(&x, &default_delay_axis(&cfg), &default_doppler_axis(&cfg))?;
        let (dt, df) = mainlobe_widths(
            &cfg,
            &plan,
            &grid,
            scheme,
            alpha,
            spec.oversample,
            spec.doppler_width_points,
        )?;
        Ok(AmbiguityRun {
            placement,
            scheme,
            alpha,
            surface,
            widths: WidthRow {
                scheme: scheme.label(),
                alpha,
                placement: placement.label(),
                delay_width_s: dt,
                range_width_m: isac_core::SPEED_OF_LIGHT * dt / 2.0,
                doppler_width_hz: df,
            },
        })
    })
}

#[derive(Serialize)]
struct SurfaceRow {
    delay_s: f64,
    doppler_hz: f64,
    magnitude: f64,
}

pub(super) fn tables(r: &Resolved, runner: &Runner) -> Result<Vec<CsvTable>> {
    let runs = ambiguity_run(r, runner)?;
    let mut out = Vec::new();
    for run in &runs {
        let mut name = format!("ambiguity_{}", run.scheme.label());
        if run.scheme == Variant::Aac {
            name.push_str(&format!("_{}", run.alpha));
        }
        if r.placements.len() > 1 {
            name.push_str(&format!("_{}", run.placement.label()));
        }
        name.push_str(".csv");
        let rows: Vec<SurfaceRow> = run
            .surface
            .triples()
            .map(|(delay_s, doppler_hz, magnitude)| SurfaceRow {
                delay_s,
                doppler_hz,
                magnitude,
            })
            .collect();
        out.push(CsvTable::from_rows(
            name,
            &["delay_s", "doppler_hz", "magnitude"],
            &rows,
        )?);
    }
    let widths: Vec<WidthRow> = runs.iter().map(|r| r.widths.clone()).collect();
    let header = [
        "scheme",
        "alpha",
        "placement",
        "delay_width_s",
        "range_width_m",
        "doppler_width_hz",
    ];
    out.push(CsvTable::from_rows(
        "mainlobe_widths.csv",
        &header,
        &widths,
    )?);
    Ok(out)
}
