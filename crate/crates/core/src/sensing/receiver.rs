use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{
    matched_filter, pick_peak, range_from_lag, velocity_from_doppler, PeakRule, SensingEstimate,
    Template,
};
use crate::error::{invalid, mismatch};
use crate::waveform::{
    compose_cm, generate_chirp, ofdm_modulate, ChirpPlan, ResourceGrid, TimeSignal, WaveformConfig,
};
use crate::{dsp, Complex64, Result};

/// Peak selection for the receivers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverOptions {
    pub rule: PeakRule,
    pub interpolate: bool,
}

/// Per-symbol references from a transmit signal; symbols where `keep` is
/// false are skipped.
fn useful_parts(x: &TimeSignal, cfg: &WaveformConfig, keep: impl Fn(usize) -> bool) -> Template {
    Template::PerSymbol(
        (0..cfg.n_symbols())
            .map(|m| keep(m).then(|| x.samples[cfg.useful_range(m)].to_vec()))
            .collect(),
    )
}

/// Useful part of the chirp on each chirped symbol.
pub fn chirp_symbol_template(plan: &ChirpPlan, cfg: &WaveformConfig) -> Result<Template> {
    let c = generate_chirp(plan, cfg)?;
    let chirped = plan.chirped_symbols(cfg);
    Ok(useful_parts(&c, cfg, |m| chirped[m]))
}

/// Useful part of the chirp-multiplied symbol built from `grid` (the full
/// transmit grid for data-based sensing, its pilots for pilot-based).
pub fn cm_symbol_template(
    grid: &ResourceGrid,
    plan: &ChirpPlan,
    cfg: &WaveformConfig,
) -> Result<Template> {
    let x = compose_cm(grid, plan, cfg)?;
    Ok(useful_parts(&x, cfg, |m| {
        grid.symbol(m).iter().any(|v| v.norm_sqr() > 0.0)
    }))
}

/// Useful part of the pilot-only OFDM symbol; symbols without pilots are skipped.
pub fn pilot_symbol_template(grid: &ResourceGrid, cfg: &WaveformConfig) -> Result<Template> {
    let pilots = grid.pilots_only();
    let x = ofdm_modulate(&pilots, cfg)?;
    Ok(useful_parts(&x, cfg, |m| {
        pilots.symbol(m).iter().any(|v| v.norm_sqr() > 0.0)
    }))
}

/// Slot-long reference: the transmit-side signal itself, CP included.
pub fn slot_template(x: &TimeSignal) -> Vec<Complex64> {
    x.samples.clone()
}

/// Doppler from (symbol index, peak sample) pairs: wrapped phase steps
/// accumulated and divided by the index span, over T_o.
fn doppler_from_indexed(z: &[(usize, Complex64)], cfg: &WaveformConfig) -> Option<f64> {
    if z.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    for w in z.windows(2) {
        let d = w[1].1.arg() - w[0].1.arg();
        total += (d + PI).rem_euclid(2.0 * PI) - PI;
    }
    let span = (z[z.len() - 1].0 - z[0].0) as f64;
    Some(total / span / (2.0 * PI * cfg.symbol_duration_s()))
}

/// Symbol-level sensing: per-symbol matched filters, non-coherent power sum
/// for the range peak, and phase progression of the peak samples across
/// symbols for velocity (zero with fewer than two symbols).
pub fn sense_symbols(
    rx: &TimeSignal,
    template: &Template,
    cfg: &WaveformConfig,
    opts: &ReceiverOptions,
) -> Result<SensingEstimate> {
    let profiles = matched_filter(rx, template, cfg)?;
    if profiles.is_empty() {
        return Err(invalid("template skips every symbol"));
    }
    let n = cfg.n_subcarriers();
    let mags: Vec<f64> = (0..n)
        .map(|k| {
            profiles
                .iter()
                .map(|p| p.correlation[k].norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let peak = pick_peak(&mags, opts.rule, opts.interpolate)?;
    let z: Vec<(usize, Complex64)> = profiles
        .iter()
        .map(|p| (p.symbol_index, p.correlation[peak.bin]))
        .collect();
    let doppler_hz = doppler_from_indexed(&z, cfg).unwrap_or(0.0);
    Ok(SensingEstimate {
        range_m: range_from_lag(peak.bin as f64 + peak.offset, rx.sample_rate_hz),
        velocity_mps: velocity_from_doppler(doppler_hz, cfg),
        peak_bin: peak.bin,
        doppler_hz,
    })
}

/// Σ over each symbol window of rx(l)·t*(l − lag), circular in the frame.
fn symbol_peak_samples(
    rx: &[Complex64],
    template: &[Complex64],
    lag: usize,
    cfg: &WaveformConfig,
) -> Vec<(usize, Complex64)> {
    let len = rx.len();
    let sym = cfg.symbol_len();
    (0..len / sym)
        .map(|m| {
            let s: Complex64 = (m * sym..(m + 1) * sym)
                .map(|l| rx[l] * template[(l + len - lag) % len].conj())
                .sum();
            (m, s)
        })
        .collect()
}

/// Slot-level sensing with one frame-long circular correlation. Velocity
/// comes from the per-symbol samples at the peak lag. For a slot-long chirp
/// delay and Doppler are coupled along the ridge τ = −f_d/β, so a moving
/// target biases the range by f_d/β and the velocity estimate is unreliable.
pub fn sense_slot(
    rx: &TimeSignal,
    template: &[Complex64],
    cfg: &WaveformConfig,
    opts: &ReceiverOptions,
) -> Result<SensingEstimate> {
    if rx.len() != template.len() || rx.is_empty() {
        return Err(mismatch(format!(
            "receive window has {} samples, template {}",
            rx.len(),
            template.len()
        )));
    }
    if rx.len() % cfg.symbol_len() != 0 {
        return Err(mismatch("slot window is not a whole number of symbols"));
    }
    let fs = rx.sample_rate_hz;
    let spec = dsp::spectrum(template);
    let mags: Vec<f64> = dsp::circular_xcorr_with_spectrum(&rx.samples, &spec)
        .iter()
        .map(|v| v.norm())
        .collect();
    let peak = pick_peak(&mags, opts.rule, opts.interpolate)?;
    let doppler_hz = doppler_from_indexed(
        &symbol_peak_samples(&rx.samples, template, peak.bin, cfg),
        cfg,
    )
    .unwrap_or(0.0);
    Ok(SensingEstimate {
        range_m: range_from_lag(peak.bin as f64 + peak.offset, fs),
        velocity_mps: velocity_from_doppler(doppler_hz, cfg),
        peak_bin: peak.bin,
        doppler_hz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_channel, ChannelRealization};
    use crate::rng::stream;
    use crate::waveform::{build_frame, ChirpMode, Scheme};

    fn target(cfg: &WaveformConfig, tx: &TimeSignal) -> TimeSignal {
        let tap = ChannelRealization::point_target(50.0, 30.0, cfg);
        apply_channel(tx, &ChannelRealization::noiseless(vec![tap]), cfg).unwrap()
    }

    #[test]
    fn per_symbol_chirp_recovers_target() {
        let cfg = WaveformConfig::nr_fr2(1024, 14)
            .unwrap()
            .with_alpha(1.0)
            .unwrap();
        let plan = ChirpPlan::full(&cfg, ChirpMode::PerSymbol).unwrap();
        let grid = ResourceGrid::random_qpsk(14, 1024, &mut stream(1, 0));
        let rx = target(&cfg, &build_frame(&grid, &plan, &cfg, Scheme::Aac).unwrap());
        let t = chirp_symbol_template(&plan, &cfg).unwrap();
        let est = sense_symbols(&rx, &t, &cfg, &ReceiverOptions::default()).unwrap();
        assert_eq!(est.peak_bin, 41);
        assert!(
            (est.velocity_mps - 30.0).abs() < 0.05,
            "{}",
            est.velocity_mps
        );
    }

    #[test]
    fn slot_chirp_peak_follows_delay_doppler_ridge() {
        let cfg = WaveformConfig::nr_fr2(1024, 14)
            .unwrap()
            .with_alpha(1.0)
            .unwrap();
        let plan = ChirpPlan::full(&cfg, ChirpMode::PerSlot).unwrap();
        let grid = ResourceGrid::random_qpsk(14, 1024, &mut stream(2, 0));
        let tx = build_frame(&grid, &plan, &cfg, Scheme::Aac).unwrap();
        let t = slot_template(&generate_chirp(&plan, &cfg).unwrap());
        let opts = ReceiverOptions::default();
        let still =
            ChannelRealization::noiseless(vec![ChannelRealization::point_target(50.0, 0.0, &cfg)]);
        let est = sense_slot(&apply_channel(&tx, &still, &cfg).unwrap(), &t, &cfg, &opts).unwrap();
        assert_eq!(est.peak_bin, 41);
        // 4800 Hz over a rate of f_s/(14·T_o) shifts the peak by −f_d·14·T_o samples.
        let shift = 4800.0 * 14.0 * cfg.symbol_duration_s();
        assert!((shift - 0.598).abs() < 1e-3);
        let est = sense_slot(&target(&cfg, &tx), &t, &cfg, &opts).unwrap();
        assert_eq!(est.peak_bin, (40.96f64 - shift).round() as usize);
    }

    #[test]
    fn pilot_template_skips_empty_symbols() {
        let cfg = WaveformConfig::nr_fr2(64, 3).unwrap();
        let mut g = ResourceGrid::zeros(3, 64);
        g.set(1, 5, Complex64::new(1.0, 0.0));
        match pilot_symbol_template(&g, &cfg).unwrap() {
            Template::PerSymbol(v) => {
                assert!(v[0].is_none() && v[1].is_some() && v[2].is_none());
            }
            Template::Shared(_) => panic!("expected per-symbol templates"),
        }
    }

    #[test]
    fn doppler_with_gaps_divides_by_span() {
        let cfg = WaveformConfig::nr_fr2(256, 14).unwrap();
        let step = 2.0 * PI * 1000.0 * cfg.symbol_duration_s();
        let z: Vec<(usize, Complex64)> = [0usize, 2, 3, 7]
            .iter()
            .map(|&m| (m, Complex64::from_polar(1.0, step * m as f64)))
            .collect();
        assert!((doppler_from_indexed(&z, &cfg).unwrap() - 1000.0).abs() < 1e-6);
    }
}
