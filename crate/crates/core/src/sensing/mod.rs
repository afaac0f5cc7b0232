//! Matched-filter range profiles, range/velocity estimators, sensing limits,
//! receiver complexity and RMSE aggregation.

mod receiver;

pub use receiver::{
    chirp_symbol_template, cm_symbol_template, pilot_symbol_template, sense_slot, sense_symbols,
    slot_template, ReceiverOptions,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch};
use crate::waveform::{TimeSignal, WaveformConfig};
use crate::{dsp, Complex64, Result, SPEED_OF_LIGHT};

/// Matched-filter output Υ(τ) for one processing window.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfile {
    pub correlation: Vec<Complex64>,
    pub lag_axis_s: Vec<f64>,
    /// Symbol index for per-symbol profiles, first symbol of the window otherwise.
    pub symbol_index: usize,
}

impl RangeProfile {
    fn from_correlation(
        correlation: Vec<Complex64>,
        sample_rate_hz: f64,
        symbol_index: usize,
    ) -> Self {
        let lag_axis_s = (0..correlation.len())
            .map(|k| k as f64 / sample_rate_hz)
            .collect();
        Self {
            correlation,
            lag_axis_s,
            symbol_index,
        }
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.correlation.iter().map(|v| v.norm()).collect()
    }
}

/// Joint range/velocity estimate of one target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingEstimate {
    pub range_m: f64,
    pub velocity_mps: f64,
    pub peak_bin: usize,
    pub doppler_hz: f64,
}

/// Reference signal for per-symbol matched filtering (N samples each).
#[derive(Debug, Clone, PartialEq)]
pub enum Template {
    /// Same reference for every symbol (data-independent chirp).
    Shared(Vec<Complex64>),
    /// One reference per symbol; `None` skips that symbol.
    PerSymbol(Vec<Option<Vec<Complex64>>>),
}

/// Per-symbol circular correlation of the CP-free receive windows with the
/// template, via forward FFT, conjugate-spectrum product and inverse FFT.
/// A shared template's spectrum is computed once.
pub fn matched_filter(
    rx: &TimeSignal,
    template: &Template,
    cfg: &WaveformConfig,
) -> Result<Vec<RangeProfile>> {
    let n = cfg.n_subcarriers();
    let symbols = rx.len() / cfg.symbol_len();
    if symbols == 0 || rx.len() % cfg.symbol_len() != 0 {
        return Err(mismatch(format!(
            "receive window of {} samples is not whole {}-sample symbols",
            rx.len(),
            cfg.symbol_len()
        )));
    }
    let check = |t: &[Complex64]| {
        if t.len() == n {
            Ok(())
        } else {
            Err(mismatch(format!(
                "template has {} samples, expected {n}",
                t.len()
            )))
        }
    };
    let window = |m: usize| &rx.samples[cfg.useful_range(m)];
    match template {
        Template::Shared(t) => {
            check(t)?;
            let spec = dsp::spectrum(t);
            Ok((0..symbols)
                .map(|m| {
                    RangeProfile::from_correlation(
                        dsp::circular_xcorr_with_spectrum(window(m), &spec),
                        rx.sample_rate_hz,
                        m,
                    )
                })
                .collect())
        }
        Template::PerSymbol(ts) => {
            if ts.len() != symbols {
                return Err(mismatch(format!(
                    "{} per-symbol templates for {symbols} symbols",
                    ts.len()
                )));
            }
            let mut out = Vec::new();
            for (m, t) in ts.iter().enumerate() {
                if let Some(t) = t {
                    check(t)?;
                    let spec = dsp::spectrum(t);
                    out.push(RangeProfile::from_correlation(
                        dsp::circular_xcorr_with_spectrum(window(m), &spec),
                        rx.sample_rate_hz,
                        m,
                    ));
                }
            }
            Ok(out)
        }
    }
}

/// Circular correlation of an arbitrary window with an equal-length template.
pub fn correlate_window(
    rx: &[Complex64],
    template: &[Complex64],
    sample_rate_hz: f64,
    symbol_index: usize,
) -> Result<RangeProfile> {
    if rx.len() != template.len() || rx.is_empty() {
        return Err(mismatch(format!(
            "window has {} samples, template {}",
            rx.len(),
            template.len()
        )));
    }
    let spec = dsp::spectrum(template);
    Ok(RangeProfile::from_correlation(
        dsp::circular_xcorr_with_spectrum(rx, &spec),
        sample_rate_hz,
        symbol_index,
    ))
}

/// Peak selection rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakRule {
    /// Largest magnitude.
    #[default]
    GlobalMax,
    /// Earliest local maximum at least `factor` times the median magnitude;
    /// falls back to the global maximum.
    EarliestAboveMedian { factor: f64 },
    /// Earliest local maximum at least `fraction` of the global maximum
    /// (resolves equal-height grating lobes of comb pilots).
    EarliestNearMax { fraction: f64 },
}

/// Selected peak of a magnitude profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub bin: usize,
    /// Sub-bin offset from parabolic interpolation (0 when disabled).
    pub offset: f64,
    /// Several bins share the global maximum; the smallest lag was taken.
    pub tie: bool,
}

pub fn pick_peak(mags: &[f64], rule: PeakRule, interpolate: bool) -> Result<Peak> {
    if mags.is_empty() {
        return Err(invalid("peak search on an empty profile"));
    }
    let max = mags.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let first_max = mags.iter().position(|&v| v == max).expect("nonempty");
    let tie = mags.iter().filter(|&&v| v == max).count() > 1;
    let threshold = match rule {
        PeakRule::GlobalMax => None,
        PeakRule::EarliestAboveMedian { factor } => {
            let mut sorted = mags.to_vec();
            sorted.sort_by(f64::total_cmp);
            Some(factor * sorted[sorted.len() / 2])
        }
        PeakRule::EarliestNearMax { fraction } => Some(fraction * max),
    };
    let len = mags.len();
    let bin = threshold
        .and_then(|th| {
            (0..len).find(|&l| {
                let prev = mags[(l + len - 1) % len];
                let next = mags[(l + 1) % len];
                mags[l] >= th && mags[l] > 0.0 && mags[l] >= prev && mags[l] >= next
            })
        })
        .unwrap_or(first_max);
    let offset = if interpolate && mags.len() >= 3 {
        let len = mags.len();
        let (a, b, c) = (
            mags[(bin + len - 1) % len],
            mags[bin],
            mags[(bin + 1) % len],
        );
        let den = a - 2.0 * b + c;
        if den < 0.0 {
            (0.5 * (a - c) / den).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok(Peak { bin, offset, tie })
}

/// Range estimate from a peak lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeEstimate {
    pub range_m: f64,
    pub peak_bin: usize,
    pub tie: bool,
}

/// R̂ = c·(peak lag)/2 for lag index k at rate f_s (k/f_s seconds).
pub fn range_from_lag(lag_samples: f64, sample_rate_hz: f64) -> f64 {
    SPEED_OF_LIGHT * lag_samples / (2.0 * sample_rate_hz)
}

/// Global-maximum range estimate of one profile; ties go to the smallest lag
/// and are flagged.
pub fn estimate_range(profile: &RangeProfile, sample_rate_hz: f64) -> Result<RangeEstimate> {
    estimate_range_with(profile, sample_rate_hz, PeakRule::GlobalMax, false)
}

pub fn estimate_range_with(
    profile: &RangeProfile,
    sample_rate_hz: f64,
    rule: PeakRule,
    interpolate: bool,
) -> Result<RangeEstimate> {
    let peak = pick_peak(&profile.magnitudes(), rule, interpolate)?;
    Ok(RangeEstimate {
        range_m: range_from_lag(peak.bin as f64 + peak.offset, sample_rate_hz),
        peak_bin: peak.bin,
        tie: peak.tie,
    })
}

/// Mean of the unwrapped successive phase differences of `z`, in rad/symbol.
pub fn mean_phase_step(z: &[Complex64]) -> Result<f64> {
    if z.len() < 2 {
        return Err(invalid(format!(
            "velocity needs at least two symbols, got {}",
            z.len()
        )));
    }
    let mut total = 0.0;
    for w in z.windows(2) {
        let d = w[1].arg() - w[0].arg();
        total += (d + PI).rem_euclid(2.0 * PI) - PI;
    }
    Ok(total / (z.len() - 1) as f64)
}

/// Doppler estimate f̂_d = Δφ/(2π·T_o) from per-symbol peak samples.
pub fn estimate_doppler(z: &[Complex64], cfg: &WaveformConfig) -> Result<f64> {
    Ok(mean_phase_step(z)? / (2.0 * PI * cfg.symbol_duration_s()))
}

/// v̂ = c·f̂_d/(2f_c).
pub fn estimate_velocity(z: &[Complex64], cfg: &WaveformConfig) -> Result<f64> {
    Ok(velocity_from_doppler(estimate_doppler(z, cfg)?, cfg))
}

pub fn velocity_from_doppler(doppler_hz: f64, cfg: &WaveformConfig) -> f64 {
    SPEED_OF_LIGHT * doppler_hz / (2.0 * cfg.carrier_hz())
}

/// Resolution and unambiguous limits of an n-subcarrier × m-symbol block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingLimits {
    pub range_resolution_m: f64,
    pub max_unambiguous_range_m: f64,
    pub max_unambiguous_velocity_mps: f64,
}

/// ΔR = c/(2nΔf), R_max = c·f_s·m·T_o/(4nΔf), v_max = λ/(4·m·T_o).
pub fn sensing_limits(n: usize, m: usize, cfg: &WaveformConfig) -> Result<SensingLimits> {
    if n == 0 || n > cfg.n_subcarriers() {
        return Err(invalid(format!(
            "block width {n} outside 1..={}",
            cfg.n_subcarriers()
        )));
    }
    if m == 0 {
        return Err(invalid("block needs at least one symbol"));
    }
    let df = cfg.subcarrier_spacing_hz();
    let t_o = cfg.symbol_duration_s();
    let n = n as f64;
    let m = m as f64;
    Ok(SensingLimits {
        range_resolution_m: SPEED_OF_LIGHT / (2.0 * n * df),
        max_unambiguous_range_m: SPEED_OF_LIGHT * cfg.sample_rate_hz() * m * t_o / (4.0 * n * df),
        max_unambiguous_velocity_mps: cfg.wavelength_m() / (4.0 * m * t_o),
    })
}

/// Sensing receiver whose complex-multiplication count is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexityScheme {
    Aac,
    Cm,
    OfdmPrs,
}

/// Complex multiplications of an M-symbol radix-2 matched-filter receiver.
/// AAC and OFDM-PRS: M(N log2N + N) + (N/2) log2N (one template FFT);
/// CM: M(1.5 N log2N + N) (template regenerated per symbol).
pub fn complexity_counts(n: usize, m: usize, scheme: ComplexityScheme) -> Result<u64> {
    if n == 0 || !n.is_power_of_two() {
        return Err(invalid(format!(
            "radix-2 count needs a power-of-two N, got {n}"
        )));
    }
    let (n, m) = (n as u64, m as u64);
    let log2n = n.trailing_zeros() as u64;
    Ok(match scheme {
        ComplexityScheme::Aac | ComplexityScheme::OfdmPrs => m * (n * log2n + n) + n / 2 * log2n,
        ComplexityScheme::Cm => m * (3 * n * log2n / 2 + n),
    })
}

/// Root-mean-square of (estimate − truth).
pub fn rmse_aggregate(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(invalid("RMSE of no estimates"));
    }
    let sum: f64 = pairs.iter().map(|(e, t)| (e - t) * (e - t)).sum();
    Ok((sum / pairs.len() as f64).sqrt())
}
