//! Tapped delay-Doppler channel, AWGN and synchronization impairments.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::waveform::{TimeSignal, WaveformConfig};
use crate::{dsp, rng, Complex64, Result, SPEED_OF_LIGHT};

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathTap {
    /// Tap power in dB.
    pub gain_db: f64,
    /// Delay in samples (may be fractional).
    pub delay_samples: f64,
    #[serde(default)]
    pub doppler_hz: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

impl PathTap {
    pub fn new(gain_db: f64, delay_samples: f64, doppler_hz: f64, phase_rad: f64) -> Self {
        Self {
            gain_db,
            delay_samples,
            doppler_hz,
            phase_rad,
        }
    }

    /// Complex gain ξ = 10^{gain_db/20}·e^{j·phase}.
    pub fn gain(&self) -> Complex64 {
        Complex64::from_polar(10f64.powf(self.gain_db / 20.0), self.phase_rad)
    }
}

/// Tap powers (dB) and delays (samples) of the reference multipath profile.
pub const REFERENCE_MULTIPATH: [(f64, f64); 5] = [
    (0.0, 0.0),
    (-8.0, 3.0),
    (-17.0, 5.0),
    (-21.0, 6.0),
    (-25.0, 8.0),
];

/// Taps plus noise and synchronization settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub taps: Vec<PathTap>,
    /// `None` means noiseless.
    pub snr_db: Option<f64>,
    pub seed: u64,
    #[serde(default)]
    pub cfo_hz: f64,
    #[serde(default)]
    pub timing_drift_s: f64,
}

impl ChannelRealization {
    pub fn noiseless(taps: Vec<PathTap>) -> Self {
        Self {
            taps,
            snr_db: None,
            seed: 0,
            cfo_hz: 0.0,
            timing_drift_s: 0.0,
        }
    }

    /// Reference multipath profile with uniformly random tap phases.
    pub fn reference_multipath<R: Rng + ?Sized>(rng: &mut R) -> Vec<PathTap> {
        REFERENCE_MULTIPATH
            .iter()
            .map(|&(g, d)| PathTap::new(g, d, 0.0, rng.random_range(0.0..2.0 * PI)))
            .collect()
    }

    /// Single monostatic point target: delay 2R/c, Doppler 2v·f_c/c.
    pub fn point_target(range_m: f64, velocity_mps: f64, cfg: &WaveformConfig) -> PathTap {
        PathTap::new(
            0.0,
            2.0 * range_m / SPEED_OF_LIGHT * cfg.sample_rate_hz(),
            2.0 * velocity_mps * cfg.carrier_hz() / SPEED_OF_LIGHT,
            0.0,
        )
    }
}

/// y(l) = x(l − d): integer delays by shifting, fractional delays by a
/// DFT-domain phase ramp on a zero-padded copy. Negative delays advance.
/// The output keeps the input length.
pub fn delay_signal(x: &[Complex64], delay_samples: f64) -> Vec<Complex64> {
    let len = x.len();
    let zero = Complex64::new(0.0, 0.0);
    if delay_samples == delay_samples.round() {
        let d = delay_samples as i64;
        return (0..len as i64)
            .map(|l| {
                let src = l - d;
                if (0..len as i64).contains(&src) {
                    x[src as usize]
                } else {
                    zero
                }
            })
            .collect();
    }
    let shift = delay_samples.abs().ceil() as usize;
    let padded = (len + shift + 64).next_power_of_two();
    let lead = if delay_samples < 0.0 { shift } else { 0 };
    let mut buf = vec![zero; padded];
    buf[lead..lead + len].copy_from_slice(x);
    dsp::fft(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let f = dsp::signed_bin(k, padded) / padded as f64;
        *v *= Complex64::from_polar(1.0 / padded as f64, -2.0 * PI * f * delay_samples);
    }
    dsp::ifft(&mut buf);
    buf[lead..lead + len].to_vec()
}

/// Multipath superposition Σ ξ_i·x(l − d_i)·e^{j2π f_i l/f_s}, no noise.
pub fn apply_taps(x: &TimeSignal, taps: &[PathTap]) -> Result<TimeSignal> {
    if taps.is_empty() {
        return Err(invalid("channel needs at least one tap"));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
    for tap in taps {
        if !(tap.delay_samples >= 0.0 && tap.delay_samples < x.len() as f64) {
            return Err(invalid(format!(
                "tap delay {} outside 0..{}",
                tap.delay_samples,
                x.len()
            )));
        }
        let delayed = delay_signal(&x.samples, tap.delay_samples);
        let xi = tap.gain();
        let w = 2.0 * PI * tap.doppler_hz / x.sample_rate_hz;
        for (l, (o, d)) in out.iter_mut().zip(delayed).enumerate() {
            *o += if tap.doppler_hz == 0.0 {
                xi * d
            } else {
                xi * d * Complex64::from_polar(1.0, w * l as f64)
            };
        }
    }
    Ok(TimeSignal {
        samples: out,
        sample_rate_hz: x.sample_rate_hz,
        t0_s: x.t0_s,
    })
}

/// Full channel: taps, timing drift, CFO, then AWGN at the requested SNR
/// measured over the useful (non-CP) samples.
pub fn apply_channel(
    x: &TimeSignal,
    ch: &ChannelRealization,
    cfg: &WaveformConfig,
) -> Result<TimeSignal> {
    let mut y = apply_taps(x, &ch.taps)?;
    if ch.timing_drift_s != 0.0 {
        y = apply_timing_drift(&y, ch.timing_drift_s)?;
    }
    if ch.cfo_hz != 0.0 {
        y = apply_cfo(&y, ch.cfo_hz);
    }
    match ch.snr_db {
        None => Ok(y),
        Some(snr) => {
            let power = useful_power(&y.samples, cfg);
            let mut r = rng::stream(ch.seed, 0);
            Ok(add_awgn_with_power(&y, power, snr, &mut r))
        }
    }
}

/// Mean power over the CP-free samples of every whole symbol in `x`.
pub fn useful_power(x: &[Complex64], cfg: &WaveformConfig) -> f64 {
    let symbols = x.len() / cfg.symbol_len();
    if symbols == 0 {
        return dsp::mean_power(x);
    }
    let sum: f64 = (0..symbols)
        .map(|m| dsp::energy(&x[cfg.useful_range(m)]))
        .sum();
    sum / (symbols * cfg.n_subcarriers()) as f64
}

/// Complex AWGN with per-sample variance = mean signal power / 10^{snr/10};
/// `snr_db = +∞` returns the input unchanged.
pub fn add_awgn(x: &TimeSignal, snr_db: f64, seed: u64) -> TimeSignal {
    let mut r = rng::stream(seed, 0);
    add_awgn_with_power(x, dsp::mean_power(&x.samples), snr_db, &mut r)
}

/// AWGN against an explicit reference signal power.
pub fn add_awgn_with_power<R: Rng + ?Sized>(
    x: &TimeSignal,
    signal_power: f64,
    snr_db: f64,
    rng: &mut R,
) -> TimeSignal {
    if snr_db == f64::INFINITY {
        return x.clone();
    }
    let sigma = (signal_power / 10f64.powf(snr_db / 10.0) / 2.0).sqrt();
    let samples = x
        .samples
        .iter()
        .map(|v| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v + Complex64::new(re, im) * sigma
        })
        .collect();
    TimeSignal {
        samples,
        sample_rate_hz: x.sample_rate_hz,
        t0_s: x.t0_s,
    }
}

/// Carrier frequency offset: x(l)·e^{j2π ε l/f_s}.
pub fn apply_cfo(x: &TimeSignal, epsilon_hz: f64) -> TimeSignal {
    if epsilon_hz == 0.0 {
        return x.clone();
    }
    let w = 2.0 * PI * epsilon_hz / x.sample_rate_hz;
    let samples = x
        .samples
        .iter()
        .enumerate()
        .map(|(l, v)| v * Complex64::from_polar(1.0, w * l as f64))
        .collect();
    TimeSignal {
        samples,
        sample_rate_hz: x.sample_rate_hz,
        t0_s: x.t0_s,
    }
}

/// Residual timing error: the whole signal delayed by `dt_s`.
pub fn apply_timing_drift(x: &TimeSignal, dt_s: f64) -> Result<TimeSignal> {
    if !(dt_s.abs() < x.duration_s()) {
        return Err(invalid(format!(
            "timing drift {dt_s} s exceeds the {} s signal",
            x.duration_s()
        )));
    }
    if dt_s == 0.0 {
        return Ok(x.clone());
    }
    let samples = delay_signal(&x.samples, dt_s * x.sample_rate_hz);
    Ok(TimeSignal {
        samples,
        sample_rate_hz: x.sample_rate_hz,
        t0_s: x.t0_s,
    })
}
