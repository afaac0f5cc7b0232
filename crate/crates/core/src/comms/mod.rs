//! Communications receiver chain (dechirp, demodulation, equalization, FEC)
//! and link metrics.

mod fec;
mod link;

pub use fec::{
    conv_encode, viterbi_decode, viterbi_decode_with_erasures, CodecConfig, CODE_RATE,
    CONSTRAINT_LENGTH, GENERATORS_OCTAL,
};
pub use link::Link;

use serde::{Deserialize, Serialize};

use crate::channel::{apply_taps, PathTap};
use crate::error::{invalid, mismatch};
use crate::waveform::{generate_chirp, ChirpPlan, Scheme, TimeSignal, WaveformConfig};
use crate::{dsp, Complex64, Result};

/// Genie channel knowledge: the propagation taps (empty = identity channel).
/// Tap Doppler is honoured by the time-domain chirp replica but not by the
/// per-subcarrier response.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Csi {
    taps: Vec<PathTap>,
}

impl Csi {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_taps(taps: Vec<PathTap>) -> Self {
        Self { taps }
    }

    pub fn taps(&self) -> &[PathTap] {
        &self.taps
    }

    pub fn is_identity(&self) -> bool {
        self.taps.is_empty()
    }

    /// H(k) = Σ ξ_i·e^{−j2π·k·d_i/N} with k taken as a signed bin.
    pub fn frequency_response(&self, n: usize) -> Vec<Complex64> {
        if self.is_identity() {
            return vec![Complex64::new(1.0, 0.0); n];
        }
        (0..n)
            .map(|k| {
                let f = dsp::signed_bin(k, n) / n as f64;
                self.taps
                    .iter()
                    .map(|t| {
                        t.gain()
                            * Complex64::from_polar(
                                1.0,
                                -2.0 * std::f64::consts::PI * f * t.delay_samples,
                            )
                    })
                    .sum()
            })
            .collect()
    }
}

/// Dechirped signal and the channel knowledge still to be equalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Dechirped {
    pub signal: TimeSignal,
    pub residual_csi: Csi,
}

/// One-tap equalization of a useful part: FFT, divide, IFFT. Zero gains
/// zero the bin.
fn equalize_useful(useful: &mut [Complex64], h: &[Complex64]) {
    dsp::fft(useful);
    let n = useful.len() as f64;
    for (v, g) in useful.iter_mut().zip(h) {
        *v = if g.norm_sqr() > 0.0 {
            *v / g / n
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    dsp::ifft(useful);
}

fn restore_cp(x: &mut [Complex64], cfg: &WaveformConfig, m: usize) {
    let (start, cp, n) = (m * cfg.symbol_len(), cfg.cp_samples(), cfg.n_subcarriers());
    for p in 0..cp {
        x[start + p] = x[start + cp + n - cp + p];
    }
}

/// Removes the chirp component so plain OFDM demodulation applies.
///
/// AAC: subtract α·(chirp through the CSI taps) and scale by 1/(1−α); the
/// CSI remains to be equalized. CM: on a known channel each symbol is first
/// equalized (CP removal, FFT, divide by H, IFFT), then multiplied by the
/// conjugate chirp and divided by q_m(n); the residual CSI is the identity.
/// On the identity channel CM reduces to the sample-wise conjugate multiply.
/// CM needs every chirped symbol fully covered (no comb or sub-band).
/// OFDM passes through unchanged.
pub fn dechirp(
    rx: &TimeSignal,
    plan: &ChirpPlan,
    cfg: &WaveformConfig,
    scheme: Scheme,
    alpha: f64,
    csi: &Csi,
) -> Result<Dechirped> {
    plan.check_dims(cfg)?;
    if rx.len() != cfg.frame_len() {
        return Err(mismatch(format!(
            "received {} samples, frame has {}",
            rx.len(),
            cfg.frame_len()
        )));
    }
    match scheme {
        Scheme::Ofdm => Ok(Dechirped {
            signal: rx.clone(),
            residual_csi: csi.clone(),
        }),
        Scheme::Aac => {
            if !(0.0..1.0).contains(&alpha) {
                return Err(invalid(format!("AAC dechirp needs 0 ≤ α < 1, got {alpha}")));
            }
            if alpha == 0.0 {
                return Ok(Dechirped {
                    signal: rx.clone(),
                    residual_csi: csi.clone(),
                });
            }
            let chirp = generate_chirp(plan, cfg)?;
            let replica = if csi.is_identity() {
                chirp
            } else {
                apply_taps(&chirp, csi.taps())?
            };
            let scale = 1.0 / (1.0 - alpha);
            let samples = rx
                .samples
                .iter()
                .zip(&replica.samples)
                .map(|(r, c)| (r - c * alpha) * scale)
                .collect();
            Ok(Dechirped {
                signal: TimeSignal {
                    samples,
                    ..rx.clone()
                },
                residual_csi: csi.clone(),
            })
        }
        Scheme::Cm => {
            if plan.comb().is_some() || plan.region().width() != cfg.n_subcarriers() {
                return Err(invalid(
                    "CM dechirp needs the chirp to cover every subcarrier of its symbols",
                ));
            }
            let n = cfg.n_subcarriers();
            let ts = cfg.sample_period_s();
            let h = (!csi.is_identity()).then(|| csi.frequency_response(n));
            let mut out = rx.samples.clone();
            if let Some(h) = &h {
                for m in 0..cfg.n_symbols() {
                    equalize_useful(&mut out[cfg.useful_range(m)], h);
                }
            }
            for seg in plan.segments(cfg) {
                for m in seg.symbols.clone() {
                    let range = cfg.useful_range(m);
                    for l in range.clone() {
                        out[l] *= seg.phasor(l, ts).conj();
                    }
                    let q: Vec<f64> = (0..n).map(|k| plan.amplitude(m, k)).collect();
                    if q.iter().any(|&a| a != 1.0) {
                        let inv: Vec<Complex64> =
                            q.iter().map(|&a| Complex64::new(a, 0.0)).collect();
                        equalize_useful(&mut out[range], &inv);
                    }
                }
            }
            for m in 0..cfg.n_symbols() {
                restore_cp(&mut out, cfg, m);
            }
            Ok(Dechirped {
                signal: TimeSignal {
                    samples: out,
                    ..rx.clone()
                },
                residual_csi: Csi::identity(),
            })
        }
    }
}

/// Equalized frequency-domain symbols with erasure flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Demodulated {
    pub n_symbols: usize,
    pub n_subcarriers: usize,
    pub values: Vec<Complex64>,
    /// Resource elements whose channel gain was zero.
    pub erasures: Vec<bool>,
}

impl Demodulated {
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.values[m * self.n_subcarriers + n]
    }

    /// Values and erasure flags at the `mask` positions, row-major.
    pub fn select(&self, mask: &[bool]) -> (Vec<Complex64>, Vec<bool>) {
        mask.iter()
            .enumerate()
            .filter(|(_, &d)| d)
            .map(|(i, _)| (self.values[i], self.erasures[i]))
            .unzip()
    }
}

/// CP removal, √N-scaled DFT and one-tap equalization by `gains`.
pub fn ofdm_demodulate(
    x: &TimeSignal,
    cfg: &WaveformConfig,
    gains: &[Complex64],
) -> Result<Demodulated> {
    let n = cfg.n_subcarriers();
    if gains.len() != n {
        return Err(mismatch(format!(
            "{} channel gains for {n} subcarriers",
            gains.len()
        )));
    }
    if x.len() % cfg.symbol_len() != 0 || x.is_empty() {
        return Err(mismatch(format!(
            "{} samples is not a whole number of {}-sample symbols",
            x.len(),
            cfg.symbol_len()
        )));
    }
    let symbols = x.len() / cfg.symbol_len();
    let scale = 1.0 / (n as f64).sqrt();
    let mut values = Vec::with_capacity(symbols * n);
    let mut erasures = Vec::with_capacity(symbols * n);
    for m in 0..symbols {
        let mut buf = x.samples[cfg.useful_range(m)].to_vec();
        dsp::fft(&mut buf);
        for (v, g) in buf.iter().zip(gains) {
            if g.norm_sqr() > 0.0 {
                values.push(v * scale / g);
                erasures.push(false);
            } else {
                values.push(Complex64::new(0.0, 0.0));
                erasures.push(true);
            }
        }
    }
    Ok(Demodulated {
        n_symbols: symbols,
        n_subcarriers: n,
        values,
        erasures,
    })
}

/// Accumulated link statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LinkResult {
    pub frames: u64,
    pub frame_errors: u64,
    pub bits_tx: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub se_bits_per_s_per_hz: f64,
    pub ebn0_db: f64,
}

impl LinkResult {
    pub fn frame(bits_tx: u64, bit_errors: u64, ebn0_db: f64) -> Self {
        let mut r = Self {
            frames: 1,
            frame_errors: (bit_errors > 0) as u64,
            bits_tx,
            bit_errors,
            ebn0_db,
            ..Self::default()
        };
        r.ber = r.bit_errors as f64 / r.bits_tx.max(1) as f64;
        r
    }

    /// Sums the counters of two results at the same operating point.
    pub fn merge(&self, other: &Self) -> Self {
        let mut r = Self {
            frames: self.frames + other.frames,
            frame_errors: self.frame_errors + other.frame_errors,
            bits_tx: self.bits_tx + other.bits_tx,
            bit_errors: self.bit_errors + other.bit_errors,
            ebn0_db: self.ebn0_db,
            ..Self::default()
        };
        r.ber = r.bit_errors as f64 / r.bits_tx.max(1) as f64;
        r
    }

    pub fn frame_error_rate(&self) -> f64 {
        self.frame_errors as f64 / self.frames.max(1) as f64
    }
}

/// SE = bits_per_symbol · code_rate · data_fraction · (1 − frame error rate).
pub fn spectral_efficiency(
    result: &LinkResult,
    data_fraction: f64,
    bits_per_symbol: usize,
    code_rate: f64,
) -> Result<f64> {
    if !(data_fraction > 0.0 && data_fraction <= 1.0) {
        return Err(invalid(format!(
            "data fraction must lie in (0, 1], got {data_fraction}"
        )));
    }
    if result.frames == 0 {
        return Err(invalid("spectral efficiency of zero frames"));
    }
    Ok(bits_per_symbol as f64 * code_rate * data_fraction * (1.0 - result.frame_error_rate()))
}

/// SNR_dB = E_b/N_0 + 10·log10(bits_per_symbol · code_rate · N_active/N).
pub fn ebn0_to_snr_db(
    ebn0_db: f64,
    bits_per_symbol: usize,
    code_rate: f64,
    active_fraction: f64,
) -> f64 {
    ebn0_db + 10.0 * (bits_per_symbol as f64 * code_rate * active_fraction).log10()
}
