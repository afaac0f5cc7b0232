//! Delay-Doppler ambiguity functions: numeric surfaces, closed forms for
//! AAC and CM frames, Fresnel integrals and mainlobe widths.

mod analytic;
mod fresnel;

pub use analytic::{
    aac_ambiguity_analytic, chirp_integral, cm_ambiguity_analytic, sinc, ContinuousModel,
};
pub use fresnel::fresnel;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::waveform::{TimeSignal, WaveformConfig};
use crate::{Complex64, Result};

/// Overlap of symbol m of x(t) with symbol m' of x(t−τ): half length T_d
/// and midpoint T_a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapWindow {
    pub t_d: f64,
    pub t_a: f64,
    pub empty: bool,
}

impl OverlapWindow {
    pub fn t_min(&self) -> f64 {
        self.t_a - self.t_d
    }

    pub fn t_max(&self) -> f64 {
        self.t_a + self.t_d
    }
}

/// T_d = (T_o − |τ+(m'−m)T_o|)/2, T_a = mT_o + (T_o+τ+(m'−m)T_o)/2;
/// empty when |τ+(m'−m)T_o| ≥ T_o.
pub fn overlap_window(m: i64, m_prime: i64, tau: f64, t_o: f64) -> OverlapWindow {
    let shift = tau + (m_prime - m) as f64 * t_o;
    if shift.abs() >= t_o {
        return OverlapWindow {
            t_d: 0.0,
            t_a: 0.0,
            empty: true,
        };
    }
    OverlapWindow {
        t_d: 0.5 * (t_o - shift.abs()),
        t_a: m as f64 * t_o + 0.5 * (t_o + shift),
        empty: false,
    }
}

/// Normalized |χ(τ, f_d)|, indexed `[delay][doppler]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguitySurface {
    pub magnitude: Vec<Vec<f64>>,
    pub delay_axis_s: Vec<f64>,
    pub doppler_axis_hz: Vec<f64>,
}

impl AmbiguitySurface {
    /// Normalizes |values| to a maximum of 1.
    pub fn from_complex(
        values: &[Vec<Complex64>],
        delay_axis_s: Vec<f64>,
        doppler_axis_hz: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != delay_axis_s.len()
            || values.iter().any(|r| r.len() != doppler_axis_hz.len())
        {
            return Err(invalid("surface dimensions do not match its axes"));
        }
        let peak = values
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if peak == 0.0 {
            return Err(invalid("ambiguity surface is identically zero"));
        }
        let magnitude = values
            .iter()
            .map(|r| r.iter().map(|v| v.norm() / peak).collect())
            .collect();
        Ok(Self {
            magnitude,
            delay_axis_s,
            doppler_axis_hz,
        })
    }

    /// (delay_s, doppler_hz, magnitude) triples, delay-major.
    pub fn triples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.delay_axis_s
            .iter()
            .enumerate()
            .flat_map(move |(i, &d)| {
                self.doppler_axis_hz
                    .iter()
                    .enumerate()
                    .map(move |(j, &f)| (d, f, self.magnitude[i][j]))
            })
    }

    fn zero_index(axis: &[f64], name: &str) -> Result<usize> {
        axis.iter()
            .position(|&v| v.abs() < 1e-12 * axis.iter().fold(1.0f64, |a, b| a.max(b.abs())))
            .ok_or_else(|| invalid(format!("{name} axis has no zero")))
    }

    /// Cut along delay at zero Doppler or along Doppler at zero delay.
    pub fn cut(&self, cut: Cut) -> Result<(Vec<f64>, Vec<f64>)> {
        match cut {
            Cut::ZeroDoppler => {
                let j = Self::zero_index(&self.doppler_axis_hz, "Doppler")?;
                Ok((
                    self.delay_axis_s.clone(),
                    self.magnitude.iter().map(|r| r[j]).collect(),
                ))
            }
            Cut::ZeroDelay => {
                let i = Self::zero_index(&self.delay_axis_s, "delay")?;
                Ok((self.doppler_axis_hz.clone(), self.magnitude[i].clone()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cut {
    ZeroDoppler,
    ZeroDelay,
}

/// Σ_l h·x(l)·x*(l−d)·e^{j2πf(t0 + l·h)} for each integer lag d and
/// frequency f (x zero outside its support).
pub fn ambiguity_samples(
    samples: &[Complex64],
    h: f64,
    t0: f64,
    lags: &[i64],
    dopplers_hz: &[f64],
) -> Vec<Vec<Complex64>> {
    let len = samples.len() as i64;
    lags.iter()
        .map(|&d| {
            let lo = d.max(0);
            let hi = (len + d).min(len);
            let prod: Vec<Complex64> = (lo..hi)
                .map(|l| samples[l as usize] * samples[(l - d) as usize].conj())
                .collect();
            dopplers_hz
                .iter()
                .map(|&f| {
                    let w = 2.0 * PI * f * h;
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut rot = Complex64::new(1.0, 0.0);
                    let step = Complex64::from_polar(1.0, w);
                    for (i, p) in prod.iter().enumerate() {
                        if i % 512 == 0 {
                            rot = Complex64::from_polar(1.0, w * i as f64);
                        }
                        acc += p * rot;
                        rot *= step;
                    }
                    acc * h * Complex64::from_polar(1.0, 2.0 * PI * f * (t0 + lo as f64 * h))
                })
                .collect()
        })
        .collect()
}

/// Integer lags for delays on the h grid; |lag| must stay below `limit`.
fn lags_on_grid(delay_axis_s: &[f64], h: f64, limit: usize) -> Result<Vec<i64>> {
    delay_axis_s
        .iter()
        .map(|&tau| {
            let d = (tau / h).round();
            if (tau / h - d).abs() > 1e-6 {
                return Err(invalid(format!(
                    "delay {tau} s is not a multiple of the {h} s sample step"
                )));
            }
            if d.abs() >= limit as f64 {
                return Err(invalid(format!("delay {tau} s exceeds the signal support")));
            }
            Ok(d as i64)
        })
        .collect()
}

/// Numeric ambiguity surface of a sampled signal,
/// χ(d/f_s, f) = (1/f_s)·Σ x(l)x*(l−d)e^{j2πf t_l}, normalized to max 1.
pub fn ambiguity_numeric(
    x: &TimeSignal,
    delay_axis_s: &[f64],
    doppler_axis_hz: &[f64],
) -> Result<AmbiguitySurface> {
    let raw = ambiguity_numeric_complex(x, delay_axis_s, doppler_axis_hz)?;
    AmbiguitySurface::from_complex(&raw, delay_axis_s.to_vec(), doppler_axis_hz.to_vec())
}

/// Unnormalized complex values of [`ambiguity_numeric`].
pub fn ambiguity_numeric_complex(
    x: &TimeSignal,
    delay_axis_s: &[f64],
    doppler_axis_hz: &[f64],
) -> Result<Vec<Vec<Complex64>>> {
    if x.is_empty() {
        return Err(invalid("ambiguity of an empty signal"));
    }
    let h = 1.0 / x.sample_rate_hz;
    if let Some(f) = doppler_axis_hz
        .iter()
        .find(|f| f.abs() > 0.5 * x.sample_rate_hz)
    {
        return Err(invalid(format!("Doppler {f} Hz exceeds the Nyquist limit")));
    }
    let lags = lags_on_grid(delay_axis_s, h, x.len())?;
    Ok(ambiguity_samples(
        &x.samples,
        h,
        x.t0_s,
        &lags,
        doppler_axis_hz,
    ))
}

/// Midpoint-rule evaluation of the continuous ambiguity integral of `x(t)`
/// on [0, duration), with step T_s/os and one Richardson step (os, 2·os).
/// Delays must be multiples of T_s/os; breakpoints at multiples of T_s
/// then coincide with cell edges and the error is O(h⁴).
pub fn ambiguity_continuous<F: Fn(f64) -> Complex64>(
    x: F,
    duration_s: f64,
    sample_period_s: f64,
    os: usize,
    delay_axis_s: &[f64],
    doppler_axis_hz: &[f64],
) -> Result<Vec<Vec<Complex64>>> {
    if os == 0 {
        return Err(invalid("oversampling factor must be positive"));
    }
    let eval = |os: usize| -> Result<Vec<Vec<Complex64>>> {
        let h = sample_period_s / os as f64;
        let len = (duration_s / h).round() as usize;
        let samples: Vec<Complex64> = (0..len).map(|l| x((l as f64 + 0.5) * h)).collect();
        // A lag of the full duration is allowed and yields zero.
        let lags = lags_on_grid(delay_axis_s, h, len + 1)?;
        Ok(ambiguity_samples(
            &samples,
            h,
            0.5 * h,
            &lags,
            doppler_axis_hz,
        ))
    };
    let coarse = eval(os)?;
    let fine = eval(2 * os)?;
    Ok(coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| c.iter().zip(f).map(|(c, f)| (f * 4.0 - c) / 3.0).collect())
        .collect())
}

/// Delay step 1/f_s over ±(frame length − 1) samples.
pub fn default_delay_axis(cfg: &WaveformConfig) -> Vec<f64> {
    let l = cfg.frame_len() as i64;
    (-(l - 1)..l)
        .map(|d| d as f64 / cfg.sample_rate_hz())
        .collect()
}

/// 128 Doppler points spanning ±2/T_o in steps of 4/(128·T_o), zero included.
pub fn default_doppler_axis(cfg: &WaveformConfig) -> Vec<f64> {
    let step = 4.0 / (128.0 * cfg.symbol_duration_s());
    (-64..64).map(|k| k as f64 * step).collect()
}

/// Zero-Doppler delay width and zero-delay Doppler width of a continuous
/// signal on [0, duration), sampled at T_s/os (midpoint rule). The delay cut
/// spans ±`span_samples`·T_s; the Doppler cut uses `doppler_axis_hz`.
pub fn continuous_widths<F: Fn(f64) -> Complex64>(
    x: F,
    duration_s: f64,
    sample_period_s: f64,
    os: usize,
    span_samples: usize,
    doppler_axis_hz: &[f64],
) -> Result<(f64, f64)> {
    if os == 0 || !(duration_s > 0.0) {
        return Err(invalid("oversampling and duration must be positive"));
    }
    let h = sample_period_s / os as f64;
    let len = (duration_s / h).round() as usize;
    let samples: Vec<Complex64> = (0..len).map(|l| x((l as f64 + 0.5) * h)).collect();
    let span = (span_samples * os) as i64;
    let lags: Vec<i64> = (-span..=span).collect();
    let delay = ambiguity_samples(&samples, h, 0.5 * h, &lags, &[0.0]);
    let delay_axis: Vec<f64> = lags.iter().map(|&d| d as f64 * h).collect();
    let delay_mag: Vec<f64> = delay.iter().map(|row| row[0].norm()).collect();
    let doppler = ambiguity_samples(&samples, h, 0.5 * h, &[0], doppler_axis_hz);
    let doppler_mag: Vec<f64> = doppler[0].iter().map(|v| v.norm()).collect();
    Ok((
        cut_width(&delay_axis, &delay_mag)?,
        cut_width(doppler_axis_hz, &doppler_mag)?,
    ))
}

/// Half-power (−3 dB) full width of a cut, |χ|² interpolated linearly
/// between grid points on each side of the peak.
pub fn mainlobe_width(surface: &AmbiguitySurface, cut: Cut) -> Result<f64> {
    let (axis, mag) = surface.cut(cut)?;
    cut_width(&axis, &mag)
}

/// Half-power width of one cut (axis ascending).
pub fn cut_width(axis: &[f64], mag: &[f64]) -> Result<f64> {
    if axis.len() != mag.len() || axis.len() < 3 {
        return Err(invalid("cut needs at least three points matching its axis"));
    }
    let p: Vec<f64> = mag.iter().map(|v| v * v).collect();
    let (ip, peak) = p
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let half = 0.5 * peak;
    let crossing = |range: &mut dyn Iterator<Item = usize>, step: i64| -> Option<f64> {
        for i in range {
            let j = (i as i64 - step) as usize;
            if p[i] <= half {
                let frac = (p[j] - half) / (p[j] - p[i]);
                return Some(axis[j] + frac * (axis[i] - axis[j]));
            }
        }
        None
    };
    let right = crossing(&mut (ip + 1..p.len()), 1);
    let left = crossing(&mut (0..ip).rev(), -1);
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(invalid("mainlobe is wider than the cut axis")),
    }
}
