//! OFDM numerology, resource grids, chirp placement and the composite
//! AAC/CM transmit signals.

mod chirp;
mod compose;
mod grid;
mod papr;

pub use chirp::{generate_chirp, ChirpMode, ChirpPlan, ChirpRegion, ChirpSegment, Comb, SlotChirp};
pub use compose::{build_frame, compose_aac, compose_cm, ofdm_modulate, ofdm_symbol};
pub use grid::{qpsk_demap, qpsk_map, ResourceGrid};
pub use papr::{alpha_threshold, papr_bound, papr_db, papr_per_symbol_db, peak_and_correlation};

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::{Complex64, Result, SPEED_OF_LIGHT};

/// Symbols per NR slot.
pub const SYMBOLS_PER_SLOT: usize = 14;

/// Cyclic prefix duration of the reference numerology (seconds).
pub const NR_CP_DURATION_S: f64 = 0.57e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    #[default]
    Qpsk,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
        }
    }
}

/// Transmit scheme used to build a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Ofdm,
    Aac,
    Cm,
}

/// Radio numerology: one validated record for N, Δf, CP, M, f_c, α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWaveformConfig", into = "RawWaveformConfig")]
pub struct WaveformConfig {
    n_subcarriers: usize,
    subcarrier_spacing_hz: f64,
    cp_samples: usize,
    n_symbols: usize,
    carrier_hz: f64,
    alpha: f64,
    modulation: Modulation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawWaveformConfig {
    n_subcarriers: usize,
    subcarrier_spacing_hz: f64,
    cp_samples: usize,
    n_symbols: usize,
    carrier_hz: f64,
    alpha: f64,
    #[serde(default)]
    modulation: Modulation,
}

impl TryFrom<RawWaveformConfig> for WaveformConfig {
    type Error = crate::Error;

    fn try_from(r: RawWaveformConfig) -> Result<Self> {
        WaveformConfig::new(
            r.n_subcarriers,
            r.subcarrier_spacing_hz,
            r.cp_samples,
            r.n_symbols,
            r.carrier_hz,
            r.alpha,
        )
    }
}

impl From<WaveformConfig> for RawWaveformConfig {
    fn from(c: WaveformConfig) -> Self {
        RawWaveformConfig {
            n_subcarriers: c.n_subcarriers,
            subcarrier_spacing_hz: c.subcarrier_spacing_hz,
            cp_samples: c.cp_samples,
            n_symbols: c.n_symbols,
            carrier_hz: c.carrier_hz,
            alpha: c.alpha,
            modulation: c.modulation,
        }
    }
}

impl WaveformConfig {
    pub fn new(
        n_subcarriers: usize,
        subcarrier_spacing_hz: f64,
        cp_samples: usize,
        n_symbols: usize,
        carrier_hz: f64,
        alpha: f64,
    ) -> Result<Self> {
        if n_subcarriers == 0 {
            return Err(invalid("n_subcarriers must be positive"));
        }
        if !(subcarrier_spacing_hz.is_finite() && subcarrier_spacing_hz > 0.0) {
            return Err(invalid("subcarrier_spacing_hz must be positive and finite"));
        }
        if n_symbols == 0 {
            return Err(invalid("n_symbols must be positive"));
        }
        if cp_samples >= n_subcarriers {
            return Err(invalid("cp_samples must be shorter than the useful symbol"));
        }
        if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
            return Err(invalid("carrier_hz must be positive and finite"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(invalid(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        Ok(Self {
            n_subcarriers,
            subcarrier_spacing_hz,
            cp_samples,
            n_symbols,
            carrier_hz,
            alpha,
            modulation: Modulation::Qpsk,
        })
    }

    /// FR2 reference numerology: Δf = 120 kHz, f_c = 24 GHz, α = 0.5 and a
    /// CP of round(N·0.57 µs·Δf) samples.
    pub fn nr_fr2(n_subcarriers: usize, n_symbols: usize) -> Result<Self> {
        let spacing = 120e3;
        Self::new(
            n_subcarriers,
            spacing,
            default_cp_samples(n_subcarriers, spacing),
            n_symbols,
            24e9,
            0.5,
        )
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(
            self.n_subcarriers,
            self.subcarrier_spacing_hz,
            self.cp_samples,
            self.n_symbols,
            self.carrier_hz,
            alpha,
        )
    }

    pub fn with_symbols(&self, n_symbols: usize) -> Result<Self> {
        Self::new(
            self.n_subcarriers,
            self.subcarrier_spacing_hz,
            self.cp_samples,
            n_symbols,
            self.carrier_hz,
            self.alpha,
        )
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }
    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.subcarrier_spacing_hz
    }
    pub fn cp_samples(&self) -> usize {
        self.cp_samples
    }
    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }
    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.n_subcarriers as f64 * self.subcarrier_spacing_hz
    }
    pub fn sample_period_s(&self) -> f64 {
        1.0 / self.sample_rate_hz()
    }
    /// Useful symbol duration T = 1/Δf.
    pub fn useful_duration_s(&self) -> f64 {
        1.0 / self.subcarrier_spacing_hz
    }
    pub fn cp_duration_s(&self) -> f64 {
        self.cp_samples as f64 / self.sample_rate_hz()
    }
    /// Total symbol duration T_o = T + T_CP.
    pub fn symbol_duration_s(&self) -> f64 {
        self.useful_duration_s() + self.cp_duration_s()
    }
    /// Samples per symbol including the CP.
    pub fn symbol_len(&self) -> usize {
        self.n_subcarriers + self.cp_samples
    }
    pub fn frame_len(&self) -> usize {
        self.n_symbols * self.symbol_len()
    }
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }
    pub fn bandwidth_hz(&self) -> f64 {
        self.sample_rate_hz()
    }
    /// Sample range of the useful (CP-free) part of symbol `m`.
    pub fn useful_range(&self, m: usize) -> std::ops::Range<usize> {
        let start = m * self.symbol_len() + self.cp_samples;
        start..start + self.n_subcarriers
    }
}

/// Nearest-integer CP length for the 0.57 µs reference CP.
pub fn default_cp_samples(n_subcarriers: usize, subcarrier_spacing_hz: f64) -> usize {
    (n_subcarriers as f64 * NR_CP_DURATION_S * subcarrier_spacing_hz).round() as usize
}

/// Discrete-time baseband signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
    /// Time of sample 0 in seconds.
    pub t0_s: f64,
}

impl TimeSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Self {
        Self {
            samples,
            sample_rate_hz,
            t0_s: 0.0,
        }
    }

    pub fn zeros(len: usize, sample_rate_hz: f64) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); len], sample_rate_hz)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Time of sample `l`.
    pub fn time_of(&self, l: usize) -> f64 {
        self.t0_s + l as f64 / self.sample_rate_hz
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_numerology_durations() {
        let cfg = WaveformConfig::nr_fr2(1024, 14).unwrap();
        assert_eq!(cfg.sample_rate_hz(), 122.88e6);
        assert!((cfg.useful_duration_s() - 8.333e-6).abs() < 1e-9);
        assert_eq!(cfg.cp_samples(), 70);
        assert!((cfg.cp_duration_s() - 0.57e-6).abs() < 0.005e-6);
        assert_eq!(cfg.frame_len(), 14 * 1094);
    }

    #[test]
    fn cp_defaults_for_smaller_grids() {
        assert_eq!(default_cp_samples(256, 120e3), 18);
        assert_eq!(default_cp_samples(128, 120e3), 9);
        assert_eq!(default_cp_samples(32, 120e3), 2);
    }

    #[test]
    fn rejects_bad_alpha_and_sizes() {
        assert!(WaveformConfig::new(64, 120e3, 4, 1, 24e9, 1.5).is_err());
        assert!(WaveformConfig::new(64, 120e3, 4, 1, 24e9, -0.1).is_err());
        assert!(WaveformConfig::new(0, 120e3, 0, 1, 24e9, 0.5).is_err());
        assert!(WaveformConfig::new(64, 120e3, 64, 1, 24e9, 0.5).is_err());
        assert!(WaveformConfig::new(64, 0.0, 4, 1, 24e9, 0.5).is_err());
    }
}
