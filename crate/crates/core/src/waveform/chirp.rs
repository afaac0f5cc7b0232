use std::f64::consts::PI;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{TimeSignal, WaveformConfig, SYMBOLS_PER_SLOT};
use crate::error::{invalid, mismatch};
use crate::{Complex64, Result};

/// Time placement of the chirp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChirpMode {
    /// One chirp per OFDM symbol sweeping the band over the useful duration T.
    PerSymbol,
    /// One continuous chirp over all region symbols (CP included), T_c = m·T_o.
    PerSlot,
    /// Per-slot choice between a full-slot chirp, a single-symbol chirp or none.
    Hybrid,
}

/// Per-slot entry of a hybrid pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotChirp {
    Full,
    Single,
    Off,
}

/// Time-frequency rectangle carrying the chirp: subcarriers
/// `start_subcarrier..end_subcarrier`, symbols `start_symbol..start_symbol+n_symbols`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChirpRegion {
    pub start_subcarrier: usize,
    pub end_subcarrier: usize,
    pub start_symbol: usize,
    pub n_symbols: usize,
}

impl ChirpRegion {
    pub fn full(cfg: &WaveformConfig) -> Self {
        Self {
            start_subcarrier: 0,
            end_subcarrier: cfg.n_subcarriers(),
            start_symbol: 0,
            n_symbols: cfg.n_symbols(),
        }
    }

    pub fn symbols(&self) -> Range<usize> {
        self.start_symbol..self.start_symbol + self.n_symbols
    }

    pub fn subcarriers(&self) -> Range<usize> {
        self.start_subcarrier..self.end_subcarrier
    }

    pub fn width(&self) -> usize {
        self.end_subcarrier - self.start_subcarrier
    }
}

/// Comb resource-element pattern: subcarrier n of symbol m is selected when
/// `n % size == offsets[m % offsets.len()]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comb {
    pub size: usize,
    pub offsets: Vec<usize>,
}

impl Comb {
    pub fn new(size: usize, offsets: Vec<usize>) -> Result<Self> {
        if size == 0 || offsets.is_empty() || offsets.iter().any(|&o| o >= size) {
            return Err(invalid("comb needs size ≥ 1 and offsets below the size"));
        }
        Ok(Self { size, offsets })
    }

    /// Comb-4 with the staggered offsets 0, 2, 1, 3 used by positioning pilots.
    pub fn prs_comb4() -> Self {
        Self {
            size: 4,
            offsets: vec![0, 2, 1, 3],
        }
    }

    pub fn contains(&self, m: usize, n: usize) -> bool {
        n % self.size == self.offsets[m % self.offsets.len()]
    }

    pub fn density(&self) -> f64 {
        1.0 / self.size as f64
    }
}

/// One contiguous chirp in a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpSegment {
    /// First frame sample carrying the chirp.
    pub first_sample: usize,
    pub len: usize,
    /// Frame sample at which the chirp phase is zero.
    pub reference_sample: usize,
    pub rate_hz_per_s: f64,
    pub start_frequency_hz: f64,
    pub symbols: Range<usize>,
}

impl ChirpSegment {
    pub fn samples(&self) -> Range<usize> {
        self.first_sample..self.first_sample + self.len
    }

    /// Unit-amplitude chirp value at frame sample `l`.
    pub fn phasor(&self, l: usize, sample_period_s: f64) -> Complex64 {
        let t = (l as f64 - self.reference_sample as f64) * sample_period_s;
        Complex64::from_polar(
            1.0,
            PI * self.rate_hz_per_s * t * t + 2.0 * PI * self.start_frequency_hz * t,
        )
    }
}

/// Chirp amplitude, rate and time-frequency placement.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpPlan {
    n_symbols: usize,
    n_subcarriers: usize,
    amplitude: Vec<f64>,
    rate_hz_per_s: f64,
    mode: ChirpMode,
    region: ChirpRegion,
    comb: Option<Comb>,
    hybrid_pattern: Option<Vec<SlotChirp>>,
}

impl ChirpPlan {
    pub fn new(cfg: &WaveformConfig, mode: ChirpMode, region: ChirpRegion) -> Result<Self> {
        let (n, m) = (cfg.n_subcarriers(), cfg.n_symbols());
        if region.start_subcarrier >= region.end_subcarrier || region.end_subcarrier > n {
            return Err(invalid(format!(
                "chirp subcarriers {}..{} outside 0..{n}",
                region.start_subcarrier, region.end_subcarrier
            )));
        }
        if region.n_symbols == 0 || region.start_symbol + region.n_symbols > m {
            return Err(invalid(format!(
                "chirp symbols {}..{} outside 0..{m}",
                region.start_symbol,
                region.start_symbol + region.n_symbols
            )));
        }
        let hybrid_pattern = if mode == ChirpMode::Hybrid {
            if m % SYMBOLS_PER_SLOT != 0 {
                return Err(invalid(format!(
                    "hybrid placement needs whole slots, got {m} symbols"
                )));
            }
            if region.start_symbol != 0 || region.n_symbols != m {
                return Err(invalid(
                    "hybrid placement spans every symbol; the pattern selects slots",
                ));
            }
            Some(default_hybrid_pattern(m / SYMBOLS_PER_SLOT))
        } else {
            None
        };
        let mut plan = Self {
            n_symbols: m,
            n_subcarriers: n,
            amplitude: vec![1.0; m * n],
            rate_hz_per_s: 0.0,
            mode,
            region,
            comb: None,
            hybrid_pattern,
        };
        plan.rate_hz_per_s = plan.expected_rate(cfg);
        Ok(plan)
    }

    /// Full band over every symbol of the frame.
    pub fn full(cfg: &WaveformConfig, mode: ChirpMode) -> Result<Self> {
        Self::new(cfg, mode, ChirpRegion::full(cfg))
    }

    pub fn with_comb(mut self, comb: Comb) -> Result<Self> {
        if self.mode == ChirpMode::Hybrid {
            return Err(invalid("comb placement is not combined with hybrid slots"));
        }
        self.comb = Some(comb);
        Ok(self)
    }

    pub fn with_hybrid_pattern(mut self, pattern: Vec<SlotChirp>) -> Result<Self> {
        if self.mode != ChirpMode::Hybrid {
            return Err(invalid("hybrid pattern given for a non-hybrid plan"));
        }
        let slots = self.n_symbols / SYMBOLS_PER_SLOT;
        if pattern.len() != slots {
            return Err(mismatch(format!(
                "hybrid pattern has {} entries for {slots} slots",
                pattern.len()
            )));
        }
        self.hybrid_pattern = Some(pattern);
        Ok(self)
    }

    /// Replaces q_m(n) (row-major M×N, non-negative).
    pub fn with_amplitude(mut self, amplitude: Vec<f64>) -> Result<Self> {
        if amplitude.len() != self.amplitude.len() {
            return Err(mismatch(format!(
                "amplitude needs {} entries, got {}",
                self.amplitude.len(),
                amplitude.len()
            )));
        }
        if amplitude.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(invalid("chirp amplitudes must be finite and non-negative"));
        }
        self.amplitude = amplitude;
        Ok(self)
    }

    pub fn mode(&self) -> ChirpMode {
        self.mode
    }

    pub fn region(&self) -> &ChirpRegion {
        &self.region
    }

    pub fn comb(&self) -> Option<&Comb> {
        self.comb.as_ref()
    }

    pub fn hybrid_pattern(&self) -> Option<&[SlotChirp]> {
        self.hybrid_pattern.as_deref()
    }

    /// Stored chirp rate β. For hybrid plans this is the full-slot rate.
    pub fn rate_hz_per_s(&self) -> f64 {
        self.rate_hz_per_s
    }

    /// Swept bandwidth B_c = (n_j − n_i)·Δf.
    pub fn bandwidth_hz(&self, cfg: &WaveformConfig) -> f64 {
        self.region.width() as f64 * cfg.subcarrier_spacing_hz()
    }

    /// β recomputed from the numerology: B_c/T for a per-symbol chirp and
    /// B_c/(m·T_o) for a chirp spanning m symbols.
    pub fn expected_rate(&self, cfg: &WaveformConfig) -> f64 {
        match self.mode {
            ChirpMode::PerSymbol => self.symbol_rate(cfg),
            ChirpMode::PerSlot => self.span_rate(cfg, self.region.n_symbols),
            ChirpMode::Hybrid => self.span_rate(cfg, SYMBOLS_PER_SLOT),
        }
    }

    fn symbol_rate(&self, cfg: &WaveformConfig) -> f64 {
        self.bandwidth_hz(cfg) / cfg.useful_duration_s()
    }

    fn span_rate(&self, cfg: &WaveformConfig, symbols: usize) -> f64 {
        self.bandwidth_hz(cfg) / (symbols as f64 * cfg.symbol_duration_s())
    }

    pub fn amplitude(&self, m: usize, n: usize) -> f64 {
        self.amplitude[m * self.n_subcarriers + n]
    }

    /// Chirp amplitude of symbol m: mean of q_m(n) over the region subcarriers.
    pub fn symbol_amplitude(&self, m: usize) -> f64 {
        let row = &self.amplitude[m * self.n_subcarriers..(m + 1) * self.n_subcarriers];
        row[self.region.subcarriers()].iter().sum::<f64>() / self.region.width() as f64
    }

    pub fn check_dims(&self, cfg: &WaveformConfig) -> Result<()> {
        if cfg.n_symbols() != self.n_symbols || cfg.n_subcarriers() != self.n_subcarriers {
            return Err(mismatch(format!(
                "plan is {}x{}, configuration is {}x{}",
                self.n_symbols,
                self.n_subcarriers,
                cfg.n_symbols(),
                cfg.n_subcarriers()
            )));
        }
        Ok(())
    }

    /// Contiguous chirp pieces of the frame in time order.
    pub fn segments(&self, cfg: &WaveformConfig) -> Vec<ChirpSegment> {
        let sym_len = cfg.symbol_len();
        let f0 = self.region.start_subcarrier as f64 * cfg.subcarrier_spacing_hz();
        let per_symbol = |m: usize| ChirpSegment {
            first_sample: m * sym_len,
            len: sym_len,
            reference_sample: m * sym_len + cfg.cp_samples(),
            rate_hz_per_s: self.symbol_rate(cfg),
            start_frequency_hz: f0,
            symbols: m..m + 1,
        };
        let spanning = |symbols: Range<usize>| ChirpSegment {
            first_sample: symbols.start * sym_len,
            len: symbols.len() * sym_len,
            reference_sample: symbols.start * sym_len,
            rate_hz_per_s: self.span_rate(cfg, symbols.len()),
            start_frequency_hz: f0,
            symbols,
        };
        match self.mode {
            ChirpMode::PerSymbol => self.region.symbols().map(per_symbol).collect(),
            ChirpMode::PerSlot => vec![spanning(self.region.symbols())],
            ChirpMode::Hybrid => self
                .hybrid_pattern
                .as_deref()
                .unwrap_or_default()
                .iter()
                .enumerate()
                .filter_map(|(s, slot)| {
                    let first = s * SYMBOLS_PER_SLOT;
                    match slot {
                        SlotChirp::Full => Some(spanning(first..first + SYMBOLS_PER_SLOT)),
                        SlotChirp::Single => Some(per_symbol(first)),
                        SlotChirp::Off => None,
                    }
                })
                .collect(),
        }
    }

    /// Symbols that carry any chirp.
    pub fn chirped_symbols(&self, cfg: &WaveformConfig) -> Vec<bool> {
        let mut out = vec![false; self.n_symbols];
        for seg in self.segments(cfg) {
            seg.symbols.for_each(|m| out[m] = true);
        }
        out
    }

    /// Whether resource element (m, n) is multiplied by the chirp in CM
    /// (given that symbol m is chirped).
    pub fn covers_subcarrier(&self, m: usize, n: usize) -> bool {
        self.region.subcarriers().contains(&n)
            && self.comb.as_ref().map_or(true, |c| c.contains(m, n))
    }

    /// Whether every resource element of every chirped symbol is covered and
    /// every symbol is chirped.
    pub fn covers_everything(&self, cfg: &WaveformConfig) -> bool {
        self.comb.is_none()
            && self.region.width() == self.n_subcarriers
            && self.chirped_symbols(cfg).iter().all(|&c| c)
    }
}

fn default_hybrid_pattern(slots: usize) -> Vec<SlotChirp> {
    (0..slots)
        .map(|s| match s % 4 {
            0 => SlotChirp::Full,
            1 => SlotChirp::Single,
            _ => SlotChirp::Off,
        })
        .collect()
}

/// Frame-length chirp c(l) = q·exp(jπβ(T_s·l)² + j2π·f_0·T_s·l) over the plan's
/// time support (l counted from each segment's reference sample), zero elsewhere.
pub fn generate_chirp(plan: &ChirpPlan, cfg: &WaveformConfig) -> Result<TimeSignal> {
    plan.check_dims(cfg)?;
    let ts = cfg.sample_period_s();
    let sym_len = cfg.symbol_len();
    let mut out = TimeSignal::zeros(cfg.frame_len(), cfg.sample_rate_hz());
    for seg in plan.segments(cfg) {
        for l in seg.samples() {
            out.samples[l] = seg.phasor(l, ts) * plan.symbol_amplitude(l / sym_len);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_symbol_full_band_rate() {
        let cfg = WaveformConfig::nr_fr2(256, 1).unwrap();
        let plan = ChirpPlan::full(&cfg, ChirpMode::PerSymbol).unwrap();
        let expected = 256.0 * 120e3 / (1.0 / 120e3);
        assert!((plan.rate_hz_per_s() - 3.6864e12).abs() / 3.6864e12 < 1e-12);
        assert!((plan.rate_hz_per_s() - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn per_slot_spans_fourteen_symbol_durations() {
        let cfg = WaveformConfig::nr_fr2(256, 14).unwrap();
        let plan = ChirpPlan::full(&cfg, ChirpMode::PerSlot).unwrap();
        let seg = &plan.segments(&cfg)[0];
        let duration = seg.len as f64 / cfg.sample_rate_hz();
        assert!((duration - 14.0 * cfg.symbol_duration_s()).abs() < 1e-15);
        let sweep = plan.rate_hz_per_s() * 14.0 * cfg.symbol_duration_s();
        assert!((sweep - cfg.bandwidth_hz()).abs() / cfg.bandwidth_hz() < 1e-12);
    }

    #[test]
    fn stored_rate_matches_recomputation() {
        let cfg = WaveformConfig::nr_fr2(64, 28).unwrap();
        for mode in [ChirpMode::PerSymbol, ChirpMode::PerSlot, ChirpMode::Hybrid] {
            let plan = ChirpPlan::full(&cfg, mode).unwrap();
            let r = plan.expected_rate(&cfg);
            assert!((plan.rate_hz_per_s() - r).abs() <= 1e-9 * r.abs());
        }
    }

    #[test]
    fn chirp_is_unit_modulus_with_zero_phase_at_reference() {
        let cfg = WaveformConfig::nr_fr2(64, 3).unwrap();
        for mode in [ChirpMode::PerSymbol, ChirpMode::PerSlot] {
            let plan = ChirpPlan::full(&cfg, mode).unwrap();
            let c = generate_chirp(&plan, &cfg).unwrap();
            assert!(c.samples.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
            let reference = plan.segments(&cfg)[0].reference_sample;
            assert_eq!(c.samples[reference], Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn full_band_symbol_chirp_has_cyclic_prefix() {
        let cfg = WaveformConfig::nr_fr2(128, 2).unwrap();
        let plan = ChirpPlan::full(&cfg, ChirpMode::PerSymbol).unwrap();
        let c = generate_chirp(&plan, &cfg).unwrap().samples;
        let (n, cp) = (cfg.n_subcarriers(), cfg.cp_samples());
        for m in 0..2 {
            let base = m * cfg.symbol_len();
            for p in 0..cp {
                assert!((c[base + p] - c[base + p + n]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn per_slot_phase_is_continuous_across_cp_boundaries() {
        let cfg = WaveformConfig::nr_fr2(64, 14).unwrap();
        let plan = ChirpPlan::full(&cfg, ChirpMode::PerSlot).unwrap();
        let c = generate_chirp(&plan, &cfg).unwrap().samples;
        let ts = cfg.sample_period_s();
        let beta = plan.rate_hz_per_s();
        for l in 1..c.len() {
            // Phase increment equals the instantaneous frequency integrated over one sample.
            let dphi = (c[l] * c[l - 1].conj()).arg();
            let expected = PI * beta * ts * ts * (2.0 * l as f64 - 1.0);
            let wrapped = (expected + PI).rem_euclid(2.0 * PI) - PI;
            assert!((dphi - wrapped).abs() < 1e-9, "sample {l}");
        }
    }

    #[test]
    fn hybrid_default_pattern() {
        let cfg = WaveformConfig::nr_fr2(64, 8 * 14).unwrap();
        let plan = ChirpPlan::full(&cfg, ChirpMode::Hybrid).unwrap();
        let pattern = plan.hybrid_pattern().unwrap();
        assert_eq!(pattern[0], SlotChirp::Full);
        assert_eq!(pattern[4], SlotChirp::Full);
        assert_eq!(pattern[1], SlotChirp::Single);
        assert_eq!(pattern[5], SlotChirp::Single);
        assert!(pattern
            .iter()
            .enumerate()
            .all(|(s, p)| [0, 1, 4, 5].contains(&s) || *p == SlotChirp::Off));
        let segs = plan.segments(&cfg);
        assert_eq!(segs.len(), 4);
        assert_eq!(segs[0].symbols, 0..14);
        assert_eq!(segs[1].symbols, 14..15);
    }

    #[test]
    fn region_out_of_bounds_rejected() {
        let cfg = WaveformConfig::nr_fr2(64, 4).unwrap();
        let bad_band = ChirpRegion {
            start_subcarrier: 10,
            end_subcarrier: 65,
            start_symbol: 0,
            n_symbols: 1,
        };
        assert!(ChirpPlan::new(&cfg, ChirpMode::PerSymbol, bad_band).is_err());
        let bad_time = ChirpRegion {
            start_subcarrier: 0,
            end_subcarrier: 64,
            start_symbol: 3,
            n_symbols: 2,
        };
        assert!(ChirpPlan::new(&cfg, ChirpMode::PerSlot, bad_time).is_err());
        assert!(ChirpPlan::full(&cfg, ChirpMode::Hybrid).is_err());
    }

    #[test]
    fn symbol_amplitude_is_region_mean() {
        let cfg = WaveformConfig::nr_fr2(8, 1).unwrap();
        let region = ChirpRegion {
            start_subcarrier: 2,
            end_subcarrier: 6,
            start_symbol: 0,
            n_symbols: 1,
        };
        let amp = vec![9.0, 9.0, 1.0, 2.0, 3.0, 4.0, 9.0, 9.0];
        let plan = ChirpPlan::new(&cfg, ChirpMode::PerSymbol, region)
            .unwrap()
            .with_amplitude(amp)
            .unwrap();
        assert_eq!(plan.symbol_amplitude(0), 2.5);
    }
}
