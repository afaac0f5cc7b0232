//! JSON experiment configuration: parsing, per-experiment defaults and
//! validation. Every diagnostic carries the line and column of the offending
//! key so a bad file can be fixed without guessing.

use std::path::{Path, PathBuf};

use isac_core::channel::PathTap;
use isac_core::sensing::ReceiverOptions;
use isac_core::waveform::{default_cp_samples, ChirpMode, Comb, Scheme, WaveformConfig};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    PaprCcdf,
    Ber,
    SpectralEfficiency,
    RmseRange,
    RmseVelocity,
    Ambiguity,
    Limits,
    Complexity,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::PaprCcdf,
        Experiment::Ber,
        Experiment::SpectralEfficiency,
        Experiment::RmseRange,
        Experiment::RmseVelocity,
        Experiment::Ambiguity,
        Experiment::Limits,
        Experiment::Complexity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::PaprCcdf => "papr_ccdf",
            Experiment::Ber => "ber",
            Experiment::SpectralEfficiency => "spectral_efficiency",
            Experiment::RmseRange => "rmse_range",
            Experiment::RmseVelocity => "rmse_velocity",
            Experiment::Ambiguity => "ambiguity",
            Experiment::Limits => "limits",
            Experiment::Complexity => "complexity",
        }
    }

    fn is_comms(self) -> bool {
        matches!(self, Experiment::Ber | Experiment::SpectralEfficiency)
    }

    fn is_sensing(self) -> bool {
        matches!(self, Experiment::RmseRange | Experiment::RmseVelocity)
    }

    /// Top-level keys this experiment reads besides `experiment`.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Experiment::PaprCcdf => &[
                "waveform",
                "schemes",
                "alphas",
                "placements",
                "trials",
                "seed",
                "papr",
            ],
            Experiment::Ber | Experiment::SpectralEfficiency => &[
                "waveform",
                "channel",
                "schemes",
                "alphas",
                "placements",
                "ebn0_grid_db",
                "trials",
                "seed",
                "pilots",
            ],
            Experiment::RmseRange | Experiment::RmseVelocity => &[
                "waveform",
                "channel",
                "schemes",
                "alphas",
                "placements",
                "snr_grid_db",
                "trials",
                "seed",
                "pilots",
                "receiver",
            ],
            Experiment::Ambiguity => &[
                "waveform",
                "schemes",
                "alphas",
                "placements",
                "seed",
                "ambiguity",
            ],
            Experiment::Limits => &["waveform", "blocks"],
            Experiment::Complexity => &["sizes"],
        }
    }
}

/// Transmit/receive variant. `*_pilot` variants reserve comb pilots: the
/// sensing receiver knows only those, the link loses them as payload.
/// `ofdm` and `cm` sensing use the whole transmitted grid as reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Ofdm,
    OfdmPilot,
    Cm,
    CmPilot,
    Aac,
    Chirp,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Ofdm => "ofdm",
            Variant::OfdmPilot => "ofdm_pilot",
            Variant::Cm => "cm",
            Variant::CmPilot => "cm_pilot",
            Variant::Aac => "aac",
            Variant::Chirp => "chirp",
        }
    }

    /// Frame builder scheme; a bare chirp is AAC at α = 1.
    pub fn scheme(self) -> Scheme {
        match self {
            Variant::Ofdm | Variant::OfdmPilot => Scheme::Ofdm,
            Variant::Cm | Variant::CmPilot => Scheme::Cm,
            Variant::Aac | Variant::Chirp => Scheme::Aac,
        }
    }

    pub fn has_pilots(self) -> bool {
        matches!(self, Variant::OfdmPilot | Variant::CmPilot)
    }

    /// α values this variant runs at: the configured list for AAC, a single
    /// fixed value otherwise.
    pub fn alphas(self, alphas: &[f64]) -> Vec<f64> {
        match self {
            Variant::Aac => alphas.to_vec(),
            Variant::Chirp => vec![1.0],
            _ => vec![0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Symbol,
    Slot,
    Hybrid,
}

impl Placement {
    pub fn label(self) -> &'static str {
        match self {
            Placement::Symbol => "symbol",
            Placement::Slot => "slot",
            Placement::Hybrid => "hybrid",
        }
    }

    pub fn mode(self) -> ChirpMode {
        match self {
            Placement::Symbol => ChirpMode::PerSymbol,
            Placement::Slot => ChirpMode::PerSlot,
            Placement::Hybrid => ChirpMode::Hybrid,
        }
    }
}

/// Numerology with optional fields; missing ones take the FR2 reference
/// values (Δf = 120 kHz, f_c = 24 GHz, α = 0.5, CP = round(N·0.57 µs·Δf)).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformSpec {
    pub n_subcarriers: Option<usize>,
    pub n_symbols: Option<usize>,
    pub subcarrier_spacing_hz: Option<f64>,
    pub cp_samples: Option<usize>,
    pub carrier_hz: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// One monostatic reflector at `range_m`, `velocity_mps`.
    PointTarget,
    /// Reference five-tap profile, tap phases drawn per trial.
    ReferenceMultipath,
    /// Explicit tap list.
    Taps,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub profile: Profile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity_mps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taps: Option<Vec<PathTap>>,
    #[serde(default)]
    pub cfo_hz: f64,
    #[serde(default)]
    pub timing_drift_s: f64,
}

impl ChannelSpec {
    pub fn point_target(range_m: f64, velocity_mps: f64) -> Self {
        Self {
            profile: Profile::PointTarget,
            range_m: Some(range_m),
            velocity_mps: Some(velocity_mps),
            taps: None,
            cfo_hz: 0.0,
            timing_drift_s: 0.0,
        }
    }

    fn reference_multipath() -> Self {
        Self {
            profile: Profile::ReferenceMultipath,
            range_m: None,
            velocity_mps: None,
            taps: None,
            cfo_hz: 0.0,
            timing_drift_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaprSpec {
    /// Threshold spacing of the CCDF curve.
    #[serde(default = "default_step_db")]
    pub step_db: f64,
    /// Curve runs from 0 dB to this threshold.
    #[serde(default = "default_max_db")]
    pub max_db: f64,
    /// Probabilities at which the PAPR level is tabulated.
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
}

fn default_step_db() -> f64 {
    0.05
}

fn default_max_db() -> f64 {
    14.0
}

fn default_levels() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3]
}

impl Default for PaprSpec {
    fn default() -> Self {
        Self {
            step_db: default_step_db(),
            max_db: default_max_db(),
            levels: default_levels(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbiguitySpec {
    /// Oversampling of the continuous-time model for mainlobe widths.
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    /// Points of the zero-delay cut used for the Doppler width.
    #[serde(default = "default_width_points")]
    pub doppler_width_points: usize,
}

fn default_oversample() -> usize {
    32
}

fn default_width_points() -> usize {
    513
}

impl Default for AmbiguitySpec {
    fn default() -> Self {
        Self {
            oversample: default_oversample(),
            doppler_width_points: default_width_points(),
        }
    }
}

/// Sensing block: n subcarriers by m symbols.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub name: String,
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Size {
    pub n: usize,
    pub m: usize,
}

/// File contents as written; absent keys fall back to experiment defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub waveform: Option<WaveformSpec>,
    pub channel: Option<ChannelSpec>,
    pub schemes: Option<Vec<Variant>>,
    pub alphas: Option<Vec<f64>>,
    pub placements: Option<Vec<Placement>>,
    pub snr_grid_db: Option<Vec<f64>>,
    pub ebn0_grid_db: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub pilots: Option<Comb>,
    pub receiver: Option<ReceiverOptions>,
    pub papr: Option<PaprSpec>,
    pub ambiguity: Option<AmbiguitySpec>,
    pub blocks: Option<Vec<Block>>,
    pub sizes: Option<Vec<Size>>,
}

/// Fully resolved parameters of one run. Only the fields the experiment
/// reads are populated; the manifest records exactly these.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub experiment: Experiment,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waveform: Option<WaveformConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub schemes: Vec<Variant>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub placements: Vec<Placement>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub snr_grid_db: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ebn0_grid_db: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pilots: Option<Comb>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub receiver: Option<ReceiverOptions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub papr: Option<PaprSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ambiguity: Option<AmbiguitySpec>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<Block>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<Size>,
}

impl Resolved {
    /// Numerology; present for every experiment except `complexity`.
    pub fn waveform(&self) -> &WaveformConfig {
        self.waveform
            .as_ref()
            .expect("experiment has no waveform section")
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(1)
    }

    pub fn channel(&self) -> &ChannelSpec {
        self.channel
            .as_ref()
            .expect("experiment has no channel section")
    }

    pub fn pilots(&self) -> &Comb {
        self.pilots
            .as_ref()
            .expect("experiment has no pilot section")
    }

    pub fn receiver(&self) -> ReceiverOptions {
        self.receiver.unwrap_or_default()
    }
}

/// Overrides from the command line, applied after parsing.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

/// Source text plus path, used to anchor diagnostics.
struct Source<'a> {
    path: &'a Path,
    text: &'a str,
}

impl Source<'_> {
    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> CliError {
        CliError::Config {
            path: self.path.to_path_buf(),
            line,
            column,
            message: message.into(),
        }
    }

    /// Diagnostic at the first occurrence of `"key":`, or line 1.
    fn at(&self, key: &str, message: impl Into<String>) -> CliError {
        let (line, column) = locate_key(self.text, key).unwrap_or((1, 1));
        self.error(line, column, message)
    }
}

/// 1-based (line, column) of the first `"key"` followed by a colon.
pub fn locate_key(text: &str, key: &str) -> Option<(usize, usize)> {
    let needle = format!("\"{key}\"");
    let mut from = 0;
    while let Some(i) = text[from..].find(&needle) {
        let start = from + i;
        let rest = text[start + needle.len()..].trim_start();
        if rest.starts_with(':') {
            let line = text[..start].matches('\n').count() + 1;
            let column = start - text[..start].rfind('\n').map_or(0, |p| p + 1) + 1;
            return Some((line, column));
        }
        from = start + needle.len();
    }
    None
}

pub fn load(path: &Path, experiment: Experiment, overrides: Overrides) -> Result<Resolved> {
    let text =
        std::fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))?;
    parse(&text, path, experiment, overrides)
}

/// Parses and resolves `text`; `path` only labels diagnostics.
pub fn parse(
    text: &str,
    path: &Path,
    experiment: Experiment,
    overrides: Overrides,
) -> Result<Resolved> {
    let src = Source { path, text };
    let raw: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
        let message = strip_position(&e.to_string());
        src.error(e.line().max(1), e.column().max(1), message)
    })?;
    resolve(raw, &src, experiment, overrides)
}

/// serde_json appends " at line L column C"; the position is reported
/// separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn present_keys(raw: &ExperimentConfig) -> Vec<&'static str> {
    let flags = [
        ("waveform", raw.waveform.is_some()),
        ("channel", raw.channel.is_some()),
        ("schemes", raw.schemes.is_some()),
        ("alphas", raw.alphas.is_some()),
        ("placements", raw.placements.is_some()),
        ("snr_grid_db", raw.snr_grid_db.is_some()),
        ("ebn0_grid_db", raw.ebn0_grid_db.is_some()),
        ("trials", raw.trials.is_some()),
        ("seed", raw.seed.is_some()),
        ("pilots", raw.pilots.is_some()),
        ("receiver", raw.receiver.is_some()),
        ("papr", raw.papr.is_some()),
        ("ambiguity", raw.ambiguity.is_some()),
        ("blocks", raw.blocks.is_some()),
        ("sizes", raw.sizes.is_some()),
    ];
    flags.iter().filter(|(_, p)| *p).map(|(k, _)| *k).collect()
}

fn grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step).round() as usize;
    (0..=n).map(|i| from + i as f64 * step).collect()
}

fn resolve(
    raw: ExperimentConfig,
    src: &Source,
    experiment: Experiment,
    overrides: Overrides,
) -> Result<Resolved> {
    if let Some(e) = raw.experiment {
        if e != experiment {
            return Err(src.at(
                "experiment",
                format!(
                    "config is for experiment `{}` but `{}` was requested",
                    e.name(),
                    experiment.name()
                ),
            ));
        }
    }
    for key in present_keys(&raw) {
        if !experiment.keys().contains(&key) {
            return Err(src.at(
                key,
                format!("`{key}` is not used by experiment `{}`", experiment.name()),
            ));
        }
    }

    let uses = |k: &str| experiment.keys().contains(&k);
    let seed = overrides.seed.or(raw.seed).unwrap_or(1);

    let trials = if uses("trials") {
        let default = match experiment {
            Experiment::PaprCcdf => 100_000,
            Experiment::Ber => 60,
            Experiment::SpectralEfficiency => 40,
            _ => 200,
        };
        let t = overrides.trials.or(raw.trials).unwrap_or(default);
        if t == 0 {
            return Err(src.at("trials", "trials must be at least 1"));
        }
        Some(t)
    } else {
        None
    };

    let waveform = if uses("waveform") {
        let (n_default, m_default) = match experiment {
            Experiment::PaprCcdf | Experiment::Limits => (256, 14),
            Experiment::Ambiguity => (128, 1),
            _ => (1024, 14),
        };
        let w = raw.waveform.clone().unwrap_or_default();
        let n = w.n_subcarriers.unwrap_or(n_default);
        let spacing = w.subcarrier_spacing_hz.unwrap_or(120e3);
        let cp = match w.cp_samples {
            Some(cp) => cp,
            None if n > 0 && spacing.is_finite() && spacing > 0.0 => default_cp_samples(n, spacing),
            None => 0,
        };
        let cfg = WaveformConfig::new(
            n,
            spacing,
            cp,
            w.n_symbols.unwrap_or(m_default),
            w.carrier_hz.unwrap_or(24e9),
            w.alpha.unwrap_or(0.5),
        )
        .map_err(|e| src.at("waveform", e.to_string()))?;
        Some(cfg)
    } else {
        None
    };

    let schemes = if uses("schemes") {
        let default: &[Variant] = match experiment {
            Experiment::PaprCcdf | Experiment::Ber | Experiment::Ambiguity => {
                &[Variant::Ofdm, Variant::Cm, Variant::Aac]
            }
            Experiment::SpectralEfficiency => &[Variant::OfdmPilot, Variant::CmPilot, Variant::Aac],
            Experiment::RmseRange => &[Variant::Ofdm, Variant::Cm, Variant::Aac, Variant::Chirp],
            _ => &[Variant::Chirp, Variant::Aac, Variant::Ofdm, Variant::Cm],
        };
        let s = raw.schemes.clone().unwrap_or_else(|| default.to_vec());
        if s.is_empty() {
            return Err(src.at("schemes", "schemes must not be empty"));
        }
        for v in &s {
            if experiment.is_comms() && *v == Variant::Chirp {
                return Err(src.at(
                    "schemes",
                    "`chirp` carries no data and has no link to simulate",
                ));
            }
            if matches!(experiment, Experiment::Ambiguity | Experiment::PaprCcdf) && v.has_pilots()
            {
                return Err(src.at("schemes", "pilot variants share the transmit signal of their base scheme; list `ofdm` or `cm`"));
            }
        }
        s
    } else {
        Vec::new()
    };

    let alphas = if uses("alphas") {
        let default: &[f64] = match experiment {
            Experiment::PaprCcdf | Experiment::Ber | Experiment::SpectralEfficiency => {
                &[0.1, 0.3, 0.5]
            }
            _ => &[0.5],
        };
        let a = raw.alphas.clone().unwrap_or_else(|| default.to_vec());
        if a.is_empty() {
            return Err(src.at("alphas", "alphas must not be empty"));
        }
        if let Some(bad) = a.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(src.at("alphas", format!("alpha {bad} outside [0, 1]")));
        }
        if experiment.is_comms() && a.iter().any(|&a| a >= 1.0) && schemes.contains(&Variant::Aac) {
            return Err(src.at(
                "alphas",
                "the link cannot remove the chirp at alpha = 1 (no data component)",
            ));
        }
        a
    } else {
        Vec::new()
    };

    let placements = if uses("placements") {
        let default: &[Placement] = if experiment == Experiment::RmseRange {
            &[Placement::Symbol, Placement::Slot]
        } else {
            &[Placement::Symbol]
        };
        let p = raw.placements.clone().unwrap_or_else(|| default.to_vec());
        if p.is_empty() {
            return Err(src.at("placements", "placements must not be empty"));
        }
        if (experiment.is_sensing() || experiment == Experiment::Ambiguity)
            && p.contains(&Placement::Hybrid)
        {
            return Err(src.at(
                "placements",
                "hybrid placement is only simulated by papr_ccdf, ber and spectral_efficiency",
            ));
        }
        if p.contains(&Placement::Hybrid)
            && waveform.as_ref().is_some_and(|w| w.n_symbols() % 14 != 0)
        {
            return Err(src.at(
                "placements",
                "hybrid placement needs n_symbols to be a multiple of 14",
            ));
        }
        p
    } else {
        Vec::new()
    };

    let check_grid = |key: &str, g: &[f64]| -> Result<()> {
        if g.is_empty() {
            return Err(src.at(key, format!("{key} must not be empty")));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(src.at(key, format!("{key} entries must be finite")));
        }
        Ok(())
    };
    let snr_grid_db = if uses("snr_grid_db") {
        let default = match experiment {
            Experiment::RmseRange => grid(-30.0, 0.0, 5.0),
            _ => grid(-20.0, 10.0, 5.0),
        };
        let g = raw.snr_grid_db.clone().unwrap_or(default);
        check_grid("snr_grid_db", &g)?;
        g
    } else {
        Vec::new()
    };
    let ebn0_grid_db = if uses("ebn0_grid_db") {
        let top = if experiment == Experiment::SpectralEfficiency {
            20.0
        } else {
            12.0
        };
        let g = raw
            .ebn0_grid_db
            .clone()
            .unwrap_or_else(|| grid(0.0, top, 2.0));
        check_grid("ebn0_grid_db", &g)?;
        g
    } else {
        Vec::new()
    };

    let channel = if uses("channel") {
        let default = if experiment.is_comms() {
            ChannelSpec::reference_multipath()
        } else {
            ChannelSpec::point_target(50.0, 30.0)
        };
        let mut c = raw.channel.clone().unwrap_or(default);
        match c.profile {
            Profile::PointTarget => {
                c.range_m.get_or_insert(50.0);
                c.velocity_mps.get_or_insert(30.0);
                if c.taps.is_some() {
                    return Err(src.at("taps", "`taps` requires profile \"taps\""));
                }
                if !(c.range_m.unwrap() >= 0.0 && c.range_m.unwrap().is_finite()) {
                    return Err(src.at("range_m", "range_m must be finite and non-negative"));
                }
                if !c.velocity_mps.unwrap().is_finite() {
                    return Err(src.at("velocity_mps", "velocity_mps must be finite"));
                }
            }
            Profile::ReferenceMultipath | Profile::Taps => {
                if c.range_m.is_some() || c.velocity_mps.is_some() {
                    return Err(src.at(
                        "profile",
                        "range_m/velocity_mps apply to profile \"point_target\" only",
                    ));
                }
                if c.profile == Profile::Taps && c.taps.as_ref().map_or(true, |t| t.is_empty()) {
                    return Err(src.at("profile", "profile \"taps\" needs a nonempty `taps` list"));
                }
                if c.profile == Profile::ReferenceMultipath && c.taps.is_some() {
                    return Err(src.at("taps", "`taps` requires profile \"taps\""));
                }
            }
        }
        if experiment.is_comms() {
            if c.profile == Profile::PointTarget {
                return Err(src.at(
                    "profile",
                    "link experiments use profile \"reference_multipath\" or \"taps\"",
                ));
            }
            if c.cfo_hz != 0.0 || c.timing_drift_s != 0.0 {
                return Err(src.at("channel", "the link receiver has genie synchronization; cfo_hz and timing_drift_s must be 0"));
            }
            if c.taps.iter().flatten().any(|t| t.doppler_hz != 0.0) {
                return Err(src.at(
                    "taps",
                    "the genie equalizer models static taps; doppler_hz must be 0",
                ));
            }
        }
        if !(c.cfo_hz.is_finite() && c.timing_drift_s.is_finite()) {
            return Err(src.at("channel", "cfo_hz and timing_drift_s must be finite"));
        }
        if let Some(cfg) = &waveform {
            let len = cfg.frame_len() as f64;
            let delays: Vec<f64> = match c.profile {
                Profile::PointTarget => vec![
                    2.0 * c.range_m.unwrap() / isac_core::SPEED_OF_LIGHT * cfg.sample_rate_hz(),
                ],
                Profile::ReferenceMultipath => vec![8.0],
                Profile::Taps => c.taps.iter().flatten().map(|t| t.delay_samples).collect(),
            };
            if let Some(d) = delays.iter().find(|d| !(**d >= 0.0 && **d < len)) {
                return Err(src.at(
                    "channel",
                    format!("path delay of {d} samples outside the {len}-sample frame"),
                ));
            }
            if experiment.is_comms() && delays.iter().any(|&d| d > cfg.cp_samples() as f64) {
                return Err(src.at(
                    "channel",
                    "path delays must not exceed the cyclic prefix for one-tap equalization",
                ));
            }
        }
        Some(c)
    } else {
        None
    };

    let pilots = if uses("pilots") {
        let comb = raw.pilots.clone().unwrap_or_else(Comb::prs_comb4);
        Some(Comb::new(comb.size, comb.offsets).map_err(|e| src.at("pilots", e.to_string()))?)
    } else {
        None
    };

    let receiver = if uses("receiver") {
        Some(raw.receiver.unwrap_or_default())
    } else {
        None
    };

    let papr = if uses("papr") {
        let p = raw.papr.clone().unwrap_or_default();
        if !(p.step_db > 0.0 && p.max_db > 0.0 && p.max_db / p.step_db <= 1e6) {
            return Err(src.at(
                "papr",
                "step_db and max_db must be positive with at most 1e6 curve points",
            ));
        }
        if p.levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return Err(src.at("levels", "CCDF levels must lie in (0, 1)"));
        }
        Some(p)
    } else {
        None
    };

    let ambiguity = if uses("ambiguity") {
        let a = raw.ambiguity.clone().unwrap_or_default();
        if a.oversample == 0 || a.oversample > 256 {
            return Err(src.at("oversample", "oversample must lie in 1..=256"));
        }
        if a.doppler_width_points < 3 {
            return Err(src.at(
                "doppler_width_points",
                "doppler_width_points must be at least 3",
            ));
        }
        Some(a)
    } else {
        None
    };

    let blocks = if uses("blocks") {
        let b = raw.blocks.clone().unwrap_or_else(|| {
            [("A", 256, 1), ("B", 2, 14), ("C", 64, 7), ("D", 2, 2)]
                .iter()
                .map(|&(name, n, m)| Block {
                    name: name.into(),
                    n,
                    m,
                })
                .collect()
        });
        if b.is_empty() {
            return Err(src.at("blocks", "blocks must not be empty"));
        }
        let cfg = waveform.as_ref().expect("limits has a waveform");
        for block in &b {
            isac_core::sensing::sensing_limits(block.n, block.m, cfg)
                .map_err(|e| src.at("blocks", format!("block {}: {e}", block.name)))?;
        }
        b
    } else {
        Vec::new()
    };

    let sizes = if uses("sizes") {
        let s = raw
            .sizes
            .clone()
            .unwrap_or_else(|| vec![Size { n: 1024, m: 14 }]);
        if s.is_empty() {
            return Err(src.at("sizes", "sizes must not be empty"));
        }
        for size in &s {
            isac_core::sensing::complexity_counts(
                size.n,
                size.m,
                isac_core::sensing::ComplexityScheme::Aac,
            )
            .map_err(|e| src.at("sizes", format!("size {}x{}: {e}", size.n, size.m)))?;
        }
        s
    } else {
        Vec::new()
    };

    Ok(Resolved {
        experiment,
        seed,
        trials,
        waveform,
        channel,
        schemes,
        alphas,
        placements,
        snr_grid_db,
        ebn0_grid_db,
        pilots,
        receiver,
        papr,
        ambiguity,
        blocks,
        sizes,
    })
}

/// Resolved defaults for `experiment` with no config file.
pub fn defaults(experiment: Experiment) -> Resolved {
    let src = Source {
        path: &PathBuf::from("<defaults>"),
        text: "{}",
    };
    resolve(
        ExperimentConfig::default(),
        &src,
        experiment,
        Overrides::default(),
    )
    .expect("defaults are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_str(text: &str, e: Experiment) -> Result<Resolved> {
        parse(text, Path::new("cfg.json"), e, Overrides::default())
    }

    fn diag(r: Result<Resolved>) -> (usize, usize, String) {
        match r {
            Err(CliError::Config {
                line,
                column,
                message,
                ..
            }) => (line, column, message),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_resolve_for_every_experiment() {
        for e in Experiment::ALL {
            let r = defaults(e);
            assert_eq!(r.experiment, e);
        }
        let r = defaults(Experiment::Limits);
        assert_eq!(r.waveform().n_subcarriers(), 256);
        assert_eq!(r.blocks.len(), 4);
    }

    #[test]
    fn locate_key_reports_line_and_column() {
        let text = "{\n  \"a\": 1,\n    \"trials\": 0\n}";
        assert_eq!(locate_key(text, "trials"), Some((3, 5)));
        assert_eq!(locate_key("{\"x\": \"trials\"}", "trials"), None);
    }

    #[test]
    fn syntax_error_is_line_anchored() {
        let (line, _, msg) = diag(parse_str(
            "{\n  \"trials\": 3,\n  \"seed\": ,\n}",
            Experiment::Ber,
        ));
        assert_eq!(line, 3);
        assert!(!msg.contains(" at line "));
    }

    #[test]
    fn unknown_field_is_rejected() {
        let (line, _, msg) = diag(parse_str("{\n\n  \"trails\": 3\n}", Experiment::Ber));
        assert_eq!(line, 3);
        assert!(msg.contains("trails"), "{msg}");
    }

    #[test]
    fn semantic_errors_point_at_key() {
        let (line, col, msg) = diag(parse_str(
            "{\n  \"seed\": 4,\n  \"trials\": 0\n}",
            Experiment::RmseRange,
        ));
        assert_eq!((line, col), (3, 3));
        assert!(msg.contains("at least 1"));
        let (line, _, _) = diag(parse_str(
            "{\n  \"alphas\": [0.5, 1.5]\n}",
            Experiment::RmseRange,
        ));
        assert_eq!(line, 2);
        let (line, _, msg) = diag(parse_str("{\n\"papr\": {}\n}", Experiment::Ber));
        assert_eq!(line, 2);
        assert!(msg.contains("not used"));
    }

    #[test]
    fn mismatched_experiment_is_reported() {
        let (_, _, msg) = diag(parse_str("{\"experiment\": \"ber\"}", Experiment::Limits));
        assert!(msg.contains("ber") && msg.contains("limits"));
    }

    #[test]
    fn invalid_waveform_anchors_at_section() {
        let (line, _, msg) = diag(parse_str(
            "{\n \"waveform\": {\"alpha\": 2.0}\n}",
            Experiment::PaprCcdf,
        ));
        assert_eq!(line, 2);
        assert!(msg.contains("alpha"));
    }

    #[test]
    fn overrides_take_precedence() {
        let r = parse(
            "{\"seed\": 3, \"trials\": 7}",
            Path::new("c.json"),
            Experiment::RmseRange,
            Overrides {
                seed: Some(11),
                trials: Some(2),
            },
        )
        .unwrap();
        assert_eq!((r.seed, r.trials()), (11, 2));
    }

    #[test]
    fn cp_follows_subcarrier_count() {
        let r = parse_str("{\"waveform\": {\"n_subcarriers\": 256}}", Experiment::Ber).unwrap();
        assert_eq!(r.waveform().cp_samples(), 18);
    }

    #[test]
    fn link_rejects_chirp_and_point_targets() {
        diag(parse_str("{\"schemes\": [\"chirp\"]}", Experiment::Ber));
        diag(parse_str(
            "{\"channel\": {\"profile\": \"point_target\"}}",
            Experiment::Ber,
        ));
    }
}
