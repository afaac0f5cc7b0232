use super::chirp::{generate_chirp, ChirpPlan};
use super::grid::ResourceGrid;
use super::{Scheme, TimeSignal, WaveformConfig};
use crate::error::{invalid, mismatch};
use crate::{dsp, Complex64, Result};

/// One CP-OFDM symbol: 1/√N-scaled inverse DFT of `row` with the last
/// `cp_samples` samples prepended.
pub fn ofdm_symbol(row: &[Complex64], cp_samples: usize) -> Vec<Complex64> {
    let n = row.len();
    let mut useful = row.to_vec();
    dsp::ifft(&mut useful);
    let scale = 1.0 / (n as f64).sqrt();
    useful.iter_mut().for_each(|v| *v *= scale);
    let mut out = Vec::with_capacity(n + cp_samples);
    out.extend_from_slice(&useful[n - cp_samples..]);
    out.extend_from_slice(&useful);
    out
}

/// CP-OFDM modulation of every grid symbol.
pub fn ofdm_modulate(grid: &ResourceGrid, cfg: &WaveformConfig) -> Result<TimeSignal> {
    check_grid(grid, cfg)?;
    let mut samples = Vec::with_capacity(cfg.frame_len());
    for m in 0..grid.n_symbols() {
        samples.extend(ofdm_symbol(grid.symbol(m), cfg.cp_samples()));
    }
    Ok(TimeSignal::new(samples, cfg.sample_rate_hz()))
}

/// a(l) = (1−α)·s(l) + α·c(l).
pub fn compose_aac(ofdm: &TimeSignal, chirp: &TimeSignal, alpha: f64) -> Result<TimeSignal> {
    if ofdm.len() != chirp.len() {
        return Err(mismatch(format!(
            "OFDM has {} samples, chirp {}",
            ofdm.len(),
            chirp.len()
        )));
    }
    if ofdm.sample_rate_hz != chirp.sample_rate_hz {
        return Err(mismatch("OFDM and chirp sample rates differ"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(ofdm.clone());
    }
    if alpha == 1.0 {
        return Ok(chirp.clone());
    }
    let samples = ofdm
        .samples
        .iter()
        .zip(&chirp.samples)
        .map(|(s, c)| s * (1.0 - alpha) + c * alpha)
        .collect();
    Ok(TimeSignal {
        samples,
        sample_rate_hz: ofdm.sample_rate_hz,
        t0_s: ofdm.t0_s,
    })
}

/// Chirp-multiplied OFDM. On chirped symbols the covered resource elements
/// (scaled by q_m(n)) are modulated and multiplied by the unit chirp; the
/// uncovered ones are added as plain OFDM. Other symbols equal plain OFDM.
pub fn compose_cm(
    grid: &ResourceGrid,
    plan: &ChirpPlan,
    cfg: &WaveformConfig,
) -> Result<TimeSignal> {
    check_grid(grid, cfg)?;
    plan.check_dims(cfg)?;
    let mut out = ofdm_modulate(grid, cfg)?;
    let (n, cp, sym_len, ts) = (
        cfg.n_subcarriers(),
        cfg.cp_samples(),
        cfg.symbol_len(),
        cfg.sample_period_s(),
    );
    for seg in plan.segments(cfg) {
        for m in seg.symbols.clone() {
            let mut covered = vec![Complex64::new(0.0, 0.0); n];
            let mut uncovered = vec![Complex64::new(0.0, 0.0); n];
            let mut any_uncovered = false;
            for (k, x) in grid.symbol(m).iter().enumerate() {
                if plan.covers_subcarrier(m, k) {
                    covered[k] = x * plan.amplitude(m, k);
                } else {
                    uncovered[k] = *x;
                    any_uncovered |= x.norm_sqr() > 0.0;
                }
            }
            let s_cov = ofdm_symbol(&covered, cp);
            let s_unc = any_uncovered.then(|| ofdm_symbol(&uncovered, cp));
            let base = m * sym_len;
            for p in 0..sym_len {
                let mut v = s_cov[p] * seg.phasor(base + p, ts);
                if let Some(u) = &s_unc {
                    v += u[p];
                }
                out.samples[base + p] = v;
            }
        }
    }
    Ok(out)
}

/// Transmit frame for `scheme`: plain OFDM, AAC with the configuration's α,
/// or CM.
pub fn build_frame(
    grid: &ResourceGrid,
    plan: &ChirpPlan,
    cfg: &WaveformConfig,
    scheme: Scheme,
) -> Result<TimeSignal> {
    match scheme {
        Scheme::Ofdm => ofdm_modulate(grid, cfg),
        Scheme::Aac => {
            if plan.comb().is_some() {
                return Err(invalid(
                    "comb placement applies to chirp multiplication only, not to AAC",
                ));
            }
            let s = ofdm_modulate(grid, cfg)?;
            let c = generate_chirp(plan, cfg)?;
            compose_aac(&s, &c, cfg.alpha())
        }
        Scheme::Cm => compose_cm(grid, plan, cfg),
    }
}

fn check_grid(grid: &ResourceGrid, cfg: &WaveformConfig) -> Result<()> {
    if grid.n_symbols() != cfg.n_symbols() || grid.n_subcarriers() != cfg.n_subcarriers() {
        return Err(mismatch(format!(
            "grid is {}x{}, configuration is {}x{}",
            grid.n_symbols(),
            grid.n_subcarriers(),
            cfg.n_symbols(),
            cfg.n_subcarriers()
        )));
    }
    Ok(())
}
