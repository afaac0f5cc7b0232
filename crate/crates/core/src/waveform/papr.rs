use super::{TimeSignal, WaveformConfig};
use crate::error::invalid;
use crate::{Complex64, Result};

/// PAPR in dB of a whole block: 10·log10(max|x|² / mean|x|²).
pub fn papr_db(samples: &[Complex64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("PAPR of an empty signal"));
    }
    let (peak, sum) = samples.iter().fold((0.0f64, 0.0), |(p, s), x| {
        let e = x.norm_sqr();
        (p.max(e), s + e)
    });
    if sum == 0.0 {
        return Err(invalid("PAPR of an all-zero signal"));
    }
    Ok(10.0 * (peak * samples.len() as f64 / sum).log10())
}

/// PAPR of each OFDM symbol's useful part (CP excluded).
pub fn papr_per_symbol_db(x: &TimeSignal, cfg: &WaveformConfig) -> Result<Vec<f64>> {
    let symbols = x.len() / cfg.symbol_len();
    if symbols == 0 || x.len() % cfg.symbol_len() != 0 {
        return Err(invalid(format!(
            "signal of {} samples is not a whole number of {}-sample symbols",
            x.len(),
            cfg.symbol_len()
        )));
    }
    (0..symbols)
        .map(|m| papr_db(&x.samples[cfg.useful_range(m)]))
        .collect()
}

/// Peak amplitude g of `s` and correlation magnitude e = |ρ| between `s` and
/// `c`, both after scaling each block to unit average power.
pub fn peak_and_correlation(s: &[Complex64], c: &[Complex64]) -> Result<(f64, f64)> {
    if s.len() != c.len() || s.is_empty() {
        return Err(invalid(
            "peak/correlation needs two equal-length nonempty blocks",
        ));
    }
    let len = s.len() as f64;
    let ps = s.iter().map(|v| v.norm_sqr()).sum::<f64>() / len;
    let pc = c.iter().map(|v| v.norm_sqr()).sum::<f64>() / len;
    if ps == 0.0 || pc == 0.0 {
        return Err(invalid("blocks must have nonzero power"));
    }
    let peak = s.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    let g = (peak / ps).sqrt();
    let rho: Complex64 = s
        .iter()
        .zip(c)
        .map(|(a, b)| a * b.conj())
        .sum::<Complex64>()
        / (len * (ps * pc).sqrt());
    Ok((g, rho.norm()))
}

/// Linear upper bound on the PAPR of the unit-power composite
/// (1−α)s + αc for a given peak amplitude g of s and correlation magnitude e.
pub fn papr_bound(g: f64, e: f64, alpha: f64) -> f64 {
    let num = ((1.0 - alpha) * g + alpha).powi(2);
    let den = (1.0 - alpha).powi(2) + alpha * alpha - 2.0 * alpha * (1.0 - alpha) * e;
    num / den
}

/// Smallest α above which the composite's PAPR bound drops below g²:
/// α_th = 2g(ge+1) / (g² + 2g − 1 + 2g²e).
pub fn alpha_threshold(g: f64, e: f64) -> Result<f64> {
    if !(g >= 1.0) {
        return Err(invalid(format!(
            "peak amplitude g must be ≥ 1 for a unit-power block, got {g}"
        )));
    }
    if !(0.0..=1.0).contains(&e) {
        return Err(invalid(format!(
            "correlation magnitude must lie in [0, 1], got {e}"
        )));
    }
    let den = g * g + 2.0 * g - 1.0 + 2.0 * g * g * e;
    if den <= 0.0 {
        return Err(invalid("threshold denominator is not positive"));
    }
    Ok(2.0 * g * (g * e + 1.0) / den)
}
