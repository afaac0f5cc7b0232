//! FFT helpers on top of a per-thread `rustfft` planner.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward DFT in place.
pub fn fft(buf: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

/// Unnormalized inverse DFT in place.
pub fn ifft(buf: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
}

/// Circular cross-correlation `out(k) = Σ_l r(l)·t*(l−k)` for equal lengths,
/// given the precomputed spectrum of the template.
pub fn circular_xcorr_with_spectrum(
    r: &[Complex64],
    template_spectrum: &[Complex64],
) -> Vec<Complex64> {
    let n = r.len();
    let mut buf = r.to_vec();
    fft(&mut buf);
    for (b, t) in buf.iter_mut().zip(template_spectrum) {
        *b *= t.conj();
    }
    ifft(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|b| *b *= scale);
    buf
}

/// Spectrum of a template for [`circular_xcorr_with_spectrum`].
pub fn spectrum(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    fft(&mut buf);
    buf
}

/// Signed frequency index of DFT bin `k` for a length-`n` transform.
pub fn signed_bin(k: usize, n: usize) -> f64 {
    if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

pub fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        energy(x) / x.len() as f64
    }
}
