//! Physical-layer building blocks for integrated sensing and communication
//! on a 5G-NR-like OFDM grid: affine chirp addition (AAC-OFDM), chirp
//! multiplication (CM-OFDM), the delay-Doppler channel, matched-filter
//! sensing, a coded QPSK link, and ambiguity functions.
//!
//! All signals are baseband `Complex64` sequences at `N·Δf` samples per second.

// `!(x > 0.0)` is the NaN-rejecting form used for input checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambiguity;
pub mod channel;
pub mod comms;
pub mod dsp;
mod error;
pub mod rng;
pub mod sensing;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Propagation speed used for every range/velocity conversion.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;
