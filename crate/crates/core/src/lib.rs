//! Spectrum-sensing workbench for pulsed-radar detection in a shared band.
//!
//! The crate covers the full desk-scale loop:
//!
//! * [`synth`] — synthesize complex-baseband captures of a 10 MHz monitored
//!   band: five pulsed-radar waveform families, communications interference
//!   (QPSK and LTE-style OFDM), and calibrated AWGN mixing.
//! * [`spectrogram`] / [`wavelet`] — the two preprocessing front ends: a
//!   max-compressed dB spectrogram for the grid detector, and a Morlet
//!   scalogram stack for the binary classifier.
//! * [`nn`] — a minimal dependency-free neural-network engine (tensors,
//!   conv/dense layers, reverse-mode gradients, Adam, checkpoints).
//! * [`detector`] — the grid detector: loss, training, percentile
//!   calibration, thresholded decoding, and parameter estimation.
//! * [`classifier`] — the scalogram classifier that backstops the detector
//!   on radar-negative windows.
//! * [`pipeline`] — the dual-flow decision logic over 16 ms windows.
//! * [`eval`] — experiment construction, metric computation, and
//!   deterministic report generation.
//!
//! Everything is seeded: a capture, a training run, or a full experiment is
//! reproducible bit-for-bit from its id and seed.

pub mod classifier;
pub mod detector;
pub mod error;
pub mod eval;
pub mod io;
pub mod nn;
pub mod pipeline;
pub mod rng;
pub mod spectrogram;
pub mod synth;
pub mod types;
pub mod wavelet;

pub use error::{Error, Result};
pub use types::*;
