//! Labeled IQ capture synthesis.
//!
//! Produces everything the detectors train and evaluate on: five pulsed-radar
//! waveform families ([`radar`]), QPSK and OFDM communications interference
//! with gated activity patterns ([`interference`]), and calibrated mixing
//! with exactly one AWGN realization ([`mix`]).
//!
//! All synthesis is a pure function of `(params, seed)`; identical inputs
//! yield bit-identical captures.

pub mod interference;
pub mod mix;
pub mod radar;

pub use interference::{qpsk_on_off_pattern, synth_interference, tdd_on_pattern};
pub use mix::{band_power_stats, noise_capture, scale_and_mix};
pub use radar::{sample_radar_params, sample_radar_params_with, synth_radar, TONE_BANDWIDTH_HZ};

/// SNR grid (dB) radar captures are drawn from.
pub const SNR_GRID_DB: [f64; 6] = [10.0, 12.0, 14.0, 16.0, 18.0, 20.0];
/// INR grid (dB) interference captures are drawn from.
pub const INR_GRID_DB: [f64; 5] = [2.0, 4.0, 6.0, 8.0, 10.0];
/// Reference bandwidth for the SNR/INR conventions, Hz.
pub const REF_BANDWIDTH_HZ: f64 = 1.0e6;
/// Carrier offset applied to all interference kinds, Hz.
pub const INTERFERENCE_CF_OFFSET_HZ: f64 = 0.35e6;
/// Occupied bandwidth of the QPSK interferer, Hz.
pub const QPSK_BANDWIDTH_HZ: f64 = 9.1e6;
/// Occupied bandwidth of the OFDM interferer, Hz.
pub const OFDM_BANDWIDTH_HZ: f64 = 9.0e6;
