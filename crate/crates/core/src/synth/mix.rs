//! Calibrated mixing: SNR/INR scaling plus exactly one AWGN realization.
//!
//! Noise convention: unit power spectral density over the monitored band,
//! realized as unit-variance complex Gaussian samples. At 10 MS/s the
//! average noise power inside any 1 MHz is then 0.1, which anchors both
//! ratio definitions:
//!
//! * SNR (radar): peak instantaneous pulse power over the per-1MHz noise
//!   power — the radar component is scaled so `peak² / 0.1 = 10^(snr/10)`.
//! * INR (interference): average interference-plus-noise to average noise
//!   power in the 1 MHz around the interferer's spectral centroid,
//!   averaged over its ON time — scaled so the in-band ON-time average
//!   interference power equals `0.1 · (10^(inr/10) − 1)`. An INR of 0 dB
//!   therefore degenerates to zero interference.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::rng;
use crate::synth::REF_BANDWIDTH_HZ;
use crate::types::{IQCapture, SAMPLE_RATE_HZ, WINDOW_SAMPLES};

/// Spectral centroid (Hz) and average in-band power over ON samples of a
/// capture, measured through a brick-wall window of `ref_bw_hz` around the
/// centroid. ON samples are the nonzero ones (gated synthesis writes exact
/// zeros). Returns `(centroid_hz, avg_on_power)`; both 0 for a silent capture.
pub fn band_power_stats(capture: &IQCapture, ref_bw_hz: f64) -> (f64, f64) {
    let n = capture.samples.len();
    let n_on = capture.samples.iter().filter(|s| s.re != 0.0 || s.im != 0.0).count();
    if n == 0 || n_on == 0 {
        return (0.0, 0.0);
    }
    let mut buf: Vec<Complex64> =
        capture.samples.iter().map(|s| Complex64::new(s.re as f64, s.im as f64)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let fs = capture.sample_rate_hz;
    let freq = |k: usize| -> f64 {
        if k < n / 2 {
            k as f64 * fs / n as f64
        } else {
            (k as f64 - n as f64) * fs / n as f64
        }
    };
    let total: f64 = buf.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return (0.0, 0.0);
    }
    let centroid = buf.iter().enumerate().map(|(k, v)| freq(k) * v.norm_sqr()).sum::<f64>() / total;

    // Parseval with the unnormalized DFT: sum_n |s|² = (1/N) sum_k |S|².
    // The in-band energy divided by the ON-sample count gives the average
    // in-band power over ON time.
    let in_band: f64 = buf
        .iter()
        .enumerate()
        .filter(|(k, _)| (freq(*k) - centroid).abs() <= ref_bw_hz / 2.0)
        .map(|(_, v)| v.norm_sqr())
        .sum();
    (centroid, in_band / n as f64 / n_on as f64)
}

/// A pure-noise capture of arbitrary length under the unit-PSD convention.
/// With `len = WINDOW_SAMPLES` this matches the no-component case of
/// [`scale_and_mix`] sample for sample.
pub fn noise_capture(len: usize, noise_seed: u64) -> IQCapture {
    let mut noise = rng::stream(noise_seed, "awgn", 0);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let samples = (0..len)
        .map(|_| {
            let re: f64 = noise.sample::<f64, _>(StandardNormal);
            let im: f64 = noise.sample::<f64, _>(StandardNormal);
            num_complex::Complex32::new((re * half) as f32, (im * half) as f32)
        })
        .collect();
    IQCapture { samples, sample_rate_hz: SAMPLE_RATE_HZ, center_freq_hz: 0.0 }
}

/// Combine optional radar and interference components with one AWGN
/// realization, applying the SNR/INR conventions described in the module
/// docs. Components without a corresponding ratio are skipped entirely.
/// With no components at all, returns a standard-length pure-noise window.
///
/// Both components must have equal length when both are present.
pub fn scale_and_mix(
    radar: Option<&IQCapture>,
    interf: Option<&IQCapture>,
    snr_db: Option<f64>,
    inr_db: Option<f64>,
    noise_seed: u64,
) -> IQCapture {
    let n = match (radar, interf) {
        (Some(r), Some(i)) => {
            assert_eq!(r.samples.len(), i.samples.len(), "component length mismatch");
            r.samples.len()
        }
        (Some(r), None) => r.samples.len(),
        (None, Some(i)) => i.samples.len(),
        (None, None) => WINDOW_SAMPLES,
    };
    let fs = radar.or(interf).map_or(SAMPLE_RATE_HZ, |c| c.sample_rate_hz);
    let noise_per_ref_bw = REF_BANDWIDTH_HZ / fs;

    let radar_scale = match (radar, snr_db) {
        (Some(r), Some(snr)) => {
            let peak = r.samples.iter().map(|s| s.norm() as f64).fold(0.0, f64::max);
            if peak > 0.0 {
                (noise_per_ref_bw * 10f64.powf(snr / 10.0)).sqrt() / peak
            } else {
                0.0
            }
        }
        _ => 0.0,
    };
    let interf_scale = match (interf, inr_db) {
        (Some(i), Some(inr)) => {
            let (_, measured) = band_power_stats(i, REF_BANDWIDTH_HZ);
            let target = noise_per_ref_bw * (10f64.powf(inr / 10.0) - 1.0);
            if measured > 0.0 && target > 0.0 {
                (target / measured).sqrt()
            } else {
                0.0
            }
        }
        _ => 0.0,
    };

    let mut noise = rng::stream(noise_seed, "awgn", 0);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut samples = Vec::with_capacity(n);
    for idx in 0..n {
        let re_n: f64 = noise.sample::<f64, _>(StandardNormal) * half;
        let im_n: f64 = noise.sample::<f64, _>(StandardNormal) * half;
        let mut re = re_n;
        let mut im = im_n;
        if let Some(r) = radar {
            re += radar_scale * r.samples[idx].re as f64;
            im += radar_scale * r.samples[idx].im as f64;
        }
        if let Some(i) = interf {
            re += interf_scale * i.samples[idx].re as f64;
            im += interf_scale * i.samples[idx].im as f64;
        }
        samples.push(num_complex::Complex32::new(re as f32, im as f32));
    }
    IQCapture { samples, sample_rate_hz: fs, center_freq_hz: 0.0 }
}
