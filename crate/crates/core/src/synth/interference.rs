//! Communications-interference synthesis: root-raised-cosine QPSK and
//! OFDM downlink waveforms, gated by ON/OFF activity patterns.
//!
//! Gating multiplies the assembled waveform by a 0/1 pattern, so OFF
//! samples are exactly zero — downstream power measurements count ON time
//! by looking for nonzero samples. Amplitudes are arbitrary here; INR
//! scaling happens in [`crate::synth::mix`].

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::rng;
use crate::types::{Annotation, Box, IQCapture, InterferenceKind, InterferenceParams};

/// Root-raised-cosine roll-off for the QPSK interferer; with the standard
/// 9.1 MHz occupied bandwidth this gives a 7 Msym/s symbol rate.
pub const RRC_BETA: f64 = 0.3;
/// RRC pulse support, in symbol periods each side of center.
const RRC_SPAN_SYMBOLS: f64 = 8.0;
/// Minimum ON duration for any interference segment, seconds.
const MIN_ON_S: f64 = 1.0e-3;

/// OFDM numerology: 640-point FFT at 10 MS/s (15.625 kHz spacing), 576
/// active subcarriers (9 MHz) around a quiet DC bin, 40-sample cyclic
/// prefix.
const OFDM_NFFT: usize = 640;
const OFDM_CP: usize = 40;
const OFDM_ACTIVE_HALF: usize = 288;

/// TDD uplink/downlink configurations over a 10 ms frame of 1 ms
/// subframes: `true` where the downlink (the emitter we observe) is
/// active, counting the downlink-led special subframe as active.
const TDD_CONFIGS: [[bool; 10]; 7] = [
    [true, true, false, false, false, true, true, false, false, false],
    [true, true, false, false, true, true, true, false, false, true],
    [true, true, false, true, true, true, true, false, true, true],
    [true, true, false, false, false, true, true, true, true, true],
    [true, true, false, false, true, true, true, true, true, true],
    [true, true, false, true, true, true, true, true, true, true],
    [true, true, false, false, false, true, true, false, false, true],
];

/// The standard gated-QPSK activity pattern: 3 ms ON, 2 ms OFF, starting
/// ON at t = 0, clipped to the window.
pub fn qpsk_on_off_pattern(window_s: f64) -> Vec<(f64, f64)> {
    let mut pattern = Vec::new();
    let mut t = 0.0;
    while t < window_s {
        pattern.push((t, (t + 3.0e-3).min(window_s)));
        t += 5.0e-3;
    }
    pattern
}

/// ON segments of TDD configuration `config` (0..=6) over the window,
/// merged across frame boundaries.
pub fn tdd_on_pattern(config: u8, window_s: f64) -> Result<Vec<(f64, f64)>> {
    let slots = TDD_CONFIGS
        .get(config as usize)
        .ok_or_else(|| Error::InvalidArgument(format!("TDD config {config} out of range 0..=6")))?;
    let n_slots = (window_s / 1.0e-3).ceil() as usize;
    let mut pattern: Vec<(f64, f64)> = Vec::new();
    for slot in 0..n_slots {
        if !slots[slot % 10] {
            continue;
        }
        let start = slot as f64 * 1.0e-3;
        let stop = (start + 1.0e-3).min(window_s);
        match pattern.last_mut() {
            Some(last) if (last.1 - start).abs() < 1e-12 => last.1 = stop,
            _ => pattern.push((start, stop)),
        }
    }
    Ok(pattern)
}

/// Validate and window-clip an explicit ON/OFF pattern.
fn clip_pattern(pattern: &[(f64, f64)], window_s: f64) -> Result<Vec<(f64, f64)>> {
    if pattern.is_empty() {
        return Err(Error::InvalidArgument("gated interference needs a non-empty ON/OFF pattern".into()));
    }
    let mut prev_stop = f64::NEG_INFINITY;
    let mut clipped = Vec::new();
    for &(start, stop) in pattern {
        if stop - start < MIN_ON_S - 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "ON segment ({start}, {stop}) shorter than the 1 ms minimum"
            )));
        }
        if start < prev_stop {
            return Err(Error::InvalidArgument("ON segments must be sorted and non-overlapping".into()));
        }
        prev_stop = stop;
        let (s, e) = (start.max(0.0), stop.min(window_s));
        if e > s {
            clipped.push((s, e));
        }
    }
    Ok(clipped)
}

/// Draw one of the four QPSK constellation points with unit energy.
fn qpsk_point(rng: &mut impl Rng) -> Complex64 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match rng.gen_range(0..4u8) {
        0 => Complex64::new(r, r),
        1 => Complex64::new(r, -r),
        2 => Complex64::new(-r, r),
        _ => Complex64::new(-r, -r),
    }
}

/// Root-raised-cosine impulse response in symbol-period units, peak-
/// normalized shape (absolute scale is irrelevant; INR scaling follows).
fn rrc(u: f64, beta: f64) -> f64 {
    let pi = std::f64::consts::PI;
    if u.abs() < 1e-9 {
        return 1.0 + beta * (4.0 / pi - 1.0);
    }
    let quarter = 1.0 / (4.0 * beta);
    if (u.abs() - quarter).abs() < 1e-9 {
        let arg = pi / (4.0 * beta);
        return (beta / std::f64::consts::SQRT_2)
            * ((1.0 + 2.0 / pi) * arg.sin() + (1.0 - 2.0 / pi) * arg.cos());
    }
    let num = (pi * u * (1.0 - beta)).sin() + 4.0 * beta * u * (pi * u * (1.0 + beta)).cos();
    let den = pi * u * (1.0 - (4.0 * beta * u).powi(2));
    num / den
}

/// Pulse-shaped random QPSK covering the whole window (gating comes later).
fn qpsk_waveform(n: usize, fs: f64, bandwidth_hz: f64, rng: &mut impl Rng) -> Vec<Complex64> {
    let symbol_rate = bandwidth_hz / (1.0 + RRC_BETA);
    let ts = 1.0 / symbol_rate;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let first = -(RRC_SPAN_SYMBOLS as i64);
    let last = ((n as f64 / fs) * symbol_rate).ceil() as i64 + RRC_SPAN_SYMBOLS as i64;
    for k in first..=last {
        let a = qpsk_point(rng);
        let center = k as f64 * ts;
        let n0 = ((center - RRC_SPAN_SYMBOLS * ts) * fs).ceil().max(0.0) as usize;
        let n1 = (((center + RRC_SPAN_SYMBOLS * ts) * fs).floor() as i64).min(n as i64 - 1);
        for ni in n0..=(n1.max(0) as usize) {
            let u = (ni as f64 / fs - center) / ts;
            out[ni] += a * rrc(u, RRC_BETA);
        }
    }
    out
}

/// Contiguous OFDM symbols (with cyclic prefix) covering the whole window.
fn ofdm_waveform(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(OFDM_NFFT);
    let sym_len = OFDM_NFFT + OFDM_CP;
    let norm = 1.0 / (2.0 * OFDM_ACTIVE_HALF as f64).sqrt();
    let mut out = Vec::with_capacity(n + sym_len);
    let mut freq = vec![Complex64::new(0.0, 0.0); OFDM_NFFT];
    while out.len() < n {
        for f in freq.iter_mut() {
            *f = Complex64::new(0.0, 0.0);
        }
        for k in 1..=OFDM_ACTIVE_HALF {
            freq[k] = qpsk_point(rng);
            freq[OFDM_NFFT - k] = qpsk_point(rng);
        }
        ifft.process(&mut freq);
        // Cyclic prefix: last CP samples lead the symbol.
        for i in 0..OFDM_CP {
            out.push(freq[OFDM_NFFT - OFDM_CP + i] * norm);
        }
        for f in freq.iter().take(OFDM_NFFT) {
            out.push(*f * norm);
        }
    }
    out.truncate(n);
    out
}

/// Synthesize an interference capture plus its truth boxes (one per ON
/// segment). Deterministic given `(p, rng_seed)`.
pub fn synth_interference(
    p: &InterferenceParams,
    window_s: f64,
    fs: f64,
    rng_seed: u64,
) -> Result<(IQCapture, Annotation)> {
    if p.bandwidth_hz <= 0.0 || p.bandwidth_hz > fs {
        return Err(Error::InvalidArgument(format!(
            "interference bandwidth {} Hz outside (0, {}]",
            p.bandwidth_hz, fs
        )));
    }
    let n = (window_s * fs).round() as usize;
    let pattern = match p.kind {
        InterferenceKind::QpskOn | InterferenceKind::OfdmFdd => vec![(0.0, window_s)],
        InterferenceKind::QpskOnOff => clip_pattern(&p.on_off_pattern, window_s)?,
        InterferenceKind::OfdmTdd => tdd_on_pattern(p.ul_dl_config, window_s)?,
    };

    let mut rng = rng::stream(rng_seed, "interference_data", p.kind as u64);
    let mut wave = match p.kind {
        InterferenceKind::QpskOn | InterferenceKind::QpskOnOff => {
            qpsk_waveform(n, fs, p.bandwidth_hz, &mut rng)
        }
        InterferenceKind::OfdmFdd | InterferenceKind::OfdmTdd => ofdm_waveform(n, &mut rng),
    };

    // Carrier offset, then hard gating (exact zeros in OFF periods).
    for (i, w) in wave.iter_mut().enumerate() {
        let t = i as f64 / fs;
        let ph = 2.0 * std::f64::consts::PI * p.cf_offset_hz * t;
        *w *= Complex64::new(ph.cos(), ph.sin());
    }
    let mut samples = vec![num_complex::Complex32::new(0.0, 0.0); n];
    for &(start, stop) in &pattern {
        let n0 = (start * fs).ceil() as usize;
        let n1 = ((stop * fs).ceil() as usize).min(n);
        for ni in n0..n1 {
            samples[ni] = num_complex::Complex32::new(wave[ni].re as f32, wave[ni].im as f32);
        }
    }

    let f_lo = (p.cf_offset_hz - p.bandwidth_hz / 2.0).max(-fs / 2.0);
    let f_hi = (p.cf_offset_hz + p.bandwidth_hz / 2.0).min(fs / 2.0);
    let boxes = pattern
        .iter()
        .map(|&(start, stop)| Box {
            x: 0.5 + (f_lo + f_hi) / 2.0 / fs,
            y: (start + stop) / 2.0 / window_s,
            w: (f_hi - f_lo) / fs,
            h: (stop - start) / window_s,
        })
        .collect();

    let capture = IQCapture { samples, sample_rate_hz: fs, center_freq_hz: 0.0 };
    let annotation = Annotation {
        radar_boxes: Vec::new(),
        interference_boxes: boxes,
        radar_truth: None,
        interference_truth: Some(p.clone()),
    };
    Ok((capture, annotation))
}
