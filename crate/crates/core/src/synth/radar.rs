//! Pulsed-radar waveform synthesis.
//!
//! Types 1 and 2 are pulse-modulated tones; types 3–5 sweep a linear FM
//! chirp across `bandwidth_hz` within each pulse. Pulses have rectangular
//! envelopes and unit amplitude (SNR scaling happens in [`crate::synth::mix`]).
//! Chirps wider than the monitored band emit only the in-band portion of
//! each sweep, and the annotation boxes cover exactly that portion.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::synth::SNR_GRID_DB;
use crate::types::{Annotation, Box, IQCapture, RadarParams, WINDOW_S};

/// Annotated bandwidth for the tone types (1–2). The waveform itself is a
/// pure tone; this sets the frequency extent of its truth boxes and is
/// exposed as a config knob because the detection flows were designed
/// around it.
pub const TONE_BANDWIDTH_HZ: f64 = 1.6e6;

/// Carrier offsets are drawn uniformly from ± this value, keeping every
/// waveform family at least partially inside the monitored band.
const CF_OFFSET_MAX_HZ: f64 = 2.5e6;

/// Per-type parameter ranges: pulse width (s), pulse repetition interval
/// (s), pulses per burst, burst duration (s), and swept bandwidth (Hz,
/// `None` for the tone types).
struct ParamRanges {
    pulse_width_s: (f64, f64),
    pulse_interval_s: (f64, f64),
    num_pulses: (u32, u32),
    burst_duration_s: (f64, f64),
    bandwidth_hz: Option<(f64, f64)>,
}

const RANGES: [ParamRanges; 5] = [
    ParamRanges {
        pulse_width_s: (0.5e-6, 2.5e-6),
        pulse_interval_s: (0.9e-3, 1.1e-3),
        num_pulses: (15, 40),
        burst_duration_s: (13.0e-3, 44.0e-3),
        bandwidth_hz: None,
    },
    ParamRanges {
        pulse_width_s: (13.0e-6, 52.0e-6),
        pulse_interval_s: (0.3e-3, 3.3e-3),
        num_pulses: (5, 20),
        burst_duration_s: (1.0e-3, 66.0e-3),
        bandwidth_hz: None,
    },
    ParamRanges {
        pulse_width_s: (3.0e-6, 5.0e-6),
        pulse_interval_s: (0.3e-3, 3.3e-3),
        num_pulses: (8, 24),
        burst_duration_s: (2.0e-3, 80.0e-3),
        bandwidth_hz: Some((50.0e6, 100.0e6)),
    },
    ParamRanges {
        pulse_width_s: (10.0e-6, 30.0e-6),
        pulse_interval_s: (0.3e-3, 3.3e-3),
        num_pulses: (2, 8),
        burst_duration_s: (0.6e-3, 26.0e-3),
        bandwidth_hz: Some((1.0e6, 10.0e6)),
    },
    ParamRanges {
        pulse_width_s: (50.0e-6, 100.0e-6),
        pulse_interval_s: (0.3e-3, 3.3e-3),
        num_pulses: (8, 24),
        burst_duration_s: (2.0e-3, 80.0e-3),
        bandwidth_hz: Some((50.0e6, 100.0e6)),
    },
];

fn uniform(rng: &mut impl Rng, range: (f64, f64)) -> f64 {
    range.0 + rng.gen::<f64>() * (range.1 - range.0)
}

/// Draw a full radar parameter set for `radar_type` (1..=5) from the
/// standard ranges, with SNR from the standard grid and the default tone
/// bandwidth. Deterministic given `(radar_type, rng_seed)`.
pub fn sample_radar_params(radar_type: u8, rng_seed: u64) -> Result<RadarParams> {
    sample_radar_params_with(radar_type, rng_seed, TONE_BANDWIDTH_HZ, &SNR_GRID_DB)
}

/// [`sample_radar_params`] with explicit tone bandwidth and SNR grid.
///
/// The burst duration is drawn uniformly from the part of its range
/// consistent with the drawn pulse count and interval, so that
/// `num_pulses × pulse_interval ≤ burst_duration + pulse_interval` always
/// holds (the last pulse starts inside the burst envelope).
pub fn sample_radar_params_with(
    radar_type: u8,
    rng_seed: u64,
    tone_bandwidth_hz: f64,
    snr_grid_db: &[f64],
) -> Result<RadarParams> {
    let ranges = RANGES
        .get(radar_type.wrapping_sub(1) as usize)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown radar type {radar_type} (expected 1..=5)")))?;
    if snr_grid_db.is_empty() {
        return Err(Error::InvalidArgument("empty SNR grid".into()));
    }
    let mut rng = rng::stream(rng_seed, "radar_params", radar_type as u64);

    let pulse_width_s = uniform(&mut rng, ranges.pulse_width_s);
    let pulse_interval_s = uniform(&mut rng, ranges.pulse_interval_s);
    let num_pulses = rng.gen_range(ranges.num_pulses.0..=ranges.num_pulses.1);
    let burst_floor = (num_pulses.saturating_sub(1)) as f64 * pulse_interval_s;
    let burst_duration_s = uniform(
        &mut rng,
        (ranges.burst_duration_s.0.max(burst_floor), ranges.burst_duration_s.1),
    );
    let bandwidth_hz = match ranges.bandwidth_hz {
        Some(range) => uniform(&mut rng, range),
        None => tone_bandwidth_hz,
    };
    let center_freq_hz = uniform(&mut rng, (-CF_OFFSET_MAX_HZ, CF_OFFSET_MAX_HZ));
    let burst_start_s = uniform(&mut rng, (0.0, WINDOW_S));
    let snr_db = snr_grid_db[rng.gen_range(0..snr_grid_db.len())];

    Ok(RadarParams {
        radar_type,
        pulse_width_s,
        pulse_interval_s,
        num_pulses,
        burst_duration_s,
        bandwidth_hz,
        center_freq_hz,
        burst_start_s,
        snr_db,
    })
}

/// Synthesize the radar component of a window: unit-amplitude pulses at
/// `burst_start_s + k·pulse_interval_s`, plus one truth box per pulse whose
/// in-band portion intersects the window.
pub fn synth_radar(p: &RadarParams, window_s: f64, fs: f64) -> Result<(IQCapture, Annotation)> {
    if !(1..=5).contains(&p.radar_type) {
        return Err(Error::InvalidArgument(format!(
            "unknown radar type {} (expected 1..=5)",
            p.radar_type
        )));
    }
    let chirp = p.radar_type >= 3;
    // Tones must be representable at the sample rate; chirps clip to the
    // band by construction, so only their center has to be reachable.
    let needed = if chirp {
        p.center_freq_hz.abs() - p.bandwidth_hz / 2.0
    } else {
        p.center_freq_hz.abs() + p.bandwidth_hz / 2.0
    };
    if needed > fs / 2.0 {
        return Err(Error::InvalidArgument(format!(
            "waveform (cf {} Hz, bw {} Hz) does not reach the band sampled at {} Hz",
            p.center_freq_hz, p.bandwidth_hz, fs
        )));
    }

    let n = (window_s * fs).round() as usize;
    let mut samples = vec![num_complex::Complex32::new(0.0, 0.0); n];
    let mut boxes = Vec::new();

    for k in 0..p.num_pulses {
        let start = p.burst_start_s + k as f64 * p.pulse_interval_s;
        // In-band portion of the pulse, as an offset range [tau0, tau1]
        // within the pulse. Tones are a single frequency, always in band
        // (validated above); chirps keep the sub-interval whose
        // instantaneous frequency lies inside ±fs/2.
        let (tau0, tau1) = if chirp && p.bandwidth_hz > 0.0 {
            let f_lo = p.center_freq_hz - p.bandwidth_hz / 2.0;
            let a = (-fs / 2.0 - f_lo) / p.bandwidth_hz;
            let b = (fs / 2.0 - f_lo) / p.bandwidth_hz;
            (p.pulse_width_s * a.max(0.0), p.pulse_width_s * b.min(1.0))
        } else {
            (0.0, p.pulse_width_s)
        };
        if tau1 <= tau0 {
            continue;
        }
        // Clip to the window.
        let t0 = (start + tau0).max(0.0);
        let t1 = (start + tau1).min(window_s);
        if t1 <= t0 {
            continue;
        }

        let n0 = (t0 * fs).ceil() as usize;
        let n1 = ((t1 * fs).ceil() as usize).min(n);
        if chirp {
            // Linear FM: f(tau) = f_lo + bw·tau/pw, phase integrated from
            // the pulse start so partial (clipped) sweeps stay coherent.
            let f_lo = p.center_freq_hz - p.bandwidth_hz / 2.0;
            let rate = p.bandwidth_hz / p.pulse_width_s;
            for ni in n0..n1 {
                let tau = ni as f64 / fs - start;
                let phase = 2.0 * std::f64::consts::PI * (f_lo * tau + 0.5 * rate * tau * tau);
                samples[ni] = num_complex::Complex32::new(phase.cos() as f32, phase.sin() as f32);
            }
        } else {
            for ni in n0..n1 {
                let t = ni as f64 / fs;
                let phase = 2.0 * std::f64::consts::PI * p.center_freq_hz * t;
                samples[ni] = num_complex::Complex32::new(phase.cos() as f32, phase.sin() as f32);
            }
        }

        // Truth box: the clipped time extent crossed with the frequency
        // extent actually present during it.
        let (f0, f1) = if chirp && p.bandwidth_hz > 0.0 {
            let f_lo = p.center_freq_hz - p.bandwidth_hz / 2.0;
            let rate = p.bandwidth_hz / p.pulse_width_s;
            let fa = f_lo + rate * (t0 - start);
            let fb = f_lo + rate * (t1 - start);
            (fa.min(fb), fa.max(fb))
        } else {
            let half = p.bandwidth_hz / 2.0;
            (
                (p.center_freq_hz - half).max(-fs / 2.0),
                (p.center_freq_hz + half).min(fs / 2.0),
            )
        };
        boxes.push(Box {
            x: 0.5 + (f0 + f1) / 2.0 / fs,
            y: (t0 + t1) / 2.0 / window_s,
            w: (f1 - f0) / fs,
            h: (t1 - t0) / window_s,
        });
    }

    let capture = IQCapture { samples, sample_rate_hz: fs, center_freq_hz: 0.0 };
    let annotation = Annotation {
        radar_boxes: boxes,
        interference_boxes: Vec::new(),
        radar_truth: Some(*p),
        interference_truth: None,
    };
    Ok((capture, annotation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{SAMPLE_RATE_HZ, WINDOW_SAMPLES};

    fn in_range(v: f64, lo: f64, hi: f64) -> bool {
        v >= lo && v <= hi
    }

    #[test]
    fn sampled_params_respect_ranges() {
        for radar_type in 1..=5u8 {
            let r = &RANGES[radar_type as usize - 1];
            for seed in 0..50 {
                let p = sample_radar_params(radar_type, seed).unwrap();
                assert!(in_range(p.pulse_width_s, r.pulse_width_s.0, r.pulse_width_s.1));
                assert!(in_range(p.pulse_interval_s, r.pulse_interval_s.0, r.pulse_interval_s.1));
                assert!(p.num_pulses >= r.num_pulses.0 && p.num_pulses <= r.num_pulses.1);
                assert!(in_range(p.burst_duration_s, r.burst_duration_s.0, r.burst_duration_s.1));
                // Last pulse starts inside the burst envelope.
                assert!(p.num_pulses as f64 * p.pulse_interval_s <= p.burst_duration_s + p.pulse_interval_s + 1e-12);
                match r.bandwidth_hz {
                    Some(range) => assert!(in_range(p.bandwidth_hz, range.0, range.1)),
                    None => assert_eq!(p.bandwidth_hz, TONE_BANDWIDTH_HZ),
                }
                assert!(SNR_GRID_DB.contains(&p.snr_db));
                assert!(in_range(p.burst_start_s, 0.0, WINDOW_S));
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_radar_params(3, 99).unwrap();
        let b = sample_radar_params(3, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_type_rejected() {
        assert!(sample_radar_params(0, 1).is_err());
        assert!(sample_radar_params(6, 1).is_err());
    }

    #[test]
    fn pulse_boxes_count_type1_fixture() {
        // 20 pulses at PRI 1 ms from t = 0 in a 16 ms window: starts at
        // 0..19 ms, of which 16 fall inside the window.
        let p = RadarParams {
            radar_type: 1,
            pulse_width_s: 1.0e-6,
            pulse_interval_s: 1.0e-3,
            num_pulses: 20,
            burst_duration_s: 20.0e-3,
            bandwidth_hz: TONE_BANDWIDTH_HZ,
            center_freq_hz: 0.0,
            burst_start_s: 0.0,
            snr_db: 20.0,
        };
        let (capture, ann) = synth_radar(&p, WINDOW_S, SAMPLE_RATE_HZ).unwrap();
        assert_eq!(capture.samples.len(), WINDOW_SAMPLES);
        assert_eq!(ann.radar_boxes.len(), 16);
    }

    #[test]
    fn burst_after_window_yields_silence() {
        let p = RadarParams {
            radar_type: 2,
            pulse_width_s: 20.0e-6,
            pulse_interval_s: 1.0e-3,
            num_pulses: 5,
            burst_duration_s: 5.0e-3,
            bandwidth_hz: TONE_BANDWIDTH_HZ,
            center_freq_hz: 1.0e6,
            burst_start_s: 20.0e-3,
            snr_db: 10.0,
        };
        let (capture, ann) = synth_radar(&p, WINDOW_S, SAMPLE_RATE_HZ).unwrap();
        assert!(ann.radar_boxes.is_empty());
        assert!(capture.samples.iter().all(|s| s.re == 0.0 && s.im == 0.0));
    }

    #[test]
    fn wide_chirp_clips_to_full_band() {
        let p = RadarParams {
            radar_type: 3,
            pulse_width_s: 4.0e-6,
            pulse_interval_s: 1.0e-3,
            num_pulses: 4,
            burst_duration_s: 4.0e-3,
            bandwidth_hz: 80.0e6,
            center_freq_hz: 0.0,
            burst_start_s: 1.0e-3,
            snr_db: 20.0,
        };
        let (_, ann) = synth_radar(&p, WINDOW_S, SAMPLE_RATE_HZ).unwrap();
        assert_eq!(ann.radar_boxes.len(), 4);
        for b in &ann.radar_boxes {
            assert!((b.w - 1.0).abs() < 1e-9, "clipped chirp box should span the band, got w={}", b.w);
            assert!((b.x - 0.5).abs() < 1e-9);
            // Only 1/8 of the sweep (10 of 80 MHz) is in band.
            assert!((b.h * WINDOW_S - p.pulse_width_s / 8.0).abs() < 2.0 / SAMPLE_RATE_HZ);
        }
    }

    #[test]
    fn pulse_count_matches_in_band_pulses_in_window() {
        // One box per pulse whose in-band portion intersects the window:
        // tones are in band for their full width; a chirp is in band only
        // while its instantaneous frequency lies inside ±fs/2, and that
        // sub-interval (not the pulse start) must reach into the window.
        for radar_type in 1..=5u8 {
            for seed in 0..30 {
                let p = sample_radar_params(radar_type, seed).unwrap();
                let (_, ann) = synth_radar(&p, WINDOW_S, SAMPLE_RATE_HZ).unwrap();
                let expected = (0..p.num_pulses)
                    .filter(|&k| {
                        let start = p.burst_start_s + k as f64 * p.pulse_interval_s;
                        let (tau0, tau1) = if p.radar_type >= 3 {
                            let f_lo = p.center_freq_hz - p.bandwidth_hz / 2.0;
                            let a = (-SAMPLE_RATE_HZ / 2.0 - f_lo) / p.bandwidth_hz;
                            let b = (SAMPLE_RATE_HZ / 2.0 - f_lo) / p.bandwidth_hz;
                            (p.pulse_width_s * a.max(0.0), p.pulse_width_s * b.min(1.0))
                        } else {
                            (0.0, p.pulse_width_s)
                        };
                        (start + tau0).max(0.0) < (start + tau1).min(WINDOW_S)
                    })
                    .count();
                assert_eq!(ann.radar_boxes.len(), expected, "type {radar_type} seed {seed}");
            }
        }
    }

    #[test]
    fn boxes_lie_in_unit_square() {
        for radar_type in 1..=5u8 {
            for seed in 0..30 {
                let p = sample_radar_params(radar_type, seed).unwrap();
                let (_, ann) = synth_radar(&p, WINDOW_S, SAMPLE_RATE_HZ).unwrap();
                for b in &ann.radar_boxes {
                    let (t0, t1) = b.time_span();
                    let (f0, f1) = b.freq_span();
                    assert!(t0 >= -1e-9 && t1 <= 1.0 + 1e-9);
                    assert!(f0 >= -1e-9 && f1 <= 1.0 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn tone_energy_stays_inside_box_time_extent() {
        // Rectangular envelopes put all signal energy inside the annotated
        // time spans by construction; check through the sample domain.
        for seed in 0..10 {
            let p = sample_radar_params(1, seed).unwrap();
            let (capture, ann) = synth_radar(&p, WINDOW_S, SAMPLE_RATE_HZ).unwrap();
            let n = capture.samples.len() as f64;
            let total: f64 = capture.samples.iter().map(|s| s.norm_sqr() as f64).sum();
            if total == 0.0 {
                continue;
            }
            let mut inside = 0.0;
            for (i, s) in capture.samples.iter().enumerate() {
                let t = i as f64 / n;
                if ann.radar_boxes.iter().any(|b| {
                    let (t0, t1) = b.time_span();
                    t >= t0 - 1e-9 && t <= t1 + 1e-9
                }) {
                    inside += s.norm_sqr() as f64;
                }
            }
            assert!(inside / total > 0.999, "seed {seed}: {}", inside / total);
        }
    }
}
