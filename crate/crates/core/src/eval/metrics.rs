//! Evaluation metrics: detection rates plus parameter-error statistics.
//!
//! [`compute_metrics`] scores aligned decision/truth lists. Detection rates
//! cover the whole slice; parameter-error means cover only examples where
//! the object was truly present, correctly detected, *and* an estimate was
//! produced (a detect-only radar verdict counts for the rates but not the
//! error means). Bandwidth metrics live in band coordinates `[0, 10]` MHz —
//! truth bands wider than the monitored band (unclipped chirp sweeps) are
//! clipped to it. A mean over an empty subset is NaN, printed as `NA` by the
//! CSV formatter. Stratified tables come from slicing the example list and
//! calling this once per slice.
//!
//! # Example
//!
//! ```
//! use specsense::eval::compute_metrics;
//! use specsense::pipeline::WindowRecord;
//! use specsense::types::{CaptureMeta, Decision, Provenance};
//!
//! // One pure-noise window the pipeline correctly called empty.
//! let truth = CaptureMeta {
//!     sample_rate_hz: 10.0e6,
//!     duration_s: 0.016,
//!     seed: 0,
//!     annotation: Default::default(),
//! };
//! let record = WindowRecord {
//!     decision: Decision {
//!         radar_present: false,
//!         interference_present: false,
//!         radar_estimate: None,
//!         interference_estimate: None,
//!         provenance: Provenance::Flow1,
//!     },
//!     radar_detections: vec![],
//!     interference_detections: vec![],
//!     classifier_score: None,
//!     flow2_invoked: true,
//!     flow1_seconds: 0.0,
//!     flow2_seconds: 0.0,
//! };
//! let report = compute_metrics(&[record], &[truth]).unwrap();
//! assert_eq!(report.p_c_r, 1.0);
//! assert_eq!(report.p_f_r, 0.0);
//! assert!(report.p_d_r.is_nan()); // no radar examples in the slice
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::WindowRecord;
use crate::types::{CaptureMeta, RadarParams, GRID_CELLS, WINDOW_S};

/// Monitored-band width; bandwidth metrics are expressed in band
/// coordinates `[0, BAND_MHZ]`.
const BAND_MHZ: f64 = 10.0;

// ─── scored examples ─────────────────────────────────────────────────────────

/// One evaluated capture: what was synthesized and what the pipeline said.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredExample {
    pub meta: CaptureMeta,
    pub record: WindowRecord,
}

impl ScoredExample {
    pub fn radar_type(&self) -> Option<u8> {
        self.meta.annotation.radar_truth.map(|p| p.radar_type)
    }

    pub fn snr_db(&self) -> Option<f64> {
        self.meta.annotation.radar_truth.map(|p| p.snr_db)
    }

    pub fn inr_db(&self) -> Option<f64> {
        self.meta.annotation.interference_truth.as_ref().map(|p| p.inr_db)
    }
}

// ─── report ──────────────────────────────────────────────────────────────────

/// Detection-rate and parameter-error summary of one example slice.
///
/// Denominator counts ride along so every rate is auditable; NaN marks a
/// rate or mean whose denominator was zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub examples: usize,
    pub radar_examples: usize,
    pub interference_examples: usize,
    /// Radar truly present, detected, and parameters estimated.
    pub radar_param_examples: usize,
    /// Of those, examples where a pulse-interval estimate exists too.
    pub pulse_interval_examples: usize,
    /// Interference truly present, detected, and parameters estimated.
    pub interference_param_examples: usize,

    /// Radar-vs-no-radar classification accuracy.
    pub p_c_r: f64,
    /// Radar true-positive rate.
    pub p_d_r: f64,
    /// Radar false-positive rate (over no-radar examples).
    pub p_f_r: f64,
    /// Interference-vs-no-interference classification accuracy.
    pub p_c_i: f64,
    /// Interference true-positive rate.
    pub p_d_i: f64,
    /// Interference false-positive rate (over no-interference examples).
    pub p_f_i: f64,

    /// Mean truth bandwidth the estimate missed, MHz.
    pub b_m_r_mhz: f64,
    /// Mean estimated bandwidth outside the truth band, MHz.
    pub b_e_r_mhz: f64,
    /// Mean percentage of true pulses covered by a radar-classified cell.
    pub n_p_r_pct: f64,
    /// Mean absolute pulse-width error, µs.
    pub e_pw_r_us: f64,
    /// Mean absolute pulse-interval error, µs.
    pub e_pi_r_us: f64,
    /// Mean interference ON time missed, ms.
    pub t_m_i_ms: f64,
    /// Mean interference ON time estimated in excess, ms.
    pub t_e_i_ms: f64,
}

impl MetricsReport {
    /// CSV column names for [`csv_row`](Self::csv_row), in order.
    pub const CSV_FIELDS: &'static str = "examples,radar_examples,interference_examples,\
radar_param_examples,pulse_interval_examples,interference_param_examples,\
p_c_R,p_d_R,p_f_R,p_c_I,p_d_I,p_f_I,\
b_M_R_mhz,b_E_R_mhz,n_P_R_pct,e_PW_R_us,e_PI_R_us,t_M_I_ms,t_E_I_ms";

    /// The report as one CSV row (six decimal places, NaN as `NA`).
    pub fn csv_row(&self) -> String {
        let cell = |v: f64| if v.is_nan() { "NA".to_string() } else { format!("{v:.6}") };
        let counts = [
            self.examples,
            self.radar_examples,
            self.interference_examples,
            self.radar_param_examples,
            self.pulse_interval_examples,
            self.interference_param_examples,
        ];
        let values = [
            self.p_c_r,
            self.p_d_r,
            self.p_f_r,
            self.p_c_i,
            self.p_d_i,
            self.p_f_i,
            self.b_m_r_mhz,
            self.b_e_r_mhz,
            self.n_p_r_pct,
            self.e_pw_r_us,
            self.e_pi_r_us,
            self.t_m_i_ms,
            self.t_e_i_ms,
        ];
        counts
            .iter()
            .map(usize::to_string)
            .chain(values.iter().map(|&v| cell(v)))
            .collect::<Vec<_>>()
            .join(",")
    }
}

// ─── interval arithmetic ─────────────────────────────────────────────────────

/// Canonical union: drop empty intervals, sort, merge overlapping/touching.
fn merge_union(intervals: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut ivs: Vec<(f64, f64)> =
        intervals.iter().copied().filter(|&(lo, hi)| hi > lo).collect();
    ivs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite interval endpoints"));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(ivs.len());
    for (lo, hi) in ivs {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    merged
}

/// Total length of `A \ B` where both are unions of intervals.
fn difference_length(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let a = merge_union(a);
    let b = merge_union(b);
    let mut total = 0.0;
    for &(lo, hi) in &a {
        let mut cursor = lo;
        for &(blo, bhi) in &b {
            if bhi <= cursor {
                continue;
            }
            if blo >= hi {
                break;
            }
            if blo > cursor {
                total += blo - cursor;
            }
            cursor = cursor.max(bhi);
            if cursor >= hi {
                break;
            }
        }
        if cursor < hi {
            total += hi - cursor;
        }
    }
    total
}

// ─── per-example pieces ──────────────────────────────────────────────────────

/// Truth radar band in band coordinates, clipped to the monitored band.
fn truth_radar_band_mhz(p: &RadarParams) -> (f64, f64) {
    let lo = (p.center_freq_hz - p.bandwidth_hz / 2.0) / 1e6 + BAND_MHZ / 2.0;
    let hi = (p.center_freq_hz + p.bandwidth_hz / 2.0) / 1e6 + BAND_MHZ / 2.0;
    (lo.clamp(0.0, BAND_MHZ), hi.clamp(0.0, BAND_MHZ))
}

/// A frequency interval given as (center, width) band fractions, in band
/// coordinates clipped to the monitored band.
fn frac_band_mhz(center_frac: f64, width_frac: f64) -> (f64, f64) {
    let lo = (center_frac - width_frac / 2.0) * BAND_MHZ;
    let hi = (center_frac + width_frac / 2.0) * BAND_MHZ;
    (lo.clamp(0.0, BAND_MHZ), hi.clamp(0.0, BAND_MHZ))
}

/// The grid cell a window-fraction time instant falls in.
fn cell_of(y_frac: f64) -> usize {
    ((y_frac * GRID_CELLS as f64).floor() as isize).clamp(0, GRID_CELLS as isize - 1) as usize
}

/// ON spans (window fractions, clipped to the window) from (center,
/// duration) segments.
fn on_spans(segments: &[(f64, f64)]) -> Vec<(f64, f64)> {
    segments
        .iter()
        .map(|&(c, d)| ((c - d / 2.0).clamp(0.0, 1.0), (c + d / 2.0).clamp(0.0, 1.0)))
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn rate(num: usize, den: usize) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        num as f64 / den as f64
    }
}

// ─── computation ─────────────────────────────────────────────────────────────

/// Score aligned decision/truth lists into one [`MetricsReport`].
pub fn compute_metrics(
    decisions: &[WindowRecord],
    truths: &[CaptureMeta],
) -> Result<MetricsReport> {
    if decisions.len() != truths.len() {
        return Err(Error::InvalidArgument(format!(
            "{} decisions vs {} truths",
            decisions.len(),
            truths.len()
        )));
    }

    let n = decisions.len();
    let (mut radar_n, mut radar_tp, mut radar_fp, mut radar_correct) = (0usize, 0, 0, 0);
    let (mut interf_n, mut interf_tp, mut interf_fp, mut interf_correct) = (0usize, 0, 0, 0);
    let (mut b_m, mut b_e, mut n_p, mut e_pw, mut e_pi) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let (mut t_m, mut t_e) = (Vec::new(), Vec::new());

    for (rec, truth) in decisions.iter().zip(truths) {
        let ann = &truth.annotation;
        let truth_radar = ann.radar_truth.is_some();
        let truth_interf = ann.interference_truth.is_some();
        let said_radar = rec.decision.radar_present;
        let said_interf = rec.decision.interference_present;

        radar_n += truth_radar as usize;
        radar_tp += (truth_radar && said_radar) as usize;
        radar_fp += (!truth_radar && said_radar) as usize;
        radar_correct += (truth_radar == said_radar) as usize;
        interf_n += truth_interf as usize;
        interf_tp += (truth_interf && said_interf) as usize;
        interf_fp += (!truth_interf && said_interf) as usize;
        interf_correct += (truth_interf == said_interf) as usize;

        if let (Some(params), true, Some(est)) =
            (ann.radar_truth.as_ref(), said_radar, rec.decision.radar_estimate.as_ref())
        {
            let truth_band = [truth_radar_band_mhz(params)];
            let est_band = [frac_band_mhz(est.center_freq_frac, est.bandwidth_frac)];
            b_m.push(difference_length(&truth_band, &est_band));
            b_e.push(difference_length(&est_band, &truth_band));

            if !ann.radar_boxes.is_empty() {
                let covered: std::collections::HashSet<usize> =
                    rec.radar_detections.iter().map(|d| d.cell).collect();
                let hit = ann
                    .radar_boxes
                    .iter()
                    .filter(|b| covered.contains(&cell_of(b.y)))
                    .count();
                n_p.push(100.0 * hit as f64 / ann.radar_boxes.len() as f64);
            }

            let est_pw_s = est.pulse_width_frac * WINDOW_S;
            e_pw.push((est_pw_s - params.pulse_width_s).abs() * 1e6);
            if let Some(interval_frac) = est.pulse_interval_frac {
                let est_pi_s = interval_frac * WINDOW_S;
                e_pi.push((est_pi_s - params.pulse_interval_s).abs() * 1e6);
            }
        }

        if let (true, true, Some(est)) =
            (truth_interf, said_interf, rec.decision.interference_estimate.as_ref())
        {
            let truth_spans: Vec<(f64, f64)> =
                ann.interference_boxes.iter().map(|b| b.time_span()).collect();
            let est_spans = on_spans(&est.on_segments);
            t_m.push(difference_length(&truth_spans, &est_spans) * WINDOW_S * 1e3);
            t_e.push(difference_length(&est_spans, &truth_spans) * WINDOW_S * 1e3);
        }
    }

    Ok(MetricsReport {
        examples: n,
        radar_examples: radar_n,
        interference_examples: interf_n,
        radar_param_examples: b_m.len(),
        pulse_interval_examples: e_pi.len(),
        interference_param_examples: t_m.len(),
        p_c_r: rate(radar_correct, n),
        p_d_r: rate(radar_tp, radar_n),
        p_f_r: rate(radar_fp, n - radar_n),
        p_c_i: rate(interf_correct, n),
        p_d_i: rate(interf_tp, interf_n),
        p_f_i: rate(interf_fp, n - interf_n),
        b_m_r_mhz: mean(&b_m),
        b_e_r_mhz: mean(&b_e),
        n_p_r_pct: mean(&n_p),
        e_pw_r_us: mean(&e_pw),
        e_pi_r_us: mean(&e_pi),
        t_m_i_ms: mean(&t_m),
        t_e_i_ms: mean(&t_e),
    })
}

// ─── tests ───────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::Detection;
    use crate::types::{
        Annotation, Box, Decision, InterferenceEstimate, InterferenceKind, InterferenceParams,
        ObjClass, Provenance, RadarEstimate,
    };
    use rand::{Rng, SeedableRng};

    fn radar_params(pw_s: f64, pi_s: f64, bw_hz: f64, cf_hz: f64) -> RadarParams {
        RadarParams {
            radar_type: 1,
            pulse_width_s: pw_s,
            pulse_interval_s: pi_s,
            num_pulses: 2,
            burst_duration_s: WINDOW_S,
            bandwidth_hz: bw_hz,
            center_freq_hz: cf_hz,
            burst_start_s: 0.0,
            snr_db: 20.0,
        }
    }

    fn interference_params() -> InterferenceParams {
        InterferenceParams {
            kind: InterferenceKind::QpskOnOff,
            inr_db: 8.0,
            bandwidth_hz: 9.1e6,
            cf_offset_hz: 0.35e6,
            on_off_pattern: Vec::new(),
            ul_dl_config: 0,
        }
    }

    fn meta(
        radar: Option<RadarParams>,
        radar_boxes: Vec<Box>,
        interference: Option<InterferenceParams>,
        interference_boxes: Vec<Box>,
    ) -> CaptureMeta {
        CaptureMeta {
            sample_rate_hz: 10.0e6,
            duration_s: WINDOW_S,
            seed: 0,
            annotation: Annotation {
                radar_boxes,
                interference_boxes,
                radar_truth: radar,
                interference_truth: interference,
            },
        }
    }

    fn record(
        radar_present: bool,
        radar_cells: &[usize],
        radar_estimate: Option<RadarEstimate>,
        interference_present: bool,
        interference_estimate: Option<InterferenceEstimate>,
    ) -> WindowRecord {
        let det = |cell: usize, class| Detection {
            cell,
            class,
            confidence: 0.9,
            bbox: Box::new(0.5, (cell as f64 + 0.5) / GRID_CELLS as f64, 0.1, 0.01),
        };
        WindowRecord {
            decision: Decision {
                radar_present,
                interference_present,
                radar_estimate,
                interference_estimate,
                provenance: Provenance::Flow1,
            },
            radar_detections: radar_cells.iter().map(|&c| det(c, ObjClass::Radar)).collect(),
            interference_detections: if interference_present {
                vec![det(0, ObjClass::Interference)]
            } else {
                Vec::new()
            },
            classifier_score: None,
            flow2_invoked: false,
            flow1_seconds: 0.0,
            flow2_seconds: 0.0,
        }
    }

    /// Two pulse boxes whose centers fall in cells 3 and 19.
    fn two_pulse_boxes() -> Vec<Box> {
        vec![Box::new(0.5, 0.1, 0.16, 0.002), Box::new(0.5, 0.6, 0.16, 0.002)]
    }

    fn perfect_radar_estimate() -> RadarEstimate {
        RadarEstimate {
            num_pulses: 2,
            center_freq_frac: 0.5,
            bandwidth_frac: 0.16,
            pulse_width_frac: 0.002, // 32 µs of a 16 ms window
            pulse_interval_frac: Some(0.1),
        }
    }

    #[test]
    fn interval_difference_fixtures() {
        assert_eq!(difference_length(&[(0.0, 1.0)], &[]), 1.0);
        assert_eq!(difference_length(&[], &[(0.0, 1.0)]), 0.0);
        // Two overlapping subtrahend intervals merge before subtracting.
        let d = difference_length(&[(0.0, 1.0)], &[(0.25, 0.5), (0.4, 0.75)]);
        assert!((d - 0.5).abs() < 1e-12);
        // Disjoint pieces, one fully outside.
        let d = difference_length(&[(0.0, 0.2), (0.5, 0.7)], &[(0.1, 0.6), (2.0, 3.0)]);
        assert!((d - 0.2).abs() < 1e-12);
        // Touching intervals are one union: no gap survives.
        assert_eq!(difference_length(&[(0.0, 1.0)], &[(0.0, 0.5), (0.5, 1.0)]), 0.0);
    }

    #[test]
    fn band_fixture_matches_interval_arithmetic() {
        // Truth band [2, 4] MHz, estimate [3, 6] MHz (band coordinates):
        // 1 MHz missed, 2 MHz estimated in excess.
        let truth = radar_params(32e-6, 1.6e-3, 2.0e6, -2.0e6);
        let mut est = perfect_radar_estimate();
        est.center_freq_frac = 0.45;
        est.bandwidth_frac = 0.3;
        let truths = vec![meta(Some(truth), two_pulse_boxes(), None, Vec::new())];
        let recs = vec![record(true, &[3, 19], Some(est), false, None)];
        let r = compute_metrics(&recs, &truths).unwrap();
        assert!((r.b_m_r_mhz - 1.0).abs() < 1e-9, "b_M {}", r.b_m_r_mhz);
        assert!((r.b_e_r_mhz - 2.0).abs() < 1e-9, "b_E {}", r.b_e_r_mhz);
    }

    #[test]
    fn truth_band_clips_to_monitored_band() {
        // A 20 MHz chirp sweep centered at +1 MHz covers band coordinates
        // [0, 10] after clipping; a full-band estimate misses nothing.
        let truth = radar_params(32e-6, 1.6e-3, 20.0e6, 1.0e6);
        let mut est = perfect_radar_estimate();
        est.center_freq_frac = 0.5;
        est.bandwidth_frac = 1.0;
        let truths = vec![meta(Some(truth), two_pulse_boxes(), None, Vec::new())];
        let recs = vec![record(true, &[3, 19], Some(est), false, None)];
        let r = compute_metrics(&recs, &truths).unwrap();
        assert!(r.b_m_r_mhz.abs() < 1e-9);
        assert!(r.b_e_r_mhz.abs() < 1e-9);
    }

    #[test]
    fn perfect_predictions_score_perfectly() {
        let on_box = Box::new(0.55, 0.25, 0.91, 0.5);
        let truths = vec![
            meta(
                Some(radar_params(32e-6, 1.6e-3, 1.6e6, 0.0)),
                two_pulse_boxes(),
                None,
                Vec::new(),
            ),
            meta(None, Vec::new(), Some(interference_params()), vec![on_box]),
            meta(None, Vec::new(), None, Vec::new()),
        ];
        let interf_est = InterferenceEstimate {
            center_freq_frac: 0.55,
            bandwidth_frac: 0.91,
            on_segments: vec![(0.25, 0.5)],
        };
        let recs = vec![
            record(true, &[3, 19], Some(perfect_radar_estimate()), false, None),
            record(false, &[], None, true, Some(interf_est)),
            record(false, &[], None, false, None),
        ];
        let r = compute_metrics(&recs, &truths).unwrap();
        assert_eq!((r.p_c_r, r.p_d_r, r.p_f_r), (1.0, 1.0, 0.0));
        assert_eq!((r.p_c_i, r.p_d_i, r.p_f_i), (1.0, 1.0, 0.0));
        assert!(r.b_m_r_mhz.abs() < 1e-9);
        assert!(r.b_e_r_mhz.abs() < 1e-9);
        assert_eq!(r.n_p_r_pct, 100.0);
        assert!(r.e_pw_r_us.abs() < 1e-9);
        assert!(r.e_pi_r_us.abs() < 1e-9);
        assert_eq!(r.t_m_i_ms, 0.0);
        assert_eq!(r.t_e_i_ms, 0.0);
    }

    /// Ten hand-labeled examples covering every counting path; every field
    /// checked against values computed by hand.
    #[test]
    fn ten_example_fixture_matches_hand_computation() {
        let rp_perfect = radar_params(32e-6, 1.6e-3, 1.6e6, 0.0);
        let rp_band = radar_params(48e-6, 1.6e-3, 2.0e6, -2.0e6);
        let on_box = Box::new(0.55, 0.25, 0.91, 0.5);
        let interf_perfect = InterferenceEstimate {
            center_freq_frac: 0.55,
            bandwidth_frac: 0.91,
            on_segments: vec![(0.25, 0.5)],
        };
        // Estimate [1/16, 10/16] against truth [0, 1/2]: misses 1 ms of ON
        // time, claims 2 ms in excess.
        let interf_off = InterferenceEstimate {
            center_freq_frac: 0.55,
            bandwidth_frac: 0.91,
            on_segments: vec![(0.34375, 0.5625)],
        };
        // Bandwidth fixture plus 10 µs pulse-width error, one of two pulses
        // covered, no interval estimate.
        let est_off = RadarEstimate {
            num_pulses: 1,
            center_freq_frac: 0.45,
            bandwidth_frac: 0.3,
            pulse_width_frac: 58e-6 / WINDOW_S,
            pulse_interval_frac: None,
        };
        // Perfect except the interval: 1.7 ms estimated vs 1.6 ms truth.
        let est_interval = RadarEstimate {
            pulse_interval_frac: Some(0.10625),
            ..perfect_radar_estimate()
        };

        let truths = vec![
            meta(Some(rp_perfect), two_pulse_boxes(), None, Vec::new()), // 0
            meta(Some(rp_band), two_pulse_boxes(), None, Vec::new()),    // 1
            meta(Some(rp_perfect), two_pulse_boxes(), None, Vec::new()), // 2
            meta(None, Vec::new(), None, Vec::new()),                    // 3
            meta(None, Vec::new(), None, Vec::new()),                    // 4
            meta(None, Vec::new(), Some(interference_params()), vec![on_box]), // 5
            meta(None, Vec::new(), Some(interference_params()), vec![on_box]), // 6
            meta(None, Vec::new(), Some(interference_params()), vec![on_box]), // 7
            meta(
                Some(rp_perfect),
                vec![Box::new(0.5, 0.1, 0.16, 0.002)],
                Some(interference_params()),
                vec![on_box],
            ), // 8
            meta(
                Some(rp_perfect),
                two_pulse_boxes(),
                Some(interference_params()),
                vec![on_box],
            ), // 9
        ];
        let recs = vec![
            record(true, &[3, 19], Some(perfect_radar_estimate()), false, None), // 0: radar TP
            record(true, &[3], Some(est_off), false, None),                      // 1: radar TP
            record(false, &[], None, false, None),                               // 2: radar miss
            record(true, &[5], Some(perfect_radar_estimate()), true, Some(interf_perfect.clone())), // 3: double FP
            record(false, &[], None, false, None),                               // 4: TN
            record(false, &[], None, true, Some(interf_off)),                    // 5: interf TP
            record(false, &[], None, true, Some(interf_perfect.clone())),        // 6: interf TP
            record(false, &[], None, false, None),                               // 7: interf miss
            record(true, &[], None, true, Some(interf_perfect)),                 // 8: detect-only
            record(true, &[3, 19], Some(est_interval), false, None),             // 9: radar TP
        ];

        let r = compute_metrics(&recs, &truths).unwrap();
        assert_eq!(r.examples, 10);
        assert_eq!(r.radar_examples, 5);
        assert_eq!(r.interference_examples, 5);
        assert_eq!(r.radar_param_examples, 3); // 0, 1, 9 (8 is detect-only)
        assert_eq!(r.pulse_interval_examples, 2); // 0, 9
        assert_eq!(r.interference_param_examples, 3); // 5, 6, 8

        assert_eq!(r.p_d_r, 4.0 / 5.0);
        assert_eq!(r.p_f_r, 1.0 / 5.0);
        assert_eq!(r.p_c_r, 8.0 / 10.0);
        assert_eq!(r.p_d_i, 3.0 / 5.0);
        assert_eq!(r.p_f_i, 1.0 / 5.0);
        assert_eq!(r.p_c_i, 7.0 / 10.0);

        assert!((r.b_m_r_mhz - 1.0 / 3.0).abs() < 1e-9, "b_M {}", r.b_m_r_mhz);
        assert!((r.b_e_r_mhz - 2.0 / 3.0).abs() < 1e-9, "b_E {}", r.b_e_r_mhz);
        assert!((r.n_p_r_pct - 250.0 / 3.0).abs() < 1e-9, "n_P {}", r.n_p_r_pct);
        assert!((r.e_pw_r_us - 10.0 / 3.0).abs() < 1e-9, "e_PW {}", r.e_pw_r_us);
        assert!((r.e_pi_r_us - 50.0).abs() < 1e-9, "e_PI {}", r.e_pi_r_us);
        assert!((r.t_m_i_ms - 1.0 / 3.0).abs() < 1e-9, "t_M {}", r.t_m_i_ms);
        assert!((r.t_e_i_ms - 2.0 / 3.0).abs() < 1e-9, "t_E {}", r.t_e_i_ms);
    }

    #[test]
    fn false_positive_rate_uses_no_radar_denominator() {
        // 7 radar examples all detected, 3 no-radar examples with 1 false
        // positive: p_f_R = 1/3 regardless of the radar count.
        let mut truths = Vec::new();
        let mut recs = Vec::new();
        for _ in 0..7 {
            truths.push(meta(
                Some(radar_params(32e-6, 1.6e-3, 1.6e6, 0.0)),
                two_pulse_boxes(),
                None,
                Vec::new(),
            ));
            recs.push(record(true, &[3, 19], Some(perfect_radar_estimate()), false, None));
        }
        for i in 0..3 {
            truths.push(meta(None, Vec::new(), None, Vec::new()));
            recs.push(record(i == 0, &[], None, false, None));
        }
        let r = compute_metrics(&recs, &truths).unwrap();
        assert_eq!(r.p_f_r, 1.0 / 3.0);
        assert_eq!(r.p_d_r, 1.0);
    }

    #[test]
    fn zero_denominators_go_nan_and_print_na() {
        // All-noise slice: no radar or interference examples at all.
        let truths = vec![meta(None, Vec::new(), None, Vec::new())];
        let recs = vec![record(false, &[], None, false, None)];
        let r = compute_metrics(&recs, &truths).unwrap();
        assert!(r.p_d_r.is_nan());
        assert!(r.p_d_i.is_nan());
        assert!(r.b_m_r_mhz.is_nan());
        assert!(r.t_m_i_ms.is_nan());
        assert_eq!(r.p_f_r, 0.0);

        let row = r.csv_row();
        assert!(row.contains("NA"));
        assert!(row.starts_with("1,0,0,0,0,0,"));
        assert_eq!(
            row.split(',').count(),
            MetricsReport::CSV_FIELDS.split(',').count()
        );
        assert!(!row.contains("NaN"));
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let truths = vec![meta(None, Vec::new(), None, Vec::new())];
        assert!(matches!(
            compute_metrics(&[], &truths),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn rate_identities_hold_on_random_slices() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(99);
        for _ in 0..50 {
            let n = rng.gen_range(1..30);
            let mut truths = Vec::new();
            let mut recs = Vec::new();
            let (mut tp, mut tn, mut fn_, mut fp) = (0, 0, 0, 0);
            for _ in 0..n {
                let truth_radar: bool = rng.gen();
                let said_radar: bool = rng.gen();
                match (truth_radar, said_radar) {
                    (true, true) => tp += 1,
                    (false, false) => tn += 1,
                    (true, false) => fn_ += 1,
                    (false, true) => fp += 1,
                }
                truths.push(if truth_radar {
                    meta(
                        Some(radar_params(32e-6, 1.6e-3, 1.6e6, 0.0)),
                        two_pulse_boxes(),
                        None,
                        Vec::new(),
                    )
                } else {
                    meta(None, Vec::new(), None, Vec::new())
                });
                recs.push(record(
                    said_radar,
                    if said_radar { &[3] } else { &[] },
                    said_radar.then(perfect_radar_estimate),
                    false,
                    None,
                ));
            }
            let r = compute_metrics(&recs, &truths).unwrap();
            assert_eq!(r.p_c_r, (tp + tn) as f64 / n as f64);
            if tp + fn_ > 0 {
                // Detection and miss rates partition the radar examples.
                let miss = fn_ as f64 / (tp + fn_) as f64;
                assert!((r.p_d_r + miss - 1.0).abs() < 1e-12);
            }
            if fp + tn > 0 {
                assert_eq!(r.p_f_r, fp as f64 / (fp + tn) as f64);
            }
            for v in [r.p_c_r, r.p_d_r, r.p_f_r, r.p_c_i, r.p_d_i, r.p_f_i] {
                assert!(v.is_nan() || (0.0..=1.0).contains(&v));
            }
        }
    }
}
