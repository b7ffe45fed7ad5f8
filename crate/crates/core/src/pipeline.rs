//! Two-flow orchestration: the full per-window decision chain.
//!
//! Flow 1 always runs: spectrogram → grid detector → decode at the
//! calibrated object threshold `t_o`. Interference verdicts are final here.
//! Flow 2 — wavelet stack → scalogram classifier against `t_w` — is lazy: it
//! runs *only* when flow 1 called the window radar-negative. A positive
//! classifier re-decodes the already-computed grid at the relaxed override
//! threshold `t_o^w` (radar products only); recovered cells upgrade the
//! verdict with a parameter estimate ([`Provenance::Flow2Override`]), while
//! an empty re-decode still reports radar, just without an estimate
//! ([`Provenance::Flow2DetectOnly`]).
//!
//! [`Pipeline::run_stream`] chops a longer capture into 16 ms windows and
//! decides each independently: 80 ms in, five verdicts out.
//!
//! # Example
//!
//! ```
//! use specsense::classifier::ClassifierModel;
//! use specsense::detector::{CalibrationStats, DetectorModel};
//! use specsense::io::config::{ClassifierConfig, ConvBlockConfig, DetectorConfig};
//! use specsense::pipeline::Pipeline;
//! use specsense::synth::noise_capture;
//!
//! let mut det_cfg = DetectorConfig::default();
//! det_cfg.conv_blocks =
//!     vec![ConvBlockConfig { channels: 4, kernel: 3, stride_rows: 8, stride_cols: 2 }];
//! let mut cls_cfg = ClassifierConfig::default();
//! cls_cfg.conv_blocks =
//!     vec![ConvBlockConfig { channels: 4, kernel: 3, stride_rows: 8, stride_cols: 8 }];
//!
//! let calibration = CalibrationStats {
//!     c_ro_max: 0.6, c_ro_min: 0.3, c_io_max: 0.6, c_io_min: 0.3, c_bno_max: 0.2,
//! };
//! let pipeline = Pipeline::new(
//!     DetectorModel::build(&det_cfg, 1).unwrap(),
//!     ClassifierModel::build(&cls_cfg, 2).unwrap(),
//!     calibration,
//!     0.5,
//! );
//!
//! let window = noise_capture(160_000, 3);
//! let record = pipeline.process_window(&window).unwrap();
//! // Flow 2 runs exactly when flow 1 saw no radar.
//! let flow1_radar = record.decision.radar_present && !record.flow2_invoked;
//! assert_eq!(record.flow2_invoked, !flow1_radar);
//! ```

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::classifier::{ClassifierModel, WaveletCalibration};
use crate::detector::{
    decode, decode_class, estimate_interference, estimate_radar, CalibrationStats, DetectorModel,
    Detection,
};
use crate::error::{Error, Result};
use crate::nn::Checkpoint;
use crate::spectrogram::make_spectrogram;
use crate::types::{Decision, IQCapture, ObjClass, Provenance, WINDOW_SAMPLES};
use crate::wavelet::WaveletEngine;

// ─── checkpoint layout ───────────────────────────────────────────────────────

/// Grid-detector checkpoint filename inside a checkpoint directory.
pub const DETECTOR_CKPT: &str = "radyolo.ckpt";
/// Scalogram-classifier checkpoint filename inside a checkpoint directory.
pub const CLASSIFIER_CKPT: &str = "wavelet.ckpt";

/// The calibration sidecar that lives next to a checkpoint
/// (`radyolo.ckpt` → `radyolo.calib`).
pub fn calib_path(ckpt: &Path) -> PathBuf {
    ckpt.with_extension("calib")
}

// ─── records ─────────────────────────────────────────────────────────────────

/// Everything the pipeline concluded about one 16 ms window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    pub decision: Decision,
    /// Detections backing the radar verdict: flow-1 radar cells, or the
    /// override re-decode's cells. Empty when radar is absent or detect-only.
    pub radar_detections: Vec<Detection>,
    /// Flow-1 interference detections (interference never goes to flow 2).
    pub interference_detections: Vec<Detection>,
    /// Classifier score, present iff flow 2 ran.
    pub classifier_score: Option<f64>,
    /// Whether the scalogram flow was invoked at all.
    pub flow2_invoked: bool,
    /// Wall-clock seconds spent in flow 1 (spectrogram + detector + decode).
    pub flow1_seconds: f64,
    /// Wall-clock seconds spent in flow 2 (zero when it never ran).
    pub flow2_seconds: f64,
}

// ─── pipeline ────────────────────────────────────────────────────────────────

/// Both trained flows plus their calibrated thresholds and the wavelet
/// engine (kernel spectra are precomputed once and reused per window).
pub struct Pipeline {
    pub detector: DetectorModel,
    pub classifier: ClassifierModel,
    pub calibration: CalibrationStats,
    pub t_w: f64,
    wavelet: WaveletEngine,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline")
            .field("calibration", &self.calibration)
            .field("t_w", &self.t_w)
            .finish_non_exhaustive()
    }
}

impl Pipeline {
    pub fn new(
        detector: DetectorModel,
        classifier: ClassifierModel,
        calibration: CalibrationStats,
        t_w: f64,
    ) -> Pipeline {
        Pipeline { detector, classifier, calibration, t_w, wavelet: WaveletEngine::standard() }
    }

    /// Load both checkpoints and their calibration sidecars from a directory
    /// laid out by `train` + `calibrate` ([`DETECTOR_CKPT`],
    /// [`CLASSIFIER_CKPT`], and their [`calib_path`] neighbours).
    pub fn load(dir: &Path) -> Result<Pipeline> {
        let need = |path: &Path, what: &str| -> Result<()> {
            if path.is_file() {
                Ok(())
            } else {
                Err(Error::Configuration(format!("missing {what}: {}", path.display())))
            }
        };
        let det_path = dir.join(DETECTOR_CKPT);
        let cls_path = dir.join(CLASSIFIER_CKPT);
        need(&det_path, "detector checkpoint")?;
        need(&cls_path, "classifier checkpoint")?;
        need(&calib_path(&det_path), "detector calibration sidecar")?;
        need(&calib_path(&cls_path), "classifier calibration sidecar")?;

        let detector = DetectorModel::from_checkpoint(&Checkpoint::load(&det_path)?)?;
        let classifier = ClassifierModel::from_checkpoint(&Checkpoint::load(&cls_path)?)?;
        let calibration = CalibrationStats::load(&calib_path(&det_path))?;
        let t_w = WaveletCalibration::load(&calib_path(&cls_path))?.t_w;
        Ok(Pipeline::new(detector, classifier, calibration, t_w))
    }

    /// Decide one 16 ms window.
    pub fn process_window(&self, window: &IQCapture) -> Result<WindowRecord> {
        // Flow 1: spectrogram, grid detector, decode at t_o.
        let flow1_start = Instant::now();
        let spect = make_spectrogram(window)?;
        let grid = self.detector.predict(&spect)?;
        let t_o = self.calibration.object_threshold();
        let (mut radar_detections, interference_detections): (Vec<Detection>, Vec<Detection>) =
            decode(&grid, t_o).into_iter().partition(|d| d.class == ObjClass::Radar);

        let interference_present = !interference_detections.is_empty();
        let interference_estimate = if interference_present {
            Some(estimate_interference(&interference_detections)?)
        } else {
            None
        };
        let flow1_radar = !radar_detections.is_empty();
        let flow1_seconds = flow1_start.elapsed().as_secs_f64();

        // Flow 2: only when flow 1 saw no radar.
        let mut provenance = Provenance::Flow1;
        let mut radar_present = flow1_radar;
        let mut classifier_score = None;
        let mut flow2_seconds = 0.0;
        let flow2_invoked = !flow1_radar;
        if flow2_invoked {
            let flow2_start = Instant::now();
            let stack = self.wavelet.make_wavelet_stack(window)?;
            let score = self.classifier.predict(&stack)?;
            classifier_score = Some(score);
            if score >= self.t_w {
                radar_present = true;
                // Relaxed re-decode of the grid flow 1 already computed.
                radar_detections =
                    decode_class(&grid, self.calibration.override_threshold(), ObjClass::Radar);
                provenance = if radar_detections.is_empty() {
                    Provenance::Flow2DetectOnly
                } else {
                    Provenance::Flow2Override
                };
            }
            flow2_seconds = flow2_start.elapsed().as_secs_f64();
        }

        let radar_estimate = if radar_detections.is_empty() {
            None
        } else {
            Some(estimate_radar(&radar_detections)?)
        };
        Ok(WindowRecord {
            decision: Decision {
                radar_present,
                interference_present,
                radar_estimate,
                interference_estimate,
                provenance,
            },
            radar_detections,
            interference_detections,
            classifier_score,
            flow2_invoked,
            flow1_seconds,
            flow2_seconds,
        })
    }

    /// Decide every complete 16 ms window in a longer capture. A trailing
    /// partial window is dropped; a capture shorter than one window is an
    /// error.
    pub fn run_stream(&self, capture: &IQCapture) -> Result<Vec<WindowRecord>> {
        if capture.samples.len() < WINDOW_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "stream has {} samples, need at least one {WINDOW_SAMPLES}-sample window",
                capture.samples.len()
            )));
        }
        capture
            .samples
            .chunks_exact(WINDOW_SAMPLES)
            .map(|chunk| {
                self.process_window(&IQCapture {
                    samples: chunk.to_vec(),
                    sample_rate_hz: capture.sample_rate_hz,
                    center_freq_hz: capture.center_freq_hz,
                })
            })
            .collect()
    }
}

// ─── tests ───────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::config::{ClassifierConfig, ConvBlockConfig, DetectorConfig};
    use crate::synth::noise_capture;

    fn tiny_pipeline(calibration: CalibrationStats, t_w: f64) -> Pipeline {
        let mut det_cfg = DetectorConfig::default();
        det_cfg.conv_blocks =
            vec![ConvBlockConfig { channels: 4, kernel: 3, stride_rows: 8, stride_cols: 2 }];
        let mut cls_cfg = ClassifierConfig::default();
        cls_cfg.conv_blocks =
            vec![ConvBlockConfig { channels: 4, kernel: 3, stride_rows: 8, stride_cols: 8 }];
        Pipeline::new(
            DetectorModel::build(&det_cfg, 41).unwrap(),
            ClassifierModel::build(&cls_cfg, 42).unwrap(),
            calibration,
            t_w,
        )
    }

    fn stats(t_o: f64, t_ow: f64) -> CalibrationStats {
        CalibrationStats {
            c_ro_max: t_o,
            c_ro_min: t_ow,
            c_io_max: t_o,
            c_io_min: t_ow,
            c_bno_max: 0.0,
        }
    }

    fn record_invariants(r: &WindowRecord) {
        // Flow 2 runs exactly when flow 1 found no radar.
        let flow1_radar = r.decision.provenance == Provenance::Flow1 && r.decision.radar_present;
        assert_eq!(r.flow2_invoked, !flow1_radar);
        assert_eq!(r.classifier_score.is_some(), r.flow2_invoked);
        assert_eq!(r.flow2_seconds > 0.0, r.flow2_invoked);
        // Estimates exist exactly when their detections do.
        assert_eq!(r.decision.radar_estimate.is_some(), !r.radar_detections.is_empty());
        assert_eq!(
            r.decision.interference_present,
            !r.interference_detections.is_empty()
        );
        assert_eq!(
            r.decision.interference_estimate.is_some(),
            r.decision.interference_present
        );
        // Provenance is consistent with the verdict.
        match r.decision.provenance {
            Provenance::Flow1 => {}
            Provenance::Flow2Override => {
                assert!(r.decision.radar_present && !r.radar_detections.is_empty());
            }
            Provenance::Flow2DetectOnly => {
                assert!(r.decision.radar_present && r.radar_detections.is_empty());
                assert!(r.decision.radar_estimate.is_none());
            }
        }
        if !r.flow2_invoked {
            assert_eq!(r.decision.provenance, Provenance::Flow1);
        }
    }

    #[test]
    fn flow1_positive_skips_flow2() {
        // t_o = 0 decodes every cell, so flow 1 always finds something; an
        // untrained net's class scores pick radar or interference per cell,
        // but at least one radar cell shows up across seeds in practice.
        let p = tiny_pipeline(stats(0.0, 0.0), 0.5);
        let r = p.process_window(&noise_capture(WINDOW_SAMPLES, 7)).unwrap();
        record_invariants(&r);
        assert_eq!(
            r.radar_detections.len() + r.interference_detections.len(),
            crate::types::GRID_CELLS
        );
        if !r.radar_detections.is_empty() {
            assert!(!r.flow2_invoked);
            assert_eq!(r.flow2_seconds, 0.0);
            assert!(r.classifier_score.is_none());
        }
    }

    #[test]
    fn flow2_override_recovers_cells() {
        // Impossible t_o forces flow 1 radar-negative; t_w = 0 makes the
        // classifier fire; t_o^w = 0 recovers every cell radar-side.
        let p = tiny_pipeline(stats(2.0, 0.0), 0.0);
        let r = p.process_window(&noise_capture(WINDOW_SAMPLES, 8)).unwrap();
        record_invariants(&r);
        assert!(r.flow2_invoked);
        assert_eq!(r.decision.provenance, Provenance::Flow2Override);
        assert!(r.decision.radar_present);
        assert_eq!(r.radar_detections.len(), crate::types::GRID_CELLS);
        assert!(r.decision.radar_estimate.is_some());
        // Flow 1's interference verdict is untouched by the override: t_o = 2
        // decoded nothing.
        assert!(!r.decision.interference_present);
    }

    #[test]
    fn flow2_detect_only_when_override_finds_nothing() {
        let p = tiny_pipeline(stats(2.0, 2.0), 0.0);
        let r = p.process_window(&noise_capture(WINDOW_SAMPLES, 9)).unwrap();
        record_invariants(&r);
        assert_eq!(r.decision.provenance, Provenance::Flow2DetectOnly);
        assert!(r.decision.radar_present);
        assert!(r.radar_detections.is_empty());
        assert!(r.decision.radar_estimate.is_none());
    }

    #[test]
    fn both_flows_negative_keeps_flow1_provenance() {
        let p = tiny_pipeline(stats(2.0, 0.0), 1.5);
        let r = p.process_window(&noise_capture(WINDOW_SAMPLES, 10)).unwrap();
        record_invariants(&r);
        assert!(r.flow2_invoked);
        assert!(!r.decision.radar_present);
        assert_eq!(r.decision.provenance, Provenance::Flow1);
        assert!(r.classifier_score.unwrap() < 1.5);
    }

    #[test]
    fn stream_yields_one_record_per_complete_window() {
        let p = tiny_pipeline(stats(0.0, 0.0), 0.5);
        // 80 ms plus a partial window: still exactly five decisions.
        let mut capture = noise_capture(5 * WINDOW_SAMPLES + 1000, 11);
        let records = p.run_stream(&capture).unwrap();
        assert_eq!(records.len(), 5);
        for r in &records {
            record_invariants(r);
        }
        // Each record matches deciding that window alone.
        let lone = p
            .process_window(&IQCapture {
                samples: capture.samples[WINDOW_SAMPLES..2 * WINDOW_SAMPLES].to_vec(),
                sample_rate_hz: capture.sample_rate_hz,
                center_freq_hz: capture.center_freq_hz,
            })
            .unwrap();
        assert_eq!(records[1].decision, lone.decision);

        capture.samples.truncate(WINDOW_SAMPLES - 1);
        assert!(matches!(p.run_stream(&capture), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn load_reports_which_file_is_missing() {
        let dir = tempfile::tempdir().unwrap();
        let err = Pipeline::load(dir.path()).unwrap_err();
        match err {
            Error::Configuration(msg) => assert!(msg.contains(DETECTOR_CKPT), "{msg}"),
            other => panic!("expected configuration error, got {other:?}"),
        }
    }

    #[test]
    fn load_round_trips_a_saved_pipeline() {
        let dir = tempfile::tempdir().unwrap();
        let p = tiny_pipeline(stats(0.6, 0.3), 0.42);
        p.detector.to_checkpoint().save(&dir.path().join(DETECTOR_CKPT)).unwrap();
        p.classifier.to_checkpoint().save(&dir.path().join(CLASSIFIER_CKPT)).unwrap();
        p.calibration.save(&calib_path(&dir.path().join(DETECTOR_CKPT))).unwrap();
        WaveletCalibration { t_w: p.t_w }
            .save(&calib_path(&dir.path().join(CLASSIFIER_CKPT)))
            .unwrap();

        let back = Pipeline::load(dir.path()).unwrap();
        assert_eq!(back.calibration, p.calibration);
        assert_eq!(back.t_w, p.t_w);
        let window = noise_capture(WINDOW_SAMPLES, 12);
        let a = p.process_window(&window).unwrap();
        let b = back.process_window(&window).unwrap();
        assert_eq!(a.decision, b.decision);
        assert_eq!(a.radar_detections, b.radar_detections);
    }
}
