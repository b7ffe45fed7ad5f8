//! End-to-end experiment driver: synthesize, train, calibrate, evaluate,
//! report.
//!
//! Training experiments (E1, E3) stream their training set through feature
//! extraction, fit both flows, calibrate the thresholds, and save all four
//! checkpoint-directory artifacts. Reuse experiments (E2A/E2B, E4A/E4B) load
//! that directory untouched — they never retrain — and only synthesize their
//! own test sets.
//!
//! Reports go to the output directory as CSV slices (`per_type.csv`,
//! `per_snr.csv`, `per_inr.csv`, plus `training.csv` for training
//! experiments) and one structured-text `summary.txt`. Every value is a
//! deterministic function of `(spec, config)` — no timestamps, no machine
//! info — so identical runs produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::classifier::{calibrate_tw, train_waveletcnn, WaveletCalibration};
use crate::detector::{calibrate, train_radyolo, CalibrationStats};
use crate::error::{Error, Result};
use crate::eval::data::{for_each_capture, ExperimentSpec};
use crate::eval::metrics::{compute_metrics, MetricsReport, ScoredExample};
use crate::io::config::Config;
use crate::nn::TrainReport;
use crate::pipeline::{calib_path, Pipeline, CLASSIFIER_CKPT, DETECTOR_CKPT};
use crate::spectrogram::{annotate_grid, make_spectrogram, SpectrogramTensor};
use crate::types::GridTarget;
use crate::wavelet::{ScalogramTensor, WaveletEngine};

// ─── artifacts ───────────────────────────────────────────────────────────────

/// Everything a finished experiment leaves behind in memory.
#[derive(Debug)]
pub struct RunArtifacts {
    pub spec: ExperimentSpec,
    /// Metrics over the whole test set.
    pub overall: MetricsReport,
    /// Per-example truths and verdicts, in generation order.
    pub examples: Vec<ScoredExample>,
    pub calibration: CalibrationStats,
    pub t_w: f64,
    /// Loss curves; present only when this experiment trained.
    pub detector_training: Option<TrainReport>,
    pub classifier_training: Option<TrainReport>,
    /// Report files written, in a stable order.
    pub report_paths: Vec<PathBuf>,
}

/// The structured-text summary written next to the CSV slices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub experiment: String,
    pub model_source: String,
    pub train_per_stratum: usize,
    pub test_captures: usize,
    pub seed: u64,
    /// Flow-1 object threshold t_o.
    pub object_threshold: f64,
    /// Flow-2 relaxed re-decode threshold t_o^w.
    pub override_threshold: f64,
    /// Scalogram classifier threshold t_w.
    pub wavelet_threshold: f64,
    /// Windows on which the scalogram flow ran.
    pub flow2_invocations: usize,
    /// Windows flow 1 called radar-negative (always equals the above).
    pub flow1_radar_negatives: usize,
    pub overall: MetricsReport,
}

// ─── training ────────────────────────────────────────────────────────────────

fn take_all<T>(slots: Mutex<Vec<Option<T>>>) -> Vec<T> {
    slots
        .into_inner()
        .expect("feature mutex poisoned")
        .into_iter()
        // Every position in the generation plan is visited exactly once.
        .map(|s| s.expect("streaming pass filled every slot"))
        .collect()
}

/// Stream the training set into detector and classifier feature pairs.
fn train_features(
    spec: &ExperimentSpec,
) -> Result<(Vec<(SpectrogramTensor, GridTarget)>, Vec<(ScalogramTensor, bool)>)> {
    let n = spec.train_strata.len() * spec.train_per_stratum;
    let engine = WaveletEngine::standard();
    let det = Mutex::new(vec![None; n]);
    let cls = Mutex::new(vec![None; n]);
    for_each_capture(spec, "train", |pos, stratum, ex| {
        let spect = make_spectrogram(&ex.capture)?;
        let target = annotate_grid(&ex.meta.annotation);
        let stack = engine.make_wavelet_stack(&ex.capture)?;
        det.lock().expect("feature mutex poisoned")[pos] = Some((spect, target));
        cls.lock().expect("feature mutex poisoned")[pos] = Some((stack, stratum.radar));
        Ok(())
    })?;
    Ok((take_all(det), take_all(cls)))
}

/// Train both flows, calibrate, and persist the checkpoint directory.
fn train_models(
    spec: &ExperimentSpec,
    cfg: &Config,
    ckpt_dir: &Path,
) -> Result<(Pipeline, TrainReport, TrainReport)> {
    let (det_data, cls_data) = train_features(spec)?;

    let (detector, det_report) = train_radyolo(&det_data, None, &cfg.detector)?;
    let calibration = calibrate(&detector, &det_data)?;
    drop(det_data);

    let (classifier, cls_report) = train_waveletcnn(&cls_data, None, &cfg.classifier)?;
    let radar_stacks: Vec<ScalogramTensor> =
        cls_data.into_iter().filter(|(_, label)| *label).map(|(s, _)| s).collect();
    let t_w = calibrate_tw(&classifier, &radar_stacks, cfg.classifier.g_percentile)?;
    drop(radar_stacks);

    fs::create_dir_all(ckpt_dir)?;
    let det_path = ckpt_dir.join(DETECTOR_CKPT);
    let cls_path = ckpt_dir.join(CLASSIFIER_CKPT);
    detector.to_checkpoint().save(&det_path)?;
    classifier.to_checkpoint().save(&cls_path)?;
    calibration.save(&calib_path(&det_path))?;
    WaveletCalibration { t_w }.save(&calib_path(&cls_path))?;

    Ok((Pipeline::new(detector, classifier, calibration, t_w), det_report, cls_report))
}

// ─── evaluation ──────────────────────────────────────────────────────────────

/// Run the pipeline over the experiment's test set (streamed, parallel).
fn evaluate_test_set(spec: &ExperimentSpec, pipeline: &Pipeline) -> Result<Vec<ScoredExample>> {
    let out = Mutex::new(vec![None; spec.test_captures]);
    for_each_capture(spec, "test", |pos, _, ex| {
        let record = pipeline.process_window(&ex.capture)?;
        out.lock().expect("scoring mutex poisoned")[pos] =
            Some(ScoredExample { meta: ex.meta, record });
        Ok(())
    })?;
    Ok(take_all(out))
}

// ─── reporting ───────────────────────────────────────────────────────────────

fn metrics_over<'a>(
    examples: impl Iterator<Item = &'a ScoredExample>,
) -> Result<MetricsReport> {
    let (records, metas): (Vec<_>, Vec<_>) =
        examples.map(|e| (e.record.clone(), e.meta.clone())).unzip();
    compute_metrics(&records, &metas)
}

fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let mut text = lines.join("\n");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Write every report file; returns the overall metrics and the paths.
fn write_reports(
    spec: &ExperimentSpec,
    pipeline: &Pipeline,
    examples: &[ScoredExample],
    training: (&Option<TrainReport>, &Option<TrainReport>),
    out_dir: &Path,
) -> Result<(MetricsReport, Vec<PathBuf>)> {
    fs::create_dir_all(out_dir)?;
    let mut paths = Vec::new();
    let overall = metrics_over(examples.iter())?;

    // Per radar type: 5 rows.
    let per_type = out_dir.join("per_type.csv");
    let mut lines = vec![format!("radar_type,{}", MetricsReport::CSV_FIELDS)];
    for t in 1..=5u8 {
        let m = metrics_over(examples.iter().filter(|e| e.radar_type() == Some(t)))?;
        lines.push(format!("{t},{}", m.csv_row()));
    }
    write_lines(&per_type, &lines)?;
    paths.push(per_type);

    // Per (radar type, SNR): |types| × |grid| rows.
    let per_snr = out_dir.join("per_snr.csv");
    let mut lines = vec![format!("radar_type,snr_db,{}", MetricsReport::CSV_FIELDS)];
    for t in 1..=5u8 {
        for &snr in &spec.snr_grid_db {
            let m = metrics_over(
                examples
                    .iter()
                    .filter(|e| e.radar_type() == Some(t) && e.snr_db() == Some(snr)),
            )?;
            lines.push(format!("{t},{snr},{}", m.csv_row()));
        }
    }
    write_lines(&per_snr, &lines)?;
    paths.push(per_snr);

    // Per INR: |grid| rows (all-NA for interference-free experiments).
    let per_inr = out_dir.join("per_inr.csv");
    let mut lines = vec![format!("inr_db,{}", MetricsReport::CSV_FIELDS)];
    for &inr in &spec.inr_grid_db {
        let m = metrics_over(examples.iter().filter(|e| e.inr_db() == Some(inr)))?;
        lines.push(format!("{inr},{}", m.csv_row()));
    }
    write_lines(&per_inr, &lines)?;
    paths.push(per_inr);

    // Loss curves, for training experiments.
    if let (Some(det), Some(cls)) = training {
        let curves = out_dir.join("training.csv");
        let mut lines = vec!["flow,epoch,train_loss".to_string()];
        for (flow, report) in [("radyolo", det), ("wavelet", cls)] {
            for (epoch, loss) in report.train_loss.iter().enumerate() {
                lines.push(format!("{flow},{},{loss:.6}", epoch + 1));
            }
        }
        write_lines(&curves, &lines)?;
        paths.push(curves);
    }

    // Structured-text summary.
    let flow2 = examples.iter().filter(|e| e.record.flow2_invoked).count();
    let flow1_neg = examples
        .iter()
        .filter(|e| {
            !(e.record.decision.radar_present
                && e.record.decision.provenance == crate::types::Provenance::Flow1)
        })
        .count();
    let summary = RunSummary {
        experiment: spec.id.to_string(),
        model_source: spec.model_source.to_string(),
        train_per_stratum: if spec.trains_models() { spec.train_per_stratum } else { 0 },
        test_captures: spec.test_captures,
        seed: spec.seed,
        object_threshold: pipeline.calibration.object_threshold(),
        override_threshold: pipeline.calibration.override_threshold(),
        wavelet_threshold: pipeline.t_w,
        flow2_invocations: flow2,
        flow1_radar_negatives: flow1_neg,
        overall: overall.clone(),
    };
    let summary_path = out_dir.join("summary.txt");
    fs::write(&summary_path, toml::to_string_pretty(&summary).map_err(Error::from)?)?;
    paths.push(summary_path);

    Ok((overall, paths))
}

// ─── the driver ──────────────────────────────────────────────────────────────

/// Run one experiment end to end.
///
/// Training experiments write checkpoints + calibration into `ckpt_dir`;
/// reuse experiments read that directory and leave it untouched. Reports
/// land in `out_dir`.
pub fn run_experiment(
    spec: &ExperimentSpec,
    cfg: &Config,
    ckpt_dir: &Path,
    out_dir: &Path,
) -> Result<RunArtifacts> {
    let (pipeline, det_report, cls_report) = if spec.trains_models() {
        let (p, d, c) = train_models(spec, cfg, ckpt_dir)?;
        (p, Some(d), Some(c))
    } else {
        (Pipeline::load(ckpt_dir)?, None, None)
    };

    let examples = evaluate_test_set(spec, &pipeline)?;
    let (overall, report_paths) =
        write_reports(spec, &pipeline, &examples, (&det_report, &cls_report), out_dir)?;

    Ok(RunArtifacts {
        spec: spec.clone(),
        overall,
        examples,
        calibration: pipeline.calibration,
        t_w: pipeline.t_w,
        detector_training: det_report,
        classifier_training: cls_report,
        report_paths,
    })
}

// ─── tests ───────────────────────────────────────────────────────────────────
