//! Command-line surface for the spectrum-sensing workbench.
//!
//! Five subcommands cover the whole workflow:
//!
//! * `generate` — synthesize a labeled IQ capture corpus for an experiment
//! * `train` — fit one detection flow (grid detector or scalogram
//!   classifier) from a capture directory
//! * `calibrate` — derive a trained checkpoint's decision thresholds and
//!   write them as a `.calib` sidecar
//! * `evaluate` — run a canned experiment end to end and emit report files
//! * `infer` — score a capture stream with a directory of trained
//!   checkpoints
//!
//! Captures are `<name>.iq` (interleaved little-endian f32 I/Q) with a
//! `<name>.meta` TOML truth sidecar; configuration is a TOML document
//! exposing every tunable (`specsense::io::Config`).

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use specsense::classifier::{calibrate_tw, train_waveletcnn, ClassifierModel, WaveletCalibration};
use specsense::detector::{calibrate, train_radyolo, DetectorModel, DETECTOR_KIND};
use specsense::classifier::CLASSIFIER_KIND;
use specsense::eval::{for_each_capture, run_experiment, ExperimentSpec, LabeledCapture};
use specsense::io::config::EvalConfig;
use specsense::io::{read_capture, read_meta, write_capture, write_meta, Config};
use specsense::nn::Checkpoint;
use specsense::pipeline::{calib_path, Pipeline, WindowRecord};
use specsense::spectrogram::{annotate_grid, make_spectrogram};
use specsense::types::{Decision, ExperimentId, SAMPLE_RATE_HZ, WINDOW_S};
use specsense::wavelet::{WaveletEngine, SUB_SAMPLES};

// ─── argument surface ─────────────────────────────────────────────────────────

#[derive(Parser)]
#[command(name = "specsense", version, about = "Spectrum-sensing workbench: dual-flow radar detection over synthetic CBRS captures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Flow {
    /// Spectrogram grid detector (first flow).
    Radyolo,
    /// Wavelet-scalogram binary classifier (second flow).
    Wavelet,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize an experiment's train/test capture corpus.
    Generate {
        /// Experiment id: E1, E2A, E2B, E3, E4A, or E4B.
        #[arg(long)]
        experiment: ExperimentId,
        /// Training captures per stratum; the test split gets twice this
        /// many captures in total (desk scale = 100).
        #[arg(long)]
        scale: usize,
        /// Corpus seed; every capture derives from it deterministically.
        #[arg(long)]
        seed: u64,
        /// Output directory (creates train/ and test/ beneath it).
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one detection flow from a directory of labeled captures.
    Train {
        /// Which flow to train.
        #[arg(long, value_enum)]
        flow: Flow,
        /// Directory of <name>.iq + <name>.meta training captures.
        #[arg(long)]
        data: PathBuf,
        /// Run configuration (TOML); defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Checkpoint file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Calibrate decision thresholds for a trained checkpoint.
    Calibrate {
        /// Trained checkpoint (.ckpt); the calibration sidecar is written
        /// next to it with the .calib extension.
        #[arg(long)]
        ckpt: PathBuf,
        /// Directory of labeled calibration captures.
        #[arg(long)]
        data: PathBuf,
        /// Run configuration (TOML); defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a canned experiment end to end and write its reports.
    Evaluate {
        /// Experiment id: E1, E2A, E2B, E3, E4A, or E4B.
        #[arg(long)]
        experiment: ExperimentId,
        /// Checkpoint directory: written by training experiments (E1, E3),
        /// read untouched by reuse experiments (E2A, E2B, E4A, E4B).
        #[arg(long)]
        ckpt_dir: PathBuf,
        /// Report output directory.
        #[arg(long)]
        out: PathBuf,
        /// Run configuration (TOML); defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Training captures per stratum; the test split gets twice this
        /// many. Overrides the config's experiment sizing.
        #[arg(long)]
        scale: Option<usize>,
        /// Corpus seed.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Score a capture stream with trained checkpoints.
    Infer {
        /// Input capture (.iq); a .meta sidecar next to it, if present,
        /// supplies the sample rate.
        #[arg(long)]
        input: PathBuf,
        /// Directory holding both flows' checkpoints and calibrations.
        #[arg(long)]
        ckpt_dir: PathBuf,
    },
}

// ─── shared helpers ───────────────────────────────────────────────────────────

fn load_config(path: &Option<PathBuf>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(Config::default()),
    }
}

/// Read every `<name>.iq` + `<name>.meta` pair in a directory, sorted by
/// file name so ordering is stable across platforms.
fn read_labeled_dir(dir: &Path) -> Result<Vec<LabeledCapture>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading capture directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "iq"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no .iq captures found in {}", dir.display());
    }
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let meta_path = path.with_extension("meta");
        let meta = read_meta(&meta_path)
            .with_context(|| format!("reading truth sidecar {}", meta_path.display()))?;
        let capture = read_capture(&path, meta.sample_rate_hz)
            .with_context(|| format!("reading capture {}", path.display()))?;
        out.push(LabeledCapture { capture, meta });
    }
    Ok(out)
}

fn eval_sizing(cfg: &Config, scale: Option<usize>) -> EvalConfig {
    match scale {
        Some(n) => EvalConfig { train_per_stratum: n, test_captures: 2 * n },
        None => cfg.eval.clone(),
    }
}

// ─── subcommands ─────────────────────────────────────────────────────────────

fn cmd_generate(experiment: ExperimentId, scale: usize, seed: u64, out: &Path) -> Result<()> {
    let cfg = Config::default();
    let eval = EvalConfig { train_per_stratum: scale, test_captures: 2 * scale };
    let spec = ExperimentSpec::new(experiment, &cfg.synth, &eval, seed);

    for role in ["train", "test"] {
        let role_dir = out.join(role);
        if role == "train" && !spec.trains_models() {
            continue; // reuse experiments have no training split
        }
        fs::create_dir_all(&role_dir)
            .with_context(|| format!("creating {}", role_dir.display()))?;
        let written = Mutex::new(0usize);
        for_each_capture(&spec, role, |pos, stratum, ex| {
            let stem = format!("{pos:05}_{}", stratum.label());
            write_capture(&role_dir.join(format!("{stem}.iq")), &ex.capture)?;
            write_meta(&role_dir.join(format!("{stem}.meta")), &ex.meta)?;
            *written.lock().expect("counter lock") += 1;
            Ok(())
        })?;
        println!(
            "{experiment} {role}: {} captures -> {}",
            written.into_inner().expect("counter lock"),
            role_dir.display()
        );
    }
    Ok(())
}

fn cmd_train(flow: Flow, data: &Path, config: &Option<PathBuf>, out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let examples = read_labeled_dir(data)?;
    println!("training on {} captures from {}", examples.len(), data.display());

    let ckpt = match flow {
        Flow::Radyolo => {
            let pairs: Vec<_> = examples
                .iter()
                .map(|ex| -> Result<_> {
                    Ok((make_spectrogram(&ex.capture)?, annotate_grid(&ex.meta.annotation)))
                })
                .collect::<Result<_>>()?;
            let (model, report) = train_radyolo(&pairs, None, &cfg.detector)?;
            println!(
                "grid detector: loss {:.4} -> {:.4} over {} epochs",
                report.train_loss.first().copied().unwrap_or(f64::NAN),
                report.train_loss.last().copied().unwrap_or(f64::NAN),
                report.train_loss.len()
            );
            model.to_checkpoint()
        }
        Flow::Wavelet => {
            let engine = WaveletEngine::new(cfg.morlet.to_spec(), SUB_SAMPLES, 0.2e-6)?;
            let pairs: Vec<_> = examples
                .iter()
                .map(|ex| -> Result<_> {
                    Ok((
                        engine.make_wavelet_stack(&ex.capture)?,
                        ex.meta.annotation.radar_truth.is_some(),
                    ))
                })
                .collect::<Result<_>>()?;
            let (model, report) = train_waveletcnn(&pairs, None, &cfg.classifier)?;
            println!(
                "scalogram classifier: loss {:.4} -> {:.4} over {} epochs",
                report.train_loss.first().copied().unwrap_or(f64::NAN),
                report.train_loss.last().copied().unwrap_or(f64::NAN),
                report.train_loss.len()
            );
            model.to_checkpoint()
        }
    };
    ckpt.save(out).with_context(|| format!("writing checkpoint {}", out.display()))?;
    println!("checkpoint -> {}", out.display());
    Ok(())
}

fn cmd_calibrate(ckpt_path: &Path, data: &Path, config: &Option<PathBuf>) -> Result<()> {
    let cfg = load_config(config)?;
    let ckpt = Checkpoint::load(ckpt_path)
        .with_context(|| format!("loading checkpoint {}", ckpt_path.display()))?;
    let examples = read_labeled_dir(data)?;
    let sidecar = calib_path(ckpt_path);

    match ckpt.kind.as_str() {
        DETECTOR_KIND => {
            let model = DetectorModel::from_checkpoint(&ckpt)?;
            let pairs: Vec<_> = examples
                .iter()
                .map(|ex| -> Result<_> {
                    Ok((make_spectrogram(&ex.capture)?, annotate_grid(&ex.meta.annotation)))
                })
                .collect::<Result<_>>()?;
            let stats = calibrate(&model, &pairs)?;
            stats.save(&sidecar)?;
            println!(
                "object threshold t_o={:.6}, override threshold t_o^w={:.6} -> {}",
                stats.object_threshold(),
                stats.override_threshold(),
                sidecar.display()
            );
        }
        CLASSIFIER_KIND => {
            let model = ClassifierModel::from_checkpoint(&ckpt)?;
            let engine = WaveletEngine::new(cfg.morlet.to_spec(), SUB_SAMPLES, 0.2e-6)?;
            let radar_stacks: Vec<_> = examples
                .iter()
                .filter(|ex| ex.meta.annotation.radar_truth.is_some())
                .map(|ex| engine.make_wavelet_stack(&ex.capture))
                .collect::<specsense::Result<_>>()?;
            let t_w = calibrate_tw(&model, &radar_stacks, cfg.classifier.g_percentile)?;
            WaveletCalibration { t_w }.save(&sidecar)?;
            println!(
                "classifier threshold t_w={t_w:.6} ({} radar captures, g={}) -> {}",
                radar_stacks.len(),
                cfg.classifier.g_percentile,
                sidecar.display()
            );
        }
        other => bail!("checkpoint kind {other:?} is neither flow's model"),
    }
    Ok(())
}

fn cmd_evaluate(
    experiment: ExperimentId,
    ckpt_dir: &Path,
    out: &Path,
    config: &Option<PathBuf>,
    scale: Option<usize>,
    seed: u64,
) -> Result<()> {
    let mut cfg = load_config(config)?;
    cfg.eval = eval_sizing(&cfg, scale);
    let spec = ExperimentSpec::new(experiment, &cfg.synth, &cfg.eval, seed);
    let run = run_experiment(&spec, &cfg, ckpt_dir, out)?;

    let m = &run.overall;
    let fmt = |v: f64| if v.is_nan() { "NA".to_string() } else { format!("{v:.3}") };
    println!(
        "{experiment}: {} examples | radar p_c={} p_d={} p_f={} | interference p_c={} p_d={} p_f={}",
        m.examples,
        fmt(m.p_c_r),
        fmt(m.p_d_r),
        fmt(m.p_f_r),
        fmt(m.p_c_i),
        fmt(m.p_d_i),
        fmt(m.p_f_i),
    );
    for path in &run.report_paths {
        println!("report -> {}", path.display());
    }
    Ok(())
}

fn describe_window(index: usize, rec: &WindowRecord) -> String {
    let d: &Decision = &rec.decision;
    let mut line = format!(
        "window {index}: radar={} interference={} provenance={}",
        if d.radar_present { "yes" } else { "no" },
        if d.interference_present { "yes" } else { "no" },
        d.provenance,
    );
    if let Some(score) = rec.classifier_score {
        line.push_str(&format!(" classifier_score={score:.4}"));
    }
    if let Some(r) = &d.radar_estimate {
        line.push_str(&format!(
            "\n  radar estimate: cf={:.2} MHz bw={:.2} MHz pw={:.1} us pulses={}",
            r.center_freq_frac * 10.0,
            r.bandwidth_frac * 10.0,
            r.pulse_width_frac * WINDOW_S * 1e6,
            r.num_pulses,
        ));
        match r.pulse_interval_frac {
            Some(pi) => line.push_str(&format!(" pri={:.2} ms", pi * WINDOW_S * 1e3)),
            None => line.push_str(" pri=NA"),
        }
    }
    if let Some(i) = &d.interference_estimate {
        line.push_str(&format!(
            "\n  interference estimate: cf={:.2} MHz bw={:.2} MHz on={:.1} ms",
            i.center_freq_frac * 10.0,
            i.bandwidth_frac * 10.0,
            i.total_on_frac() * WINDOW_S * 1e3,
        ));
    }
    line
}

fn cmd_infer(input: &Path, ckpt_dir: &Path) -> Result<()> {
    let meta_path = input.with_extension("meta");
    let sample_rate = if meta_path.is_file() {
        read_meta(&meta_path)?.sample_rate_hz
    } else {
        SAMPLE_RATE_HZ
    };
    let capture = read_capture(input, sample_rate)
        .with_context(|| format!("reading capture {}", input.display()))?;
    let pipeline = Pipeline::load(ckpt_dir)
        .with_context(|| format!("loading checkpoints from {}", ckpt_dir.display()))?;
    let records = pipeline.run_stream(&capture)?;
    for (i, rec) in records.iter().enumerate() {
        println!("{}", describe_window(i, rec));
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::init();
    match Cli::parse().command {
        Command::Generate { experiment, scale, seed, out } => {
            cmd_generate(experiment, scale, seed, &out)
        }
        Command::Train { flow, data, config, out } => cmd_train(flow, &data, &config, &out),
        Command::Calibrate { ckpt, data, config } => cmd_calibrate(&ckpt, &data, &config),
        Command::Evaluate { experiment, ckpt_dir, out, config, scale, seed } => {
            cmd_evaluate(experiment, &ckpt_dir, &out, &config, scale, seed)
        }
        Command::Infer { input, ckpt_dir } => cmd_infer(&input, &ckpt_dir),
    }
}
