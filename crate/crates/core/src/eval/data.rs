//! Experiment definitions and deterministic capture synthesis.
//!
//! Six canned experiments share one generation scheme. Each experiment names
//! its training strata (empty for the reuse experiments, which evaluate
//! models trained elsewhere) and test strata; every capture is synthesized
//! from a seed derived from `(master seed, experiment, role, stratum,
//! index)`, so regenerating any subset is reproducible and order-free.
//!
//! | id  | trains | train strata                      | test strata          |
//! |-----|--------|-----------------------------------|----------------------|
//! | E1  | yes    | radar, noise, QPSK on/gated, both | radar, noise         |
//! | E2A | E1     | —                                 | radar+QPSK on, QPSK on |
//! | E2B | E1     | —                                 | radar+gated, gated   |
//! | E3  | yes    | radar, noise, OFDM fdd/tdd, both  | radar, noise         |
//! | E4A | E3     | —                                 | radar+FDD, FDD       |
//! | E4B | E3     | —                                 | radar+TDD, TDD       |
//!
//! "QPSK on/gated" means the kind is drawn per example; radar types draw
//! uniformly from 1–5, SNR/INR uniformly from their grids.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::config::{EvalConfig, SynthConfig};
use crate::rng;
use crate::synth;
use crate::types::{
    Annotation, CaptureMeta, ExperimentId, IQCapture, InterferenceKind, InterferenceParams,
    SAMPLE_RATE_HZ, WINDOW_S,
};

/// One test/train stratum: whether radar is present and which interference
/// kinds are eligible (empty = no interference; several = drawn per example).
#[derive(Debug, Clone, PartialEq)]
pub struct Stratum {
    pub radar: bool,
    pub interference_kinds: Vec<InterferenceKind>,
}

impl Stratum {
    pub fn radar() -> Self {
        Stratum { radar: true, interference_kinds: Vec::new() }
    }

    pub fn noise() -> Self {
        Stratum { radar: false, interference_kinds: Vec::new() }
    }

    pub fn interference(kinds: &[InterferenceKind]) -> Self {
        Stratum { radar: false, interference_kinds: kinds.to_vec() }
    }

    pub fn radar_plus(kinds: &[InterferenceKind]) -> Self {
        Stratum { radar: true, interference_kinds: kinds.to_vec() }
    }

    /// Stable label used in seed derivation and file names.
    pub fn label(&self) -> &'static str {
        match (self.radar, self.interference_kinds.is_empty()) {
            (true, true) => "radar",
            (false, true) => "noise",
            (false, false) => "interference",
            (true, false) => "radar_interference",
        }
    }
}

/// Everything needed to regenerate one experiment's data.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    /// Experiment whose trained models this one evaluates (itself for the
    /// training experiments).
    pub model_source: ExperimentId,
    pub train_strata: Vec<Stratum>,
    pub test_strata: Vec<Stratum>,
    /// Training captures per training stratum.
    pub train_per_stratum: usize,
    /// Total test captures, split evenly across test strata.
    pub test_captures: usize,
    pub snr_grid_db: Vec<f64>,
    pub inr_grid_db: Vec<f64>,
    pub tone_bandwidth_hz: f64,
    pub seed: u64,
}

impl ExperimentSpec {
    /// The canned experiment `id` at the configured scale.
    pub fn new(id: ExperimentId, synth: &SynthConfig, eval: &EvalConfig, seed: u64) -> Self {
        use InterferenceKind::*;
        let qpsk = [QpskOn, QpskOnOff];
        let ofdm = [OfdmFdd, OfdmTdd];
        let train_full = |kinds: &[InterferenceKind]| {
            vec![
                Stratum::radar(),
                Stratum::noise(),
                Stratum::interference(kinds),
                Stratum::radar_plus(kinds),
            ]
        };
        let reuse_test = |kind: InterferenceKind| {
            vec![Stratum::radar_plus(&[kind]), Stratum::interference(&[kind])]
        };
        let (model_source, train_strata, test_strata) = match id {
            ExperimentId::E1 => {
                (id, train_full(&qpsk), vec![Stratum::radar(), Stratum::noise()])
            }
            ExperimentId::E3 => {
                (id, train_full(&ofdm), vec![Stratum::radar(), Stratum::noise()])
            }
            ExperimentId::E2A => (ExperimentId::E1, Vec::new(), reuse_test(QpskOn)),
            ExperimentId::E2B => (ExperimentId::E1, Vec::new(), reuse_test(QpskOnOff)),
            ExperimentId::E4A => (ExperimentId::E3, Vec::new(), reuse_test(OfdmFdd)),
            ExperimentId::E4B => (ExperimentId::E3, Vec::new(), reuse_test(OfdmTdd)),
        };
        ExperimentSpec {
            id,
            model_source,
            train_strata,
            test_strata,
            train_per_stratum: eval.train_per_stratum,
            test_captures: eval.test_captures,
            snr_grid_db: synth.snr_grid_db.clone(),
            inr_grid_db: synth.inr_grid_db.clone(),
            tone_bandwidth_hz: synth.tone_bandwidth_hz,
            seed,
        }
    }

    /// Whether this experiment trains its own models.
    pub fn trains_models(&self) -> bool {
        self.model_source == self.id
    }
}

/// A synthesized capture with its truth sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCapture {
    pub capture: IQCapture,
    pub meta: CaptureMeta,
}

/// Synthesize one capture of `stratum` from an example seed. Every random
/// draw comes from a tagged stream of `example_seed`, so captures are
/// independent of generation order and batch size.
pub fn synth_stratum_example(
    stratum: &Stratum,
    spec: &ExperimentSpec,
    example_seed: u64,
) -> Result<LabeledCapture> {
    let mut annotation = Annotation::default();

    let radar = if stratum.radar {
        let radar_type = rng::stream(example_seed, "radar_type", 0).gen_range(1..=5u8);
        let params_seed = rng::stream(example_seed, "radar_draw", 0).gen::<u64>();
        let params = synth::sample_radar_params_with(
            radar_type,
            params_seed,
            spec.tone_bandwidth_hz,
            &spec.snr_grid_db,
        )?;
        let (capture, ann) = synth::synth_radar(&params, WINDOW_S, SAMPLE_RATE_HZ)?;
        annotation.radar_boxes = ann.radar_boxes;
        annotation.radar_truth = ann.radar_truth;
        Some((capture, params.snr_db))
    } else {
        None
    };

    let interference = if stratum.interference_kinds.is_empty() {
        None
    } else {
        let kind = stratum.interference_kinds
            [rng::stream(example_seed, "interference_kind", 0).gen_range(0..stratum.interference_kinds.len())];
        let inr_db = spec.inr_grid_db
            [rng::stream(example_seed, "inr", 0).gen_range(0..spec.inr_grid_db.len())];
        let params = InterferenceParams {
            kind,
            inr_db,
            bandwidth_hz: match kind {
                InterferenceKind::QpskOn | InterferenceKind::QpskOnOff => {
                    synth::QPSK_BANDWIDTH_HZ
                }
                InterferenceKind::OfdmFdd | InterferenceKind::OfdmTdd => {
                    synth::OFDM_BANDWIDTH_HZ
                }
            },
            cf_offset_hz: synth::INTERFERENCE_CF_OFFSET_HZ,
            on_off_pattern: match kind {
                InterferenceKind::QpskOnOff => synth::qpsk_on_off_pattern(WINDOW_S),
                _ => Vec::new(),
            },
            ul_dl_config: match kind {
                InterferenceKind::OfdmTdd => {
                    rng::stream(example_seed, "tdd_config", 0).gen_range(0..=6u8)
                }
                _ => 0,
            },
        };
        let symbols_seed = rng::stream(example_seed, "interference_draw", 0).gen::<u64>();
        let (capture, ann) =
            synth::synth_interference(&params, WINDOW_S, SAMPLE_RATE_HZ, symbols_seed)?;
        annotation.interference_boxes = ann.interference_boxes;
        annotation.interference_truth = ann.interference_truth;
        Some((capture, inr_db))
    };

    let noise_seed = rng::stream(example_seed, "noise", 0).gen::<u64>();
    let capture = synth::scale_and_mix(
        radar.as_ref().map(|(c, _)| c),
        interference.as_ref().map(|(c, _)| c),
        radar.as_ref().map(|(_, snr)| *snr),
        interference.as_ref().map(|(_, inr)| *inr),
        noise_seed,
    );

    let meta = CaptureMeta {
        sample_rate_hz: capture.sample_rate_hz,
        duration_s: capture.duration_s(),
        seed: example_seed,
        annotation,
    };
    Ok(LabeledCapture { capture, meta })
}

/// The seed for test/train capture `index` of a stratum.
pub fn example_seed(spec: &ExperimentSpec, role: &str, stratum: &Stratum, index: usize) -> u64 {
    let tag = format!("{}/{}/{}", spec.id, role, stratum.label());
    rng::stream(spec.seed, &tag, index as u64).gen()
}

/// How many test captures each test stratum receives: an even split, with
/// earlier strata absorbing the remainder.
pub fn test_split(total: usize, strata: usize) -> Vec<usize> {
    let base = total / strata;
    (0..strata).map(|i| base + usize::from(i < total % strata)).collect()
}

/// The generation plan for one role: `(stratum, index, example seed)` per
/// capture, in stable order.
fn plan(spec: &ExperimentSpec, role: &str) -> Vec<(Stratum, usize, u64)> {
    let mut out = Vec::new();
    match role {
        "train" => {
            for stratum in &spec.train_strata {
                for k in 0..spec.train_per_stratum {
                    out.push((stratum.clone(), k, example_seed(spec, role, stratum, k)));
                }
            }
        }
        _ => {
            let counts = test_split(spec.test_captures, spec.test_strata.len().max(1));
            for (stratum, &count) in spec.test_strata.iter().zip(&counts) {
                for k in 0..count {
                    out.push((stratum.clone(), k, example_seed(spec, role, stratum, k)));
                }
            }
        }
    }
    out
}

/// Both capture sets of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentData {
    pub train: Vec<LabeledCapture>,
    pub test: Vec<LabeledCapture>,
}

/// Synthesize every capture of the experiment (parallel across captures,
/// deterministic regardless of worker count).
pub fn build_experiment(spec: &ExperimentSpec) -> Result<ExperimentData> {
    validate_spec(spec)?;
    let make = |role: &str| -> Result<Vec<LabeledCapture>> {
        plan(spec, role)
            .into_par_iter()
            .map(|(stratum, _, seed)| synth_stratum_example(&stratum, spec, seed))
            .collect()
    };
    Ok(ExperimentData { train: make("train")?, test: make("test")? })
}

/// Visit every capture of one role without holding the whole set in memory:
/// `f(position, stratum, LabeledCapture)` runs in parallel across captures.
/// `position` is the index within the role's stable generation order.
pub fn for_each_capture<F>(spec: &ExperimentSpec, role: &str, f: F) -> Result<()>
where
    F: Fn(usize, &Stratum, LabeledCapture) -> Result<()> + Sync,
{
    validate_spec(spec)?;
    plan(spec, role)
        .into_par_iter()
        .enumerate()
        .map(|(pos, (stratum, _, seed))| {
            let example = synth_stratum_example(&stratum, spec, seed)?;
            f(pos, &stratum, example)
        })
        .collect()
}

fn validate_spec(spec: &ExperimentSpec) -> Result<()> {
    if spec.trains_models() && (spec.train_per_stratum == 0 || spec.train_strata.is_empty()) {
        return Err(Error::InvalidArgument(
            "training experiment needs a positive per-stratum count".into(),
        ));
    }
    if spec.test_captures == 0 || spec.test_strata.is_empty() {
        return Err(Error::InvalidArgument("experiment needs a positive test count".into()));
    }
    if spec.snr_grid_db.is_empty() || spec.inr_grid_db.is_empty() {
        return Err(Error::InvalidArgument("SNR/INR grids must be non-empty".into()));
    }
    Ok(())
}
