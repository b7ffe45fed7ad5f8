//! Scalogram classifier: the second detection flow.
//!
//! A binary CNN reads the 3×400×64 wavelet stack (three sub-bands ×
//! compressed lags × scales), pools each feature map globally, and emits a
//! two-way softmax whose first entry is the probability that the window
//! contains radar. The flow exists to catch weak pulses the grid detector
//! misses — it sees fine time structure the spectrogram's 0.5 ms cells
//! smear out — and it only ever runs on windows the first flow called
//! radar-negative.
//!
//! Training minimizes binary cross-entropy (log base 2, probabilities
//! clamped away from 0/1). The decision threshold `t_w` is calibrated as a
//! low percentile of the scores the trained model assigns to known radar
//! captures: with `g = 5`, 95 % of true radar training examples sit at or
//! above `t_w`.
//!
//! # Example
//!
//! ```
//! use specsense::classifier::{bce_loss, threshold_from_scores};
//!
//! // A coin-flip score costs exactly one bit.
//! assert_eq!(bce_loss(0.5, true, 1e-7), 1.0);
//! // Nearest-rank 10th percentile of ten scores.
//! let scores: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
//! assert_eq!(threshold_from_scores(&scores, 10.0).unwrap(), 0.1);
//! ```

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::io::config::{ClassifierConfig, InputNorm};
use crate::nn::{AdamState, Checkpoint, Chw, LayerSpec, Network, Scalar, Tensor, TrainReport};
use crate::rng;
use crate::wavelet::{ScalogramTensor, COMPRESSED_LAGS, NUM_BANDS, NUM_SCALES};

/// Checkpoint kind tag for this flow.
pub const CLASSIFIER_KIND: &str = "scalogram_classifier";

/// A trained (or freshly initialized) scalogram classifier plus the input
/// normalization baked in at training time.
#[derive(Debug, Clone)]
pub struct ClassifierModel {
    pub net: Network<f32>,
    pub input_norm: InputNorm,
}

// ─── loss ────────────────────────────────────────────────────────────────────

/// Binary cross-entropy in bits: `−[y·log₂(p) + (1−y)·log₂(1−p)]` with `p`
/// clamped to `[floor, 1−floor]`.
pub fn bce_loss(p: f64, label: bool, floor: f64) -> f64 {
    let pc = p.clamp(floor, 1.0 - floor);
    if label {
        -pc.log2()
    } else {
        -(1.0 - pc).log2()
    }
}

/// BCE value and gradient with respect to the two-way softmax output
/// `(p_radar, p_background)`. The loss reads only the labeled class's
/// probability (`−log₂ p_label`, the binary cross-entropy, since the pair
/// sums to one), so the gradient is `−1/(p_label·ln2)` on that entry and 0
/// on the other; where the clamp is active the loss is locally constant and
/// the gradient is 0.
pub fn bce_loss_grad<S: Scalar>(
    out: &Tensor<S>,
    label: bool,
    floor: f64,
) -> Result<(f64, Tensor<S>)> {
    if out.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "classifier output must be a (radar, background) pair, got {} values",
            out.len()
        )));
    }
    let p_label = out.data[usize::from(!label)].to_f64();
    let loss = -p_label.clamp(floor, 1.0 - floor).log2();
    let mut grad = vec![S::ZERO; 2];
    if (floor..=1.0 - floor).contains(&p_label) {
        grad[usize::from(!label)] = S::from_f64(-1.0 / (p_label * std::f64::consts::LN_2));
    }
    Ok((loss, Tensor { shape: out.shape.clone(), data: grad }))
}

// ─── model ───────────────────────────────────────────────────────────────────

/// Layer specs for the configured classifier topology.
pub fn network_specs(cfg: &ClassifierConfig) -> Result<Vec<LayerSpec>> {
    let mut dims = Chw { c: NUM_BANDS, h: COMPRESSED_LAGS, w: NUM_SCALES };
    let mut specs = Vec::new();
    for block in &cfg.conv_blocks {
        if block.channels == 0 || block.kernel == 0 || block.stride_rows == 0 || block.stride_cols == 0 {
            return Err(Error::Configuration("conv block sizes must be positive".into()));
        }
        let padding = block.kernel / 2;
        if dims.h + 2 * padding < block.kernel || dims.w + 2 * padding < block.kernel {
            return Err(Error::Configuration(format!(
                "conv kernel {} does not fit a {}×{} map",
                block.kernel, dims.h, dims.w
            )));
        }
        specs.push(LayerSpec::Conv2d {
            input: dims,
            out_channels: block.channels,
            kernel: block.kernel,
            stride_rows: block.stride_rows,
            stride_cols: block.stride_cols,
            padding,
        });
        specs.push(LayerSpec::Relu);
        dims = Chw {
            c: block.channels,
            h: (dims.h + 2 * padding - block.kernel) / block.stride_rows + 1,
            w: (dims.w + 2 * padding - block.kernel) / block.stride_cols + 1,
        };
    }
    specs.push(LayerSpec::GlobalAvgPool { input: dims });
    let mut inputs = dims.c;
    for &hidden in &cfg.dense_hidden {
        if hidden == 0 {
            return Err(Error::Configuration("dense widths must be positive".into()));
        }
        specs.push(LayerSpec::Dense { inputs, outputs: hidden });
        specs.push(LayerSpec::Relu);
        inputs = hidden;
    }
    specs.push(LayerSpec::Dense { inputs, outputs: 2 });
    specs.push(LayerSpec::Softmax);
    Ok(specs)
}

impl ClassifierModel {
    /// Freshly initialized model for the configured topology.
    pub fn build(cfg: &ClassifierConfig, seed: u64) -> Result<ClassifierModel> {
        let net = Network::build(&network_specs(cfg)?, seed)?;
        Ok(ClassifierModel { net, input_norm: cfg.input_norm.clone() })
    }

    fn input_tensor(&self, stack: &ScalogramTensor) -> Result<Tensor<f32>> {
        normalized_input(&self.input_norm, stack)
    }

    /// Score one wavelet stack: the probability the window contains radar
    /// (the first entry of the two-way softmax head).
    pub fn predict(&self, stack: &ScalogramTensor) -> Result<f64> {
        let out = self.net.forward(&self.input_tensor(stack)?)?;
        Ok(out.data[0] as f64)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint::from_network(CLASSIFIER_KIND, self.input_norm.clone(), &self.net)
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<ClassifierModel> {
        if ckpt.kind != CLASSIFIER_KIND {
            return Err(Error::Configuration(format!(
                "checkpoint kind {:?} is not a {CLASSIFIER_KIND}",
                ckpt.kind
            )));
        }
        Ok(ClassifierModel { net: ckpt.build_network()?, input_norm: ckpt.input_norm.clone() })
    }
}

fn normalized_input(norm: &InputNorm, stack: &ScalogramTensor) -> Result<Tensor<f32>> {
    Tensor::from_vec(&[NUM_BANDS, COMPRESSED_LAGS, NUM_SCALES], norm.apply(&stack.values))
}

// ─── training ────────────────────────────────────────────────────────────────

/// Train the scalogram classifier on `(stack, is_radar)` pairs.
///
/// Both labels must be present — a single-class set would let the model
/// collapse to a constant and make threshold calibration meaningless.
/// Mini-batch Adam with a seeded shuffle, bit-reproducible for a fixed
/// data/config/seed triple.
pub fn train_waveletcnn(
    train: &[(ScalogramTensor, bool)],
    val: Option<&[(ScalogramTensor, bool)]>,
    cfg: &ClassifierConfig,
) -> Result<(ClassifierModel, TrainReport)> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let positives = train.iter().filter(|(_, y)| *y).count();
    if positives == 0 || positives == train.len() {
        return Err(Error::InvalidArgument(format!(
            "training set must contain both classes ({positives} radar of {})",
            train.len()
        )));
    }
    let t = &cfg.train;
    let mut model = ClassifierModel::build(cfg, t.seed)?;
    let inputs: Vec<Tensor<f32>> = train
        .iter()
        .map(|(s, _)| normalized_input(&cfg.input_norm, s))
        .collect::<Result<_>>()?;
    let val_inputs: Vec<Tensor<f32>> = val
        .unwrap_or(&[])
        .iter()
        .map(|(s, _)| normalized_input(&cfg.input_norm, s))
        .collect::<Result<_>>()?;

    let mut adam =
        AdamState::new(&mut model.net, t.learning_rate, t.beta1, t.beta2, t.adam_epsilon);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut report = TrainReport::default();

    for epoch in 0..t.epochs {
        order.shuffle(&mut rng::stream(t.seed, "classifier_epoch", epoch as u64));
        let mut epoch_loss = 0.0;
        for batch in order.chunks(t.batch_size) {
            model.net.zero_grads();
            for &idx in batch {
                let tape = model.net.forward_tape(&inputs[idx])?;
                let (loss, grad) = bce_loss_grad(tape.output(), train[idx].1, t.prob_floor)?;
                model.net.backward(&tape, &grad)?;
                epoch_loss += loss;
            }
            adam.apply(&mut model.net, 1.0 / batch.len() as f64)?;
        }
        report.train_loss.push(epoch_loss / train.len() as f64);

        if let Some(val) = val {
            let mut v = 0.0;
            for (input, (_, label)) in val_inputs.iter().zip(val) {
                let out = model.net.forward(input)?;
                v += bce_loss(out.data[0] as f64, *label, t.prob_floor);
            }
            report.val_loss.push(v / val.len().max(1) as f64);
        }
    }

    Ok((model, report))
}

// ─── threshold calibration ───────────────────────────────────────────────────

/// Nearest-rank `g`-th percentile of radar scores. `g` must lie in (0, 50):
/// the threshold is meant to sit in the lower tail of the radar score
/// distribution, below its median.
pub fn threshold_from_scores(radar_scores: &[f64], g_percentile: f64) -> Result<f64> {
    if !(g_percentile > 0.0 && g_percentile < 50.0) {
        return Err(Error::InvalidArgument(format!(
            "g percentile must lie in (0, 50), got {g_percentile}"
        )));
    }
    if radar_scores.is_empty() {
        return Err(Error::MissingStratum(
            "threshold calibration needs at least one radar capture".into(),
        ));
    }
    Ok(crate::detector::nearest_rank_percentile(radar_scores, g_percentile))
}

/// Score every radar calibration stack and take the `g`-th percentile as
/// the decision threshold `t_w`.
pub fn calibrate_tw(
    model: &ClassifierModel,
    radar_stacks: &[ScalogramTensor],
    g_percentile: f64,
) -> Result<f64> {
    if !(g_percentile > 0.0 && g_percentile < 50.0) {
        return Err(Error::InvalidArgument(format!(
            "g percentile must lie in (0, 50), got {g_percentile}"
        )));
    }
    let mut scores = Vec::with_capacity(radar_stacks.len());
    for stack in radar_stacks {
        scores.push(model.predict(stack)?);
    }
    threshold_from_scores(&scores, g_percentile)
}

/// Threshold the classifier score: radar iff `score ≥ t_w` (inclusive, so a
/// score exactly at the calibrated percentile still counts).
pub fn predict_radar(model: &ClassifierModel, stack: &ScalogramTensor, t_w: f64) -> Result<bool> {
    Ok(model.predict(stack)? >= t_w)
}

/// The calibrated decision threshold, persisted as a structured-text
/// sidecar next to the classifier checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WaveletCalibration {
    pub t_w: f64,
}

impl WaveletCalibration {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = toml::to_string_pretty(self).map_err(Error::from)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<WaveletCalibration> {
        let text = std::fs::read_to_string(path)?;
        Ok(toml::from_str(&text)?)
    }
}
