//! Grid-detector model: network construction, training loop, persistence.
//!
//! The network is a stack of conv+ReLU blocks over the 1×312×16 spectrogram
//! (strided along time, so the 312 rows collapse toward the 32-cell grid
//! while the 16 frequency columns keep their resolution), flattened into a
//! dense head of 32×7 sigmoids. Training is plain mini-batch Adam on the
//! summed squared-error loss with a seeded shuffle each epoch, so two runs
//! from the same data, config, and seed produce bit-identical parameters.
//!
//! # Example
//!
//! ```no_run
//! use specsense::detector::train_radyolo;
//! use specsense::io::DetectorConfig;
//!
//! let data = Vec::new(); // (SpectrogramTensor, GridTarget) pairs
//! let cfg = DetectorConfig::default();
//! let (model, report) = train_radyolo(&data, None, &cfg).unwrap();
//! assert_eq!(report.train_loss.len(), cfg.train.epochs);
//! # let _ = model;
//! ```

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::io::config::{DetectorConfig, InputNorm};
use crate::nn::{AdamState, Checkpoint, Chw, LayerSpec, Network, Tensor, TrainReport};
use crate::rng;
use crate::spectrogram::{SpectrogramTensor, SPEC_COLS, SPEC_ROWS};
use crate::types::{GridTarget, GRID_CELLS, GRID_FIELDS};

use super::grid::DetectionGrid;
use super::loss::{yolo_loss, yolo_loss_grad};

/// Checkpoint kind tag for this flow.
pub const DETECTOR_KIND: &str = "grid_detector";

/// A trained (or freshly initialized) grid detector plus the input
/// normalization baked in at training time.
#[derive(Debug, Clone)]
pub struct DetectorModel {
    pub net: Network<f32>,
    pub input_norm: InputNorm,
}

/// Layer specs for the configured detector topology.
pub fn network_specs(cfg: &DetectorConfig) -> Result<Vec<LayerSpec>> {
    let mut dims = Chw { c: 1, h: SPEC_ROWS, w: SPEC_COLS };
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
    specs.push(LayerSpec::Flatten);
    let mut inputs = dims.count();
    for &hidden in &cfg.dense_hidden {
        if hidden == 0 {
            return Err(Error::Configuration("dense widths must be positive".into()));
        }
        specs.push(LayerSpec::Dense { inputs, outputs: hidden });
        specs.push(LayerSpec::Relu);
        inputs = hidden;
    }
    specs.push(LayerSpec::Dense { inputs, outputs: GRID_CELLS * GRID_FIELDS });
    specs.push(LayerSpec::Sigmoid);
    Ok(specs)
}

impl DetectorModel {
    /// Freshly initialized model for the configured topology.
    pub fn build(cfg: &DetectorConfig, seed: u64) -> Result<DetectorModel> {
        let net = Network::build(&network_specs(cfg)?, seed)?;
        Ok(DetectorModel { net, input_norm: cfg.input_norm.clone() })
    }

    fn input_tensor(&self, spect: &SpectrogramTensor) -> Result<Tensor<f32>> {
        normalized_input(&self.input_norm, spect)
    }

    /// Run the detector over one spectrogram.
    pub fn predict(&self, spect: &SpectrogramTensor) -> Result<DetectionGrid> {
        let out = self.net.forward(&self.input_tensor(spect)?)?;
        DetectionGrid::from_tensor(&out)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint::from_network(DETECTOR_KIND, self.input_norm.clone(), &self.net)
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<DetectorModel> {
        if ckpt.kind != DETECTOR_KIND {
            return Err(Error::Configuration(format!(
                "checkpoint kind {:?} is not a {DETECTOR_KIND}",
                ckpt.kind
            )));
        }
        Ok(DetectorModel { net: ckpt.build_network()?, input_norm: ckpt.input_norm.clone() })
    }
}

fn normalized_input(norm: &InputNorm, spect: &SpectrogramTensor) -> Result<Tensor<f32>> {
    Tensor::from_vec(&[1, SPEC_ROWS, SPEC_COLS], norm.apply(&spect.values))
}

/// Train the grid detector.
///
/// Examples are visited in a seeded shuffled order each epoch; gradients
/// accumulate over each mini-batch and one Adam step is applied per batch
/// with the gradient scaled by the batch length. The report holds the mean
/// per-example loss of every epoch (training loss as seen during the pass,
/// validation loss from a forward-only sweep).
pub fn train_radyolo(
    train: &[(SpectrogramTensor, GridTarget)],
    val: Option<&[(SpectrogramTensor, GridTarget)]>,
    cfg: &DetectorConfig,
) -> Result<(DetectorModel, TrainReport)> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let t = &cfg.train;
    if t.epochs == 0 || t.batch_size == 0 {
        return Err(Error::InvalidArgument("epochs and batch size must be positive".into()));
    }

    let mut model = DetectorModel::build(cfg, t.seed)?;
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
        order.shuffle(&mut rng::stream(t.seed, "detector_epoch", epoch as u64));
        let mut epoch_loss = 0.0;
        for batch in order.chunks(t.batch_size) {
            model.net.zero_grads();
            for &idx in batch {
                let tape = model.net.forward_tape(&inputs[idx])?;
                let (loss, grad, _) = yolo_loss_grad(tape.output(), &train[idx].1, &cfg.loss)?;
                model.net.backward(&tape, &grad)?;
                epoch_loss += loss;
            }
            adam.apply(&mut model.net, 1.0 / batch.len() as f64)?;
        }
        report.train_loss.push(epoch_loss / train.len() as f64);

        if let Some(val) = val {
            let mut v = 0.0;
            for (input, (_, target)) in val_inputs.iter().zip(val) {
                let out = model.net.forward(input)?;
                v += yolo_loss(&out, target, &cfg.loss)?;
            }
            report.val_loss.push(v / val.len().max(1) as f64);
        }
    }

    Ok((model, report))
}
