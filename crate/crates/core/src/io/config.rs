//! Run configuration: every tunable the workbench exposes, as one
//! structured-text (TOML) document.
//!
//! [`Config::default`] reproduces the documented defaults; `load`/`save`
//! round-trip exactly. [`Config::validate`] enforces the orderings the
//! detector loss and calibration depend on (λ_coord > λ_class,
//! λ_nobj > λ_obj, 0 < g < 50, increasing scale range, positive rates).
//!
//! # Example
//! ```
//! use specsense::io::Config;
//!
//! let cfg = Config::default();
//! cfg.validate().unwrap();
//! let text = toml::to_string_pretty(&cfg).unwrap();
//! let back: Config = toml::from_str(&text).unwrap();
//! assert_eq!(cfg, back);
//! ```

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// Signal-synthesis knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// Displayed bandwidth of the pulse-modulated tone types (types 1–2).
    pub tone_bandwidth_hz: f64,
    /// SNR draw grid, dB.
    pub snr_grid_db: Vec<f64>,
    /// INR draw grid, dB.
    pub inr_grid_db: Vec<f64>,
    /// Interference center-frequency offset Δ_CF, Hz.
    pub interference_cf_offset_hz: f64,
    /// QPSK occupied bandwidth, Hz.
    pub qpsk_bandwidth_hz: f64,
    /// OFDM occupied bandwidth, Hz.
    pub ofdm_bandwidth_hz: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            tone_bandwidth_hz: crate::synth::TONE_BANDWIDTH_HZ,
            snr_grid_db: crate::synth::SNR_GRID_DB.to_vec(),
            inr_grid_db: crate::synth::INR_GRID_DB.to_vec(),
            interference_cf_offset_hz: crate::synth::INTERFERENCE_CF_OFFSET_HZ,
            qpsk_bandwidth_hz: crate::synth::QPSK_BANDWIDTH_HZ,
            ofdm_bandwidth_hz: crate::synth::OFDM_BANDWIDTH_HZ,
        }
    }
}

/// Mother-wavelet knobs (the scalogram flow's front end).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MorletConfig {
    /// Carrier frequency f₀, Hz.
    pub f0_hz: f64,
    /// Two-sided half-power bandwidth at scale 1, Hz (sets σ).
    pub bandwidth_hz: f64,
    /// Smallest scale.
    pub scale_min: f64,
    /// Largest scale.
    pub scale_max: f64,
    /// Number of log-uniform scales.
    pub num_scales: usize,
}

impl Default for MorletConfig {
    fn default() -> Self {
        MorletConfig { f0_hz: 10.0e6, bandwidth_hz: 1.5e6, scale_min: 0.5, scale_max: 64.0, num_scales: 64 }
    }
}

impl MorletConfig {
    /// Materialize the spec this config describes.
    pub fn to_spec(&self) -> crate::wavelet::MorletSpec {
        let sigma_f = (self.bandwidth_hz / 2.0) / (2.0 * std::f64::consts::LN_2).sqrt();
        let sigma_s = 1.0 / (2.0 * std::f64::consts::PI * sigma_f);
        let (lo, hi) = (self.scale_min.log10(), self.scale_max.log10());
        let scales = (0..self.num_scales)
            .map(|j| 10f64.powf(lo + (hi - lo) * j as f64 / (self.num_scales - 1).max(1) as f64))
            .collect();
        crate::wavelet::MorletSpec { f0_hz: self.f0_hz, sigma_s, scales }
    }
}

/// Input normalization applied before a network's first layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputNorm {
    /// `x ↦ (x − offset) · scale` with fixed constants.
    Affine { offset: f64, scale: f64 },
    /// Per-example zero-mean unit-variance.
    Standardize,
    /// `x ↦ ln(1 + x)` then per-example standardize. Tames the heavy-tailed
    /// dynamic range of linear magnitudes before conditioning.
    LogStandardize,
}

impl InputNorm {
    /// Normalize a raw feature vector for network input.
    ///
    /// `Standardize` computes the mean/variance in f64 over the whole
    /// example (all channels pooled) and guards the zero-variance case with
    /// a unit denominator.
    pub fn apply(&self, raw: &[f32]) -> Vec<f32> {
        match *self {
            InputNorm::Affine { offset, scale } => {
                raw.iter().map(|&v| ((v as f64 - offset) * scale) as f32).collect()
            }
            InputNorm::Standardize => standardize(raw.iter().map(|&v| v as f64)),
            InputNorm::LogStandardize => {
                standardize(raw.iter().map(|&v| (v as f64).ln_1p()))
            }
        }
    }
}

fn standardize(values: impl Iterator<Item = f64> + Clone) -> Vec<f32> {
    let n = values.clone().count().max(1) as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.clone().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let denom = if var > 0.0 { var.sqrt() } else { 1.0 };
    values.map(|v| ((v - mean) / denom) as f32).collect()
}

/// One convolution block: 2-D conv + ReLU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvBlockConfig {
    pub channels: usize,
    pub kernel: usize,
    pub stride_rows: usize,
    pub stride_cols: usize,
}

/// Grid-detector loss weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    pub lambda_coord: f64,
    pub lambda_obj: f64,
    pub lambda_nobj: f64,
    pub lambda_class: f64,
    /// Global truth-box height fraction below which the IOU boost applies.
    pub boost_height_frac: f64,
    /// Amount added by the boost (result clamped to 1).
    pub boost_amount: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            lambda_coord: 5.0,
            lambda_obj: 1.0,
            lambda_nobj: 2.0,
            lambda_class: 1.0,
            boost_height_frac: 0.02,
            boost_amount: 0.5,
        }
    }
}

/// Optimizer + schedule knobs shared by both networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Probability clamp floor for cross-entropy terms.
    pub prob_floor: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::with(1e-3, 60, 16, 7)
    }
}

impl TrainConfig {
    fn with(learning_rate: f64, epochs: usize, batch_size: usize, seed: u64) -> Self {
        TrainConfig {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            epochs,
            batch_size,
            seed,
            prob_floor: 1e-7,
        }
    }
}

/// Grid-detector network + training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub conv_blocks: Vec<ConvBlockConfig>,
    /// Hidden dense widths between the flattened conv stack and the 32×7
    /// head (empty = direct).
    pub dense_hidden: Vec<usize>,
    pub input_norm: InputNorm,
    pub loss: LossConfig,
    pub train: TrainConfig,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        let conv = |channels| ConvBlockConfig { channels, kernel: 3, stride_rows: 2, stride_cols: 1 };
        DetectorConfig {
            conv_blocks: vec![conv(16), conv(32), conv(64), conv(64)],
            dense_hidden: Vec::new(),
            input_norm: InputNorm::Affine { offset: 10.0, scale: 0.05 },
            loss: LossConfig::default(),
            train: TrainConfig::with(1e-3, 60, 16, 7),
        }
    }
}

/// Binary scalogram classifier network + training + threshold percentile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub conv_blocks: Vec<ConvBlockConfig>,
    pub dense_hidden: Vec<usize>,
    pub input_norm: InputNorm,
    pub train: TrainConfig,
    /// Threshold percentile g, per cent; must satisfy 0 < g < 50.
    pub g_percentile: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        let conv = |channels| ConvBlockConfig { channels, kernel: 3, stride_rows: 2, stride_cols: 2 };
        ClassifierConfig {
            conv_blocks: vec![conv(16), conv(32), conv(64)],
            dense_hidden: Vec::new(),
            input_norm: InputNorm::Standardize,
            train: TrainConfig::with(1e-3, 40, 16, 11),
            g_percentile: 5.0,
        }
    }
}

/// Experiment sizing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Training captures per stratum.
    pub train_per_stratum: usize,
    /// Total test captures (split evenly between the experiment's two
    /// test strata).
    pub test_captures: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { train_per_stratum: 100, test_captures: 200 }
    }
}

/// The whole document.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub synth: SynthConfig,
    pub morlet: MorletConfig,
    pub detector: DetectorConfig,
    pub classifier: ClassifierConfig,
    pub eval: EvalConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Config = toml::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).map_err(Error::from)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let l = &self.detector.loss;
        if l.lambda_coord <= 0.0 || l.lambda_obj <= 0.0 || l.lambda_nobj <= 0.0 || l.lambda_class <= 0.0 {
            return Err(Error::Configuration("loss weights must be positive".into()));
        }
        if l.lambda_coord <= l.lambda_class {
            return Err(Error::Configuration("lambda_coord must exceed lambda_class".into()));
        }
        if l.lambda_nobj <= l.lambda_obj {
            return Err(Error::Configuration("lambda_nobj must exceed lambda_obj".into()));
        }
        if !(l.boost_height_frac > 0.0 && l.boost_height_frac < 1.0) {
            return Err(Error::Configuration("boost_height_frac must lie in (0, 1)".into()));
        }
        let g = self.classifier.g_percentile;
        if !(g > 0.0 && g < 50.0) {
            return Err(Error::Configuration(format!("g_percentile must lie in (0, 50), got {g}")));
        }
        let m = &self.morlet;
        if !(m.scale_min > 0.0 && m.scale_max > m.scale_min) || m.num_scales < 2 {
            return Err(Error::Configuration("scale range must be positive and increasing with ≥ 2 scales".into()));
        }
        if m.f0_hz <= 0.0 || m.bandwidth_hz <= 0.0 {
            return Err(Error::Configuration("wavelet frequencies must be positive".into()));
        }
        for t in [&self.detector.train, &self.classifier.train] {
            if t.learning_rate <= 0.0 || t.epochs == 0 || t.batch_size == 0 {
                return Err(Error::Configuration("training schedule must be positive".into()));
            }
            if !(t.prob_floor > 0.0 && t.prob_floor < 0.5) {
                return Err(Error::Configuration("prob_floor must lie in (0, 0.5)".into()));
            }
            if !(0.0..1.0).contains(&t.beta1) || !(0.0..1.0).contains(&t.beta2) {
                return Err(Error::Configuration("Adam betas must lie in [0, 1)".into()));
            }
        }
        if self.detector.conv_blocks.is_empty() || self.classifier.conv_blocks.is_empty() {
            return Err(Error::Configuration("networks need at least one conv block".into()));
        }
        if self.eval.train_per_stratum == 0 || self.eval.test_captures == 0 {
            return Err(Error::Configuration("experiment sizes must be positive".into()));
        }
        if self.synth.snr_grid_db.is_empty() || self.synth.inr_grid_db.is_empty() {
            return Err(Error::Configuration("SNR/INR grids must be non-empty".into()));
        }
        Ok(())
    }
}
