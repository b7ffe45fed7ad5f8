//! Grid detector: spectrogram in, per-cell class/box/confidence out.
//!
//! The detector consumes a compressed spectrogram (312 rows × 16 frequency
//! bins) and emits a 32 × 7 prediction grid. Each of the 32 time cells holds
//! `[p_radar, p_interference, x, y, w, h, confidence]`, where `x`/`w` are
//! window-relative frequency coordinates, `y`/`h` are cell-relative time
//! coordinates, and every entry lies in (0, 1) because the network ends in a
//! sigmoid. Submodules cover the lifecycle:
//!
//! - [`loss`]: box geometry (IOU with a small-object boost) and the summed
//!   squared-error training loss with its analytic gradient,
//! - [`train`]: network construction and the Adam training loop,
//! - [`calibrate`]: percentile statistics that set decode thresholds,
//! - [`grid`]: thresholded decoding plus radar/interference parameter
//!   estimation from decoded boxes.
//!
//! # Example
//!
//! ```
//! use specsense::detector::{DetectorModel, decode};
//! use specsense::io::DetectorConfig;
//!
//! let cfg = DetectorConfig::default();
//! let model = DetectorModel::build(&cfg, 7).unwrap();
//! let spect = specsense::spectrogram::SpectrogramTensor::zeros();
//! let grid = model.predict(&spect).unwrap();
//! // An untrained net with a 0.9 threshold finds nothing.
//! assert!(decode(&grid, 0.9).is_empty());
//! ```

pub mod calibrate;
pub mod grid;
pub mod loss;
pub mod train;

pub use calibrate::{
    calibrate, calibration_from_grids, nearest_rank_percentile, CalibrationStats,
};
pub use grid::{
    cell_box_to_global, decode, decode_class, estimate_interference, estimate_radar, Detection,
    DetectionGrid,
};
pub use loss::{boosted_iou, iou, yolo_loss, yolo_loss_frozen, yolo_loss_grad};
pub use train::{network_specs, train_radyolo, DetectorModel, DETECTOR_KIND};
