//! Minimal neural-network engine: tensors, feed-forward layers with
//! hand-written backprop, Adam, and self-describing checkpoints.
//!
//! Built for exactly two small CNNs (a grid detector over 312×16
//! spectrograms and a binary classifier over 3×400×64 scalograms), so the
//! scope is deliberately narrow: static layer lists, single-example
//! forward/backward, f32 storage with f64 available for verification.
//!
//! # Example
//! ```
//! use specsense::nn::{LayerSpec, Network, Tensor};
//!
//! let specs = [
//!     LayerSpec::Dense { inputs: 4, outputs: 2 },
//!     LayerSpec::Softmax,
//! ];
//! let net: Network<f32> = Network::build(&specs, 7).unwrap();
//! let x = Tensor::from_vec(&[4], vec![0.1, -0.2, 0.3, 0.4]).unwrap();
//! let y = net.forward(&x).unwrap();
//! assert!((y.data.iter().sum::<f32>() - 1.0).abs() < 1e-6);
//! ```

pub mod adam;
pub mod checkpoint;
pub mod layers;
pub mod network;
pub mod scalar;
pub mod tensor;

pub use adam::AdamState;
pub use checkpoint::Checkpoint;
pub use layers::{Layer, LayerSpec};
pub use network::{verify, Network, Tape};
pub use scalar::Scalar;
pub use tensor::{Chw, Tensor};

/// Per-epoch mean losses recorded by a training loop.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub train_loss: Vec<f64>,
    /// Present when a validation set was supplied.
    pub val_loss: Vec<f64>,
}
