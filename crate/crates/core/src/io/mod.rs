//! File formats: IQ capture store, checkpoint-adjacent sidecars, and the
//! workbench configuration file.

pub mod capture;
pub mod config;

pub use capture::{read_capture, read_meta, write_capture, write_meta, write_tensor_f32};
pub use config::Config;
