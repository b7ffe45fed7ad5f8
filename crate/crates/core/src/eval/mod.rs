//! Experiments: dataset construction, Table-style metrics, and the
//! end-to-end runner.
//!
//! [`data`] turns an [`ExperimentSpec`] into seed-deterministic capture
//! sets; [`metrics`] scores pipeline decisions against truth; [`run`] ties
//! them together — synthesize, train both flows, calibrate, evaluate, and
//! write CSV/report artifacts.

pub mod data;
pub mod metrics;
pub mod run;

pub use data::{
    build_experiment, example_seed, for_each_capture, synth_stratum_example, ExperimentData,
    ExperimentSpec, LabeledCapture, Stratum,
};
pub use metrics::{compute_metrics, MetricsReport, ScoredExample};
pub use run::{run_experiment, RunArtifacts};
