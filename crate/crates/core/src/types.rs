//! Shared domain types: captures, truth parameters, annotations, decisions.
//!
//! Conventions used everywhere:
//!
//! * Frequency coordinates are normalized to the monitored band: `x` is a
//!   center as a fraction of the band (0 = lower edge = −5 MHz relative to
//!   band center, 1 = upper edge = +5 MHz), `w` a width as a fraction.
//! * Time coordinates are normalized to the observation window: `y` is a
//!   center as a fraction of the window (0 = window start), `h` a duration
//!   as a fraction. Grid-cell training targets use cell-relative `y`/`h`
//!   (see [`GridTarget`]); everything else is window-global.
//! * Truth parameters carry physical units (`_s`, `_hz`, `_db` suffixes).

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

// ─── band and window geometry ────────────────────────────────────────────────

/// Complex sample rate of the monitored band, Hz.
pub const SAMPLE_RATE_HZ: f64 = 10.0e6;
/// Width of the monitored band, Hz (equal to the complex sample rate).
pub const BAND_HZ: f64 = 10.0e6;
/// Observation window length, seconds.
pub const WINDOW_S: f64 = 16.0e-3;
/// Samples per observation window.
pub const WINDOW_SAMPLES: usize = 160_000;
/// Time cells the grid detector divides the window into.
pub const GRID_CELLS: usize = 32;
/// Values predicted per grid cell: two class probabilities, four box
/// coordinates, one confidence.
pub const GRID_FIELDS: usize = 7;

// ─── captures ────────────────────────────────────────────────────────────────

/// A complex-baseband capture of the monitored band.
#[derive(Debug, Clone, PartialEq)]
pub struct IQCapture {
    /// Complex samples (I = re, Q = im), dimensionless baseband amplitude.
    pub samples: Vec<num_complex::Complex32>,
    /// Complex sample rate, Hz.
    pub sample_rate_hz: f64,
    /// RF band center, Hz. Informational only; all processing is at baseband.
    pub center_freq_hz: f64,
}

impl IQCapture {
    /// An all-zero capture of `n` samples at the standard rate.
    pub fn zeros(n: usize) -> Self {
        IQCapture {
            samples: vec![num_complex::Complex32::new(0.0, 0.0); n],
            sample_rate_hz: SAMPLE_RATE_HZ,
            center_freq_hz: 0.0,
        }
    }

    /// Capture duration in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }
}

/// Object classes the grid detector distinguishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjClass {
    Radar,
    Interference,
}

/// A normalized time–frequency bounding box (see module docs for the
/// coordinate conventions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box {
    /// Frequency center, fraction of the band.
    pub x: f64,
    /// Time center, fraction of the window.
    pub y: f64,
    /// Frequency extent, fraction of the band.
    pub w: f64,
    /// Time extent, fraction of the window.
    pub h: f64,
}

impl Box {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Box { x, y, w, h }
    }

    /// Time extent as `(start, end)` fractions of the window.
    pub fn time_span(&self) -> (f64, f64) {
        (self.y - self.h / 2.0, self.y + self.h / 2.0)
    }

    /// Frequency extent as `(low, high)` fractions of the band.
    pub fn freq_span(&self) -> (f64, f64) {
        (self.x - self.w / 2.0, self.x + self.w / 2.0)
    }

    /// Area in normalized units.
    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// Ground truth for one capture: object boxes plus the parameters the
/// objects were synthesized from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Annotation {
    /// One box per radar pulse whose time extent intersects the window.
    #[serde(default)]
    pub radar_boxes: Vec<Box>,
    /// One box per interference ON segment.
    #[serde(default)]
    pub interference_boxes: Vec<Box>,
    pub radar_truth: Option<RadarParams>,
    pub interference_truth: Option<InterferenceParams>,
}

// ─── truth parameters ────────────────────────────────────────────────────────

/// Ground-truth parameters of a synthesized radar burst.
///
/// Types 1 and 2 are pulse-modulated tones; types 3–5 are linear FM chirps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarParams {
    /// Waveform family, 1..=5.
    pub radar_type: u8,
    /// Pulse width, seconds.
    pub pulse_width_s: f64,
    /// Pulse repetition interval (start-to-start), seconds.
    pub pulse_interval_s: f64,
    /// Pulses in the burst.
    pub num_pulses: u32,
    /// Burst envelope duration, seconds.
    pub burst_duration_s: f64,
    /// Swept bandwidth (chirps) or annotated bandwidth (tones), Hz. For
    /// types 3 and 5 this is the pre-clipping chirp width, which may exceed
    /// the monitored band.
    pub bandwidth_hz: f64,
    /// Carrier offset from the monitored band center, Hz.
    pub center_freq_hz: f64,
    /// First pulse start relative to window start, seconds.
    pub burst_start_s: f64,
    /// Peak-signal to per-MHz-noise ratio, dB.
    pub snr_db: f64,
}

/// Interference waveform families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceKind {
    /// Root-raised-cosine QPSK, transmitting for the whole window.
    QpskOn,
    /// The same QPSK waveform gated by an explicit ON/OFF pattern.
    QpskOnOff,
    /// OFDM with continuous (frequency-duplexed) downlink activity.
    OfdmFdd,
    /// OFDM gated by a time-duplexed uplink/downlink frame configuration.
    OfdmTdd,
}

impl fmt::Display for InterferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InterferenceKind::QpskOn => "qpsk_on",
            InterferenceKind::QpskOnOff => "qpsk_on_off",
            InterferenceKind::OfdmFdd => "ofdm_fdd",
            InterferenceKind::OfdmTdd => "ofdm_tdd",
        };
        f.write_str(s)
    }
}

/// Ground-truth parameters of a synthesized interference emitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceParams {
    pub kind: InterferenceKind,
    /// In-band interference-plus-noise to noise ratio over 1 MHz, dB.
    pub inr_db: f64,
    /// Occupied bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Carrier offset from the monitored band center, Hz.
    pub cf_offset_hz: f64,
    /// Explicit ON intervals as `(start_s, stop_s)`; required by
    /// [`InterferenceKind::QpskOnOff`], ignored by the other kinds.
    #[serde(default)]
    pub on_off_pattern: Vec<(f64, f64)>,
    /// Uplink/downlink frame configuration (0..=6); used by
    /// [`InterferenceKind::OfdmTdd`].
    #[serde(default)]
    pub ul_dl_config: u8,
}

/// Sidecar metadata for a stored capture: enough to reconstruct truth and
/// score decisions against it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureMeta {
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    /// Seed the capture was synthesized from.
    pub seed: u64,
    pub annotation: Annotation,
}

// ─── grid training targets ───────────────────────────────────────────────────

/// The object a grid cell is responsible for.
///
/// `x`/`w` are global band fractions. `y` is the object center's offset
/// within the cell in cell lengths (`[0,1)`), and `h` the object duration in
/// cell lengths. Radar pulses (≤ 100 µs ≪ one 0.5 ms cell) are assigned
/// whole to the cell containing their center; interference ON segments are
/// split into per-cell slices so `h` stays within `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellTarget {
    pub class: ObjClass,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

/// Per-cell training targets for the grid detector: at most one object per
/// cell; `None` marks a no-object cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridTarget {
    pub cells: Vec<Option<CellTarget>>,
}

impl GridTarget {
    /// An all-empty target.
    pub fn empty() -> Self {
        GridTarget { cells: vec![None; GRID_CELLS] }
    }

    /// Number of cells holding an object.
    pub fn num_objects(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }
}

// ─── decisions and estimates ─────────────────────────────────────────────────

/// Which flow produced the final radar verdict for a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// The grid detector's decision stood (positive or negative).
    Flow1,
    /// The scalogram classifier overrode a radar-negative window and the
    /// relaxed-threshold re-decode recovered radar cells.
    Flow2Override,
    /// The scalogram classifier flagged radar but no cells survived the
    /// relaxed threshold; radar is reported present without an estimate.
    Flow2DetectOnly,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Flow1 => "flow1",
            Provenance::Flow2Override => "flow2_override",
            Provenance::Flow2DetectOnly => "flow2_detect_only",
        };
        f.write_str(s)
    }
}

/// Radar parameters recovered from decoded detections. All quantities are
/// normalized fractions of the band (frequency) or window (time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarEstimate {
    /// Number of radar-classified cells (detected pulses).
    pub num_pulses: u32,
    /// Mean detected box center, band fraction.
    pub center_freq_frac: f64,
    /// Width of the union of detected frequency intervals, band fraction.
    pub bandwidth_frac: f64,
    /// Minimum detected box duration, window fraction.
    pub pulse_width_frac: f64,
    /// Minimum pairwise distance between detected box centers, window
    /// fraction; `None` with fewer than two detected pulses.
    pub pulse_interval_frac: Option<f64>,
}

/// Interference activity recovered from decoded detections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceEstimate {
    /// Mean detected box center, band fraction.
    pub center_freq_frac: f64,
    /// Width of the union of detected frequency intervals, band fraction.
    pub bandwidth_frac: f64,
    /// Merged ON intervals as `(center y, duration h)` window fractions.
    pub on_segments: Vec<(f64, f64)>,
}

impl InterferenceEstimate {
    /// Total estimated ON time as a window fraction.
    pub fn total_on_frac(&self) -> f64 {
        self.on_segments.iter().map(|(_, h)| h).sum()
    }
}

/// Final per-window verdict of the dual-flow pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub radar_present: bool,
    pub interference_present: bool,
    pub radar_estimate: Option<RadarEstimate>,
    pub interference_estimate: Option<InterferenceEstimate>,
    pub provenance: Provenance,
}

// ─── experiments ─────────────────────────────────────────────────────────────

/// The six canned experiment scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentId {
    /// Radar in AWGN.
    E1,
    /// Radar plus always-ON QPSK (models trained on E1-style strata).
    E2A,
    /// Radar plus gated (3 ms ON / 2 ms OFF) QPSK.
    E2B,
    /// Like E2B but the training strata include gated QPSK.
    E3,
    /// Radar plus TDD OFDM, models trained without OFDM strata.
    E4A,
    /// Radar plus TDD OFDM with OFDM strata in training.
    E4B,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::E1,
        ExperimentId::E2A,
        ExperimentId::E2B,
        ExperimentId::E3,
        ExperimentId::E4A,
        ExperimentId::E4B,
    ];
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExperimentId::E1 => "E1",
            ExperimentId::E2A => "E2A",
            ExperimentId::E2B => "E2B",
            ExperimentId::E3 => "E3",
            ExperimentId::E4A => "E4A",
            ExperimentId::E4B => "E4B",
        };
        f.write_str(s)
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().as_str() {
            "E1" => Ok(ExperimentId::E1),
            "E2A" => Ok(ExperimentId::E2A),
            "E2B" => Ok(ExperimentId::E2B),
            "E3" => Ok(ExperimentId::E3),
            "E4A" => Ok(ExperimentId::E4A),
            "E4B" => Ok(ExperimentId::E4B),
            other => Err(Error::InvalidArgument(format!(
                "unknown experiment id {other:?} (expected one of E1, E2A, E2B, E3, E4A, E4B)"
            ))),
        }
    }
}
