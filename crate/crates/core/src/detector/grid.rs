//! Prediction grids, thresholded decoding, and parameter estimation.
//!
//! A [`DetectionGrid`] is the network head read as 32 rows of
//! `[p_radar, p_interference, x, y, w, h, confidence]`. Decoding multiplies
//! the confidence into each class probability, keeps cells whose larger
//! product clears the object threshold, and maps the cell-relative box back
//! to window-global coordinates. Decoded detections feed the parameter
//! estimators: pulse count/width/interval and band geometry for radar,
//! merged ON segments for interference.
//!
//! # Example
//!
//! ```
//! use specsense::detector::{estimate_radar, Detection};
//! use specsense::types::{Box, ObjClass};
//!
//! let pulse = |y| Detection {
//!     cell: 0,
//!     class: ObjClass::Radar,
//!     confidence: 0.9,
//!     bbox: Box::new(0.5, y, 0.1, 0.002),
//! };
//! let est = estimate_radar(&[pulse(0.1), pulse(0.2), pulse(0.4)]).unwrap();
//! assert_eq!(est.num_pulses, 3);
//! // Closest pair of pulse centers: |0.2 − 0.1| of the window.
//! assert!((est.pulse_interval_frac.unwrap() - 0.1).abs() < 1e-12);
//! ```

use crate::error::{Error, Result};
use crate::nn::Tensor;
use crate::types::{
    Box, InterferenceEstimate, ObjClass, RadarEstimate, GRID_CELLS, GRID_FIELDS,
};

// Field order within one grid cell.
pub const F_P_RADAR: usize = 0;
pub const F_P_INTERFERENCE: usize = 1;
pub const F_X: usize = 2;
pub const F_Y: usize = 3;
pub const F_W: usize = 4;
pub const F_H: usize = 5;
pub const F_CONF: usize = 6;

/// Two time spans closer than this (window fraction) count as touching when
/// ON segments are merged.
const MERGE_EPS: f64 = 1e-9;

/// Map a cell-relative box (`y` = center offset within the cell in cell
/// lengths, `h` = duration in cell lengths; `x`/`w` already band-global) to
/// window-global coordinates.
pub fn cell_box_to_global(cell: usize, x: f64, y: f64, w: f64, h: f64) -> Box {
    let k = GRID_CELLS as f64;
    Box { x, y: (cell as f64 + y) / k, w, h: h / k }
}

// ─── prediction grid ─────────────────────────────────────────────────────────

/// The detector head for one window: 32 cells × 7 fields, all in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionGrid {
    values: Vec<f64>,
}

impl DetectionGrid {
    /// Wrap a raw value vector (row-major cells × fields).
    pub fn from_values(values: Vec<f64>) -> Result<DetectionGrid> {
        if values.len() != GRID_CELLS * GRID_FIELDS {
            return Err(Error::InvalidArgument(format!(
                "detection grid needs {} values, got {}",
                GRID_CELLS * GRID_FIELDS,
                values.len()
            )));
        }
        Ok(DetectionGrid { values })
    }

    /// Read a network output tensor (any shape with 224 elements).
    pub fn from_tensor(t: &Tensor<f32>) -> Result<DetectionGrid> {
        DetectionGrid::from_values(t.data.iter().map(|&v| v as f64).collect())
    }

    pub fn get(&self, cell: usize, f: usize) -> f64 {
        self.values[cell * GRID_FIELDS + f]
    }

    /// Confidence-weighted radar probability ĉ·p̂ᴿ.
    pub fn conf_radar(&self, cell: usize) -> f64 {
        self.get(cell, F_CONF) * self.get(cell, F_P_RADAR)
    }

    /// Confidence-weighted interference probability ĉ·p̂ᴵ.
    pub fn conf_interference(&self, cell: usize) -> f64 {
        self.get(cell, F_CONF) * self.get(cell, F_P_INTERFERENCE)
    }

    /// Confidence-weighted background mass ĉ·(1 − p̂ᴿ − p̂ᴵ).
    pub fn conf_background(&self, cell: usize) -> f64 {
        self.get(cell, F_CONF)
            * (1.0 - self.get(cell, F_P_RADAR) - self.get(cell, F_P_INTERFERENCE))
    }

    /// The cell's predicted box in window-global coordinates.
    pub fn decoded_box(&self, cell: usize) -> Box {
        cell_box_to_global(
            cell,
            self.get(cell, F_X),
            self.get(cell, F_Y),
            self.get(cell, F_W),
            self.get(cell, F_H),
        )
    }
}

/// One decoded object: the grid cell it came from, its class, the
/// confidence-weighted class probability that cleared the threshold, and the
/// window-global box.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub cell: usize,
    pub class: ObjClass,
    pub confidence: f64,
    pub bbox: Box,
}

/// Decode a grid at object threshold `t_o`: a cell yields a detection iff
/// `max(ĉ·p̂ᴿ, ĉ·p̂ᴵ) ≥ t_o`; the class is radar iff the radar product is
/// strictly larger (ties resolve to interference, the broader class).
pub fn decode(grid: &DetectionGrid, t_o: f64) -> Vec<Detection> {
    (0..GRID_CELLS)
        .filter_map(|i| {
            let cr = grid.conf_radar(i);
            let ci = grid.conf_interference(i);
            if cr.max(ci) < t_o {
                return None;
            }
            let class = if cr > ci { ObjClass::Radar } else { ObjClass::Interference };
            Some(Detection { cell: i, class, confidence: cr.max(ci), bbox: grid.decoded_box(i) })
        })
        .collect()
}

/// Decode a single class in isolation: every cell whose confidence-weighted
/// probability for `class` clears `threshold` becomes a detection of that
/// class, regardless of the other class's value. The override flow uses this
/// to re-read radar cells at the relaxed threshold.
pub fn decode_class(grid: &DetectionGrid, threshold: f64, class: ObjClass) -> Vec<Detection> {
    (0..GRID_CELLS)
        .filter_map(|i| {
            let conf = match class {
                ObjClass::Radar => grid.conf_radar(i),
                ObjClass::Interference => grid.conf_interference(i),
            };
            if conf < threshold {
                return None;
            }
            Some(Detection { cell: i, class, confidence: conf, bbox: grid.decoded_box(i) })
        })
        .collect()
}

// ─── parameter estimation ────────────────────────────────────────────────────

/// Sort spans by start and merge overlapping-or-touching ones.
fn merge_spans(mut spans: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    spans.sort_by(|a, b| a.partial_cmp(b).expect("spans must be finite"));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
    for (s, e) in spans {
        match merged.last_mut() {
            Some((_, le)) if s <= *le + MERGE_EPS => *le = le.max(e),
            _ => merged.push((s, e)),
        }
    }
    merged
}

fn union_length(spans: Vec<(f64, f64)>) -> f64 {
    merge_spans(spans).iter().map(|(s, e)| e - s).sum()
}

/// Recover radar parameters from radar-classified detections (one per
/// detected pulse). All outputs are normalized fractions; `pulse_interval`
/// is the minimum pairwise distance between window-global pulse centers and
/// is omitted when only one pulse was detected.
pub fn estimate_radar(dets: &[Detection]) -> Result<RadarEstimate> {
    if dets.is_empty() {
        return Err(Error::InvalidArgument("cannot estimate radar from zero detections".into()));
    }
    let n = dets.len() as f64;
    let center_freq_frac = dets.iter().map(|d| d.bbox.x).sum::<f64>() / n;
    let bandwidth_frac = union_length(dets.iter().map(|d| d.bbox.freq_span()).collect());
    let pulse_width_frac =
        dets.iter().map(|d| d.bbox.h).fold(f64::INFINITY, f64::min);
    let mut pulse_interval_frac = None;
    for (a, da) in dets.iter().enumerate() {
        for db in &dets[a + 1..] {
            let gap = (da.bbox.y - db.bbox.y).abs();
            pulse_interval_frac = Some(pulse_interval_frac.map_or(gap, |g: f64| g.min(gap)));
        }
    }
    Ok(RadarEstimate {
        num_pulses: dets.len() as u32,
        center_freq_frac,
        bandwidth_frac,
        pulse_width_frac,
        pulse_interval_frac,
    })
}

/// Recover interference activity from interference-classified detections:
/// band geometry plus the merged ON segments of the detected time spans.
pub fn estimate_interference(dets: &[Detection]) -> Result<InterferenceEstimate> {
    if dets.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot estimate interference from zero detections".into(),
        ));
    }
    let n = dets.len() as f64;
    let center_freq_frac = dets.iter().map(|d| d.bbox.x).sum::<f64>() / n;
    let bandwidth_frac = union_length(dets.iter().map(|d| d.bbox.freq_span()).collect());
    let on_segments = merge_spans(dets.iter().map(|d| d.bbox.time_span()).collect())
        .into_iter()
        .map(|(s, e)| ((s + e) / 2.0, e - s))
        .collect();
    Ok(InterferenceEstimate { center_freq_frac, bandwidth_frac, on_segments })
}
