//! Decode-threshold calibration from held-out training grids.
//!
//! For every training example the detector's confidence-weighted class
//! products are summarized on the cells the truth says are radar, are
//! interference, or are empty. Percentiles of those per-example summaries
//! become the [`CalibrationStats`] that set the two decode thresholds:
//!
//! * the object threshold `max(c_bno_max, min(c_ro_max, c_io_max))` — high
//!   enough to sit above what background cells typically reach, low enough
//!   that both object classes still clear it;
//! * the override threshold `c_ro_min` — the level true radar cells rarely
//!   fall below, used when the scalogram flow vouches for radar presence.
//!
//! Percentiles use the nearest-rank rule, so calibration is exactly
//! reproducible from the same grids.
//!
//! # Example
//!
//! ```
//! use specsense::detector::CalibrationStats;
//!
//! let stats = CalibrationStats {
//!     c_ro_max: 0.6,
//!     c_ro_min: 0.3,
//!     c_io_max: 0.7,
//!     c_io_min: 0.4,
//!     c_bno_max: 0.4,
//! };
//! assert_eq!(stats.object_threshold(), 0.6);
//! assert_eq!(stats.override_threshold(), 0.3);
//! ```

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectrogram::SpectrogramTensor;
use crate::types::{GridTarget, ObjClass, GRID_CELLS};

use super::grid::DetectionGrid;
use super::train::DetectorModel;

/// Percentile ranks used for the five statistics.
const OBJECT_PCT: f64 = 10.0;
const BACKGROUND_PCT: f64 = 95.0;

/// Percentile summaries of confidence-weighted class products on truth
/// strata, measured over a calibration set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStats {
    /// 10th percentile of per-example maxima of ĉ·p̂ᴿ on true radar cells.
    pub c_ro_max: f64,
    /// 10th percentile of per-example minima of ĉ·p̂ᴿ on true radar cells.
    pub c_ro_min: f64,
    /// 10th percentile of per-example maxima of ĉ·p̂ᴵ on true interference cells.
    pub c_io_max: f64,
    /// 10th percentile of per-example minima of ĉ·p̂ᴵ on true interference cells.
    pub c_io_min: f64,
    /// 95th percentile of per-example maxima of ĉ·(1 − p̂ᴿ − p̂ᴵ) on empty cells.
    pub c_bno_max: f64,
}

impl CalibrationStats {
    /// Object threshold for normal decoding.
    pub fn object_threshold(&self) -> f64 {
        self.c_bno_max.max(self.c_ro_max.min(self.c_io_max))
    }

    /// Relaxed radar threshold for the override re-decode.
    pub fn override_threshold(&self) -> f64 {
        self.c_ro_min
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).map_err(Error::from)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<CalibrationStats> {
        let text = std::fs::read_to_string(path)?;
        Ok(toml::from_str(&text)?)
    }
}

/// Nearest-rank percentile: the `⌈p/100·n⌉`-th smallest value. An empty set
/// yields 0 (an absent stratum contributes nothing to a max-composed
/// threshold).
pub fn nearest_rank_percentile(values: &[f64], p: f64) -> f64 {
    assert!((0.0..=100.0).contains(&p), "percentile out of range: {p}");
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("percentile values must be finite"));
    let rank = ((p / 100.0 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Calibrate from precomputed prediction grids paired with their targets.
///
/// Errors with [`Error::MissingStratum`] when no example contains a radar
/// cell: the override threshold would be meaningless. Interference and
/// empty strata may be absent; their statistics default to 0.
pub fn calibration_from_grids(
    grids: &[(DetectionGrid, GridTarget)],
) -> Result<CalibrationStats> {
    let mut ro_max = Vec::new();
    let mut ro_min = Vec::new();
    let mut io_max = Vec::new();
    let mut io_min = Vec::new();
    let mut bno_max = Vec::new();

    for (grid, target) in grids {
        if target.cells.len() != GRID_CELLS {
            return Err(Error::InvalidArgument(format!(
                "grid target needs {} cells, got {}",
                GRID_CELLS,
                target.cells.len()
            )));
        }
        let mut radar: Option<(f64, f64)> = None;
        let mut interference: Option<(f64, f64)> = None;
        let mut background: Option<f64> = None;
        for i in 0..GRID_CELLS {
            match target.cells[i].as_ref().map(|c| c.class) {
                Some(ObjClass::Radar) => {
                    let v = grid.conf_radar(i);
                    let (mx, mn) = radar.get_or_insert((v, v));
                    *mx = mx.max(v);
                    *mn = mn.min(v);
                }
                Some(ObjClass::Interference) => {
                    let v = grid.conf_interference(i);
                    let (mx, mn) = interference.get_or_insert((v, v));
                    *mx = mx.max(v);
                    *mn = mn.min(v);
                }
                None => {
                    let v = grid.conf_background(i);
                    let mx = background.get_or_insert(v);
                    *mx = mx.max(v);
                }
            }
        }
        if let Some((mx, mn)) = radar {
            ro_max.push(mx);
            ro_min.push(mn);
        }
        if let Some((mx, mn)) = interference {
            io_max.push(mx);
            io_min.push(mn);
        }
        if let Some(mx) = background {
            bno_max.push(mx);
        }
    }

    if ro_max.is_empty() {
        return Err(Error::MissingStratum(
            "calibration set contains no radar-labeled cells".into(),
        ));
    }

    let stats = CalibrationStats {
        c_ro_max: nearest_rank_percentile(&ro_max, OBJECT_PCT),
        c_ro_min: nearest_rank_percentile(&ro_min, OBJECT_PCT),
        c_io_max: nearest_rank_percentile(&io_max, OBJECT_PCT),
        c_io_min: nearest_rank_percentile(&io_min, OBJECT_PCT),
        c_bno_max: nearest_rank_percentile(&bno_max, BACKGROUND_PCT),
    };
    // With background ceilings at or above the weakest radar floor the
    // override threshold cannot exceed the object threshold; otherwise the
    // relaxed re-decode is not actually relaxed, which is worth a trace.
    if stats.c_bno_max >= stats.c_ro_min {
        debug_assert!(stats.override_threshold() <= stats.object_threshold());
    } else if stats.override_threshold() > stats.object_threshold() {
        log::warn!(
            "override threshold {:.6} exceeds object threshold {:.6}",
            stats.override_threshold(),
            stats.object_threshold()
        );
    }
    Ok(stats)
}

/// Run the detector over a calibration set and summarize its grids.
pub fn calibrate(
    model: &DetectorModel,
    data: &[(SpectrogramTensor, GridTarget)],
) -> Result<CalibrationStats> {
    let mut grids = Vec::with_capacity(data.len());
    for (spect, target) in data {
        grids.push((model.predict(spect)?, target.clone()));
    }
    calibration_from_grids(&grids)
}
