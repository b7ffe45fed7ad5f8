//! Spectrogram preprocessing for the grid detector.
//!
//! A 16 ms window (160000 samples) becomes a 312×16 dB image:
//!
//! 1. reshape to 10000 rows of 16 consecutive samples (1.6 µs per row);
//! 2. 16-point DFT per row, rectangular window, no overlap, columns
//!    arranged low-to-high frequency (column 0 = −5 MHz edge, column 8 = DC);
//! 3. `20·log10(|·| + ε)` with ε = 1e-12;
//! 4. drop the trailing 16 rows (26 µs, far below any pulse interval),
//!    reshape to 312×32×16, and keep the max over the 32-row axis.
//!
//! The same module maps truth annotations onto the 32-cell training grid
//! ([`annotate_grid`]).

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::types::{
    Annotation, CellTarget, GridTarget, IQCapture, ObjClass, GRID_CELLS, WINDOW_SAMPLES,
};

/// Samples per DFT row (also the number of frequency columns).
pub const SPEC_COLS: usize = 16;
/// Raw DFT rows per window.
pub const SPEC_RAW_ROWS: usize = WINDOW_SAMPLES / SPEC_COLS;
/// Raw rows folded into one compressed row.
pub const SPEC_COMPRESS: usize = 32;
/// Compressed rows per window (trailing 16 raw rows dropped).
pub const SPEC_ROWS: usize = 312;
/// Magnitude floor inside the log.
pub const DB_EPS: f64 = 1e-12;

/// The 312×16 compressed log-spectrogram, row-major (time × frequency), dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramTensor {
    pub values: Vec<f32>,
}

impl SpectrogramTensor {
    /// An all-zero image (useful as a fixture).
    pub fn zeros() -> Self {
        SpectrogramTensor { values: vec![0.0; SPEC_ROWS * SPEC_COLS] }
    }

    pub fn at(&self, row: usize, col: usize) -> f32 {
        self.values[row * SPEC_COLS + col]
    }
}

/// Per-row 16-point DFTs of the window, row-major 10000×16, columns in
/// low-to-high frequency order (fftshifted). This is the exact quantity the
/// naive-DFT oracle checks.
pub fn row_dfts(s: &IQCapture) -> Result<Vec<Complex64>> {
    if s.samples.len() != WINDOW_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "spectrogram input needs {} samples, got {}",
            WINDOW_SAMPLES,
            s.samples.len()
        )));
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(SPEC_COLS);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut out = vec![Complex64::new(0.0, 0.0); WINDOW_SAMPLES];
    let mut row = [Complex64::new(0.0, 0.0); SPEC_COLS];
    for (r, chunk) in s.samples.chunks_exact(SPEC_COLS).enumerate() {
        for (dst, src) in row.iter_mut().zip(chunk) {
            *dst = Complex64::new(src.re as f64, src.im as f64);
        }
        fft.process_with_scratch(&mut row, &mut scratch);
        // fftshift: DFT bin k holds frequency k·fs/16 for k < 8 and
        // (k−16)·fs/16 for k ≥ 8; column c = k + 8 mod 16 orders them
        // −5 MHz .. +4.375 MHz.
        let base = r * SPEC_COLS;
        for (k, v) in row.iter().enumerate() {
            out[base + (k + SPEC_COLS / 2) % SPEC_COLS] = *v;
        }
    }
    Ok(out)
}

/// Element-wise `20·log10(|·| + ε)` of the row DFTs: the uncompressed
/// 10000×16 dB matrix.
pub fn log_magnitude(dfts: &[Complex64]) -> Vec<f64> {
    dfts.iter().map(|v| 20.0 * (v.norm() + DB_EPS).log10()).collect()
}

/// Fold the first 9984 rows of the 10000×16 dB matrix into 312 rows by
/// taking the max over non-overlapping groups of 32.
pub fn compress_rows(xu: &[f64]) -> SpectrogramTensor {
    assert_eq!(xu.len(), SPEC_RAW_ROWS * SPEC_COLS);
    let mut values = vec![f32::NEG_INFINITY; SPEC_ROWS * SPEC_COLS];
    for row in 0..SPEC_ROWS * SPEC_COMPRESS {
        let out_base = (row / SPEC_COMPRESS) * SPEC_COLS;
        let in_base = row * SPEC_COLS;
        for c in 0..SPEC_COLS {
            let v = xu[in_base + c] as f32;
            if v > values[out_base + c] {
                values[out_base + c] = v;
            }
        }
    }
    SpectrogramTensor { values }
}

/// Full preprocessing chain for one window.
pub fn make_spectrogram(s: &IQCapture) -> Result<SpectrogramTensor> {
    Ok(compress_rows(&log_magnitude(&row_dfts(s)?)))
}

// ─── grid targets ────────────────────────────────────────────────────────────

/// Map truth boxes onto the 32-cell training grid.
///
/// Radar pulses are far shorter than a cell, so each is assigned whole to
/// the cell containing its time center. Interference ON segments span many
/// cells; each is split into per-cell slices (clipped to the cell) so the
/// stored `h` stays in `[0,1]` cell units. Cell collisions resolve to
/// interference when the classes differ (a cell sharing radar and
/// interference is labeled interference) and to the earlier-centered object
/// within a class.
pub fn annotate_grid(a: &Annotation) -> GridTarget {
    let mut target = GridTarget::empty();

    let mut place = |cell: usize, cand: CellTarget| {
        match &target.cells[cell] {
            None => target.cells[cell] = Some(cand),
            Some(existing) => {
                if existing.class == cand.class {
                    if cand.y < existing.y {
                        target.cells[cell] = Some(cand);
                    }
                } else if cand.class == ObjClass::Interference {
                    target.cells[cell] = Some(cand);
                }
                // An interference incumbent keeps the cell against radar.
            }
        }
    };

    for b in &a.radar_boxes {
        let cells = GRID_CELLS as f64;
        let cell = ((b.y * cells).floor() as usize).min(GRID_CELLS - 1);
        place(
            cell,
            CellTarget {
                class: ObjClass::Radar,
                x: b.x,
                y: b.y * cells - cell as f64,
                w: b.w,
                h: b.h * cells,
            },
        );
    }

    for b in &a.interference_boxes {
        let cells = GRID_CELLS as f64;
        let (t0, t1) = b.time_span();
        let (t0, t1) = (t0.max(0.0), t1.min(1.0));
        if t1 <= t0 {
            continue;
        }
        let first = ((t0 * cells).floor() as usize).min(GRID_CELLS - 1);
        let last = (((t1 * cells).ceil() as usize).max(first + 1) - 1).min(GRID_CELLS - 1);
        for cell in first..=last {
            let lo = t0.max(cell as f64 / cells);
            let hi = t1.min((cell + 1) as f64 / cells);
            if hi - lo < 1e-12 {
                continue;
            }
            place(
                cell,
                CellTarget {
                    class: ObjClass::Interference,
                    x: b.x,
                    y: (lo + hi) / 2.0 * cells - cell as f64,
                    w: b.w,
                    h: (hi - lo) * cells,
                },
            );
        }
    }

    target
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Box, SAMPLE_RATE_HZ, WINDOW_S};

    fn tone_capture(freq_hz: f64, amp: f64) -> IQCapture {
        let samples = (0..WINDOW_SAMPLES)
            .map(|n| {
                let ph = 2.0 * std::f64::consts::PI * freq_hz * n as f64 / SAMPLE_RATE_HZ;
                num_complex::Complex32::new((amp * ph.cos()) as f32, (amp * ph.sin()) as f32)
            })
            .collect();
        IQCapture { samples, sample_rate_hz: SAMPLE_RATE_HZ, center_freq_hz: 0.0 }
    }

    #[test]
    fn constant_signal_concentrates_at_dc_column() {
        let x = make_spectrogram(&tone_capture(0.0, 1.0)).unwrap();
        assert_eq!(x.values.len(), SPEC_ROWS * SPEC_COLS);
        let dc = 20.0 * (16.0f64 + DB_EPS).log10();
        let floor = 20.0 * DB_EPS.log10();
        for row in 0..SPEC_ROWS {
            assert!((x.at(row, 8) as f64 - dc).abs() < 1e-4);
            for col in (0..SPEC_COLS).filter(|&c| c != 8) {
                assert!((x.at(row, col) as f64 - floor).abs() < 1e-3, "row {row} col {col}: {}", x.at(row, col));
            }
        }
    }

    #[test]
    fn tone_at_bin_center_dominates_its_column() {
        // +1.875 MHz = bin 3 of the 16-point DFT = column 11 after the shift.
        let x = make_spectrogram(&tone_capture(1.875e6, 1.0)).unwrap();
        for row in 0..SPEC_ROWS {
            let (mut best_col, mut best) = (0, f32::NEG_INFINITY);
            for col in 0..SPEC_COLS {
                if x.at(row, col) > best {
                    best = x.at(row, col);
                    best_col = col;
                }
            }
            assert_eq!(best_col, 11, "row {row}");
        }
    }

    #[test]
    fn rows_satisfy_parseval() {
        let s = {
            let mut c = tone_capture(0.7e6, 0.5);
            // Stir in a deterministic non-tonal component.
            for (i, v) in c.samples.iter_mut().enumerate() {
                v.re += ((i * 2654435761) % 1000) as f32 / 1000.0 - 0.5;
            }
            c
        };
        let dfts = row_dfts(&s).unwrap();
        for r in 0..64 {
            let spec: f64 = dfts[r * SPEC_COLS..(r + 1) * SPEC_COLS].iter().map(|v| v.norm_sqr()).sum();
            let time: f64 = s.samples[r * SPEC_COLS..(r + 1) * SPEC_COLS]
                .iter()
                .map(|v| (v.re as f64) * (v.re as f64) + (v.im as f64) * (v.im as f64))
                .sum();
            assert!((spec - 16.0 * time).abs() <= 1e-9 * spec.max(1.0), "row {r}");
        }
    }

    #[test]
    fn compression_keeps_row_maxima() {
        let s = tone_capture(-3.125e6, 2.0);
        let xu = log_magnitude(&row_dfts(&s).unwrap());
        let x = compress_rows(&xu);
        for row in 0..SPEC_ROWS {
            for col in 0..SPEC_COLS {
                let max = (0..SPEC_COMPRESS)
                    .map(|u| xu[((row * SPEC_COMPRESS) + u) * SPEC_COLS + col])
                    .fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(x.at(row, col), max as f32);
            }
        }
    }

    #[test]
    fn separated_pulses_land_on_distinct_compressed_rows() {
        // Two 2 µs pulses 300 µs apart (the minimum pulse interval):
        // compressed rows are 51.2 µs, so the pulses must not share one.
        let mut samples = vec![num_complex::Complex32::new(0.0, 0.0); WINDOW_SAMPLES];
        let pulse = |start_s: f64, samples: &mut Vec<num_complex::Complex32>| {
            let n0 = (start_s * SAMPLE_RATE_HZ) as usize;
            for n in n0..n0 + 20 {
                samples[n] = num_complex::Complex32::new(1.0, 0.0);
            }
        };
        pulse(1.0e-3, &mut samples);
        pulse(1.3e-3, &mut samples);
        let x = make_spectrogram(&IQCapture {
            samples,
            sample_rate_hz: SAMPLE_RATE_HZ,
            center_freq_hz: 0.0,
        })
        .unwrap();
        let row_power = |row: usize| (0..SPEC_COLS).map(|c| x.at(row, c)).fold(f32::NEG_INFINITY, f32::max);
        let floor = row_power(0);
        let hot: Vec<usize> = (0..SPEC_ROWS).filter(|&r| row_power(r) > floor + 20.0).collect();
        assert_eq!(hot.len(), 2, "hot rows: {hot:?}");
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(make_spectrogram(&IQCapture::zeros(100)).is_err());
    }

    // ─── grid targets ───────────────────────────────────────────────────────

    #[test]
    fn pulses_milliseconds_apart_land_in_distinct_cells() {
        let ann = Annotation {
            radar_boxes: (0..16)
                .map(|k| Box::new(0.5, (0.5 + k as f64) / 16.0, 0.16, 1.25e-4))
                .collect(),
            ..Default::default()
        };
        let t = annotate_grid(&ann);
        assert_eq!(t.num_objects(), 16);
        // 1 ms spacing = 2 cells; the occupied cells are 0, 2, 4, ...
        for (i, cell) in t.cells.iter().enumerate() {
            assert_eq!(cell.is_some(), i % 2 == 1, "cell {i}");
        }
    }

    #[test]
    fn interference_wins_shared_cells() {
        let ann = Annotation {
            radar_boxes: vec![Box::new(0.5, 7.5 / 32.0, 0.16, 1.25e-4)],
            interference_boxes: vec![Box::new(0.535, 0.25, 0.91, 0.125)],
            ..Default::default()
        };
        let t = annotate_grid(&ann);
        let cell7 = t.cells[7].expect("cell 7 must hold an object");
        assert_eq!(cell7.class, ObjClass::Interference);
    }

    #[test]
    fn empty_annotation_gives_empty_grid() {
        let t = annotate_grid(&Annotation::default());
        assert_eq!(t.num_objects(), 0);
    }

    #[test]
    fn full_window_interference_fills_every_cell() {
        let ann = Annotation {
            interference_boxes: vec![Box::new(0.535, 0.5, 0.91, 1.0)],
            ..Default::default()
        };
        let t = annotate_grid(&ann);
        assert_eq!(t.num_objects(), GRID_CELLS);
        for cell in t.cells.iter().flatten() {
            assert_eq!(cell.class, ObjClass::Interference);
            assert!((cell.y - 0.5).abs() < 1e-9);
            assert!((cell.h - 1.0).abs() < 1e-9);
            assert!((cell.x - 0.535).abs() < 1e-12);
        }
    }

    #[test]
    fn radar_cell_coordinates_are_cell_relative() {
        // Pulse centered at 0.205 of the window: cell 6 (0.1875..0.21875),
        // offset (0.205·32 − 6) = 0.56 of a cell.
        let h_global = 50.0e-6 / WINDOW_S;
        let ann = Annotation {
            radar_boxes: vec![Box::new(0.4, 0.205, 0.2, h_global)],
            ..Default::default()
        };
        let t = annotate_grid(&ann);
        let cell = t.cells[6].expect("pulse lands in cell 6");
        assert_eq!(cell.class, ObjClass::Radar);
        assert!((cell.y - (0.205 * 32.0 - 6.0)).abs() < 1e-9);
        assert!((cell.h - h_global * 32.0).abs() < 1e-9);
        assert!((cell.x - 0.4).abs() < 1e-12);
        assert!((cell.w - 0.2).abs() < 1e-12);
    }

    #[test]
    fn within_class_collision_keeps_earlier_object() {
        // Two pulses whose centers share cell 3; the earlier one stays.
        let ann = Annotation {
            radar_boxes: vec![
                Box::new(0.5, (3.0 + 0.8) / 32.0, 0.16, 1.0e-4),
                Box::new(0.3, (3.0 + 0.2) / 32.0, 0.16, 1.0e-4),
            ],
            ..Default::default()
        };
        let t = annotate_grid(&ann);
        let cell = t.cells[3].unwrap();
        assert!((cell.x - 0.3).abs() < 1e-12, "earlier-centered pulse wins");
        assert_eq!(t.num_objects(), 1);
    }
}
