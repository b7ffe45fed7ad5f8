//! IQ capture store.
//!
//! * `<name>.iq` — interleaved little-endian 32-bit floats
//!   (I₀, Q₀, I₁, Q₁, …), nothing else. Bit-exact round-trip.
//! * `<name>.meta` — TOML sidecar carrying sample rate, duration, truth
//!   parameters, and annotations ([`CaptureMeta`]).
//!
//! The same flat little-endian f32 layout (via [`write_tensor_f32`]) serves
//! as the optional debug dump format for spectrogram and scalogram tensors.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{CaptureMeta, IQCapture, SAMPLE_RATE_HZ};

/// Write interleaved I/Q as little-endian f32.
pub fn write_capture(path: &Path, capture: &IQCapture) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for s in &capture.samples {
        w.write_all(&s.re.to_le_bytes())?;
        w.write_all(&s.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read interleaved I/Q at the given sample rate (callers usually take it
/// from the sidecar; [`SAMPLE_RATE_HZ`] when there is none).
pub fn read_capture(path: &Path, sample_rate_hz: f64) -> Result<IQCapture> {
    let mut bytes = Vec::new();
    BufReader::new(fs::File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Format(format!(
            "{}: length {} is not a whole number of I/Q sample pairs",
            path.display(),
            bytes.len()
        )));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| {
            num_complex::Complex32::new(
                f32::from_le_bytes([c[0], c[1], c[2], c[3]]),
                f32::from_le_bytes([c[4], c[5], c[6], c[7]]),
            )
        })
        .collect();
    Ok(IQCapture { samples, sample_rate_hz, center_freq_hz: 0.0 })
}

/// Write the TOML sidecar for a capture.
pub fn write_meta(path: &Path, meta: &CaptureMeta) -> Result<()> {
    let text = toml::to_string_pretty(meta)?;
    fs::write(path, text)?;
    Ok(())
}

/// Read a TOML sidecar.
pub fn read_meta(path: &Path) -> Result<CaptureMeta> {
    let text = fs::read_to_string(path)?;
    Ok(toml::from_str(&text)?)
}

/// Dump a flat tensor as little-endian f32 (debug/plotting format for
/// spectrograms and scalograms).
pub fn write_tensor_f32(path: &Path, values: &[f32]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Convenience default-rate read for bare `.iq` files.
pub fn read_capture_default_rate(path: &Path) -> Result<IQCapture> {
    read_capture(path, SAMPLE_RATE_HZ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{qpsk_on_off_pattern, sample_radar_params};
    use crate::types::{Annotation, Box, InterferenceKind, InterferenceParams, WINDOW_S};

    #[test]
    fn iq_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cap.iq");
        let capture = IQCapture {
            samples: (0..1000)
                .map(|i| num_complex::Complex32::new((i as f32).sin() * 1e-3, -(i as f32) * 0.5))
                .collect(),
            sample_rate_hz: SAMPLE_RATE_HZ,
            center_freq_hz: 0.0,
        };
        write_capture(&path, &capture).unwrap();
        let back = read_capture(&path, SAMPLE_RATE_HZ).unwrap();
        for (a, b) in capture.samples.iter().zip(&back.samples) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn meta_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cap.meta");
        let meta = CaptureMeta {
            sample_rate_hz: SAMPLE_RATE_HZ,
            duration_s: WINDOW_S,
            seed: 1234,
            annotation: Annotation {
                radar_boxes: vec![Box::new(0.51234567890123, 0.25, 0.16, 1.25e-4)],
                interference_boxes: vec![Box::new(0.535, 0.09375, 0.91, 0.1875)],
                radar_truth: Some(sample_radar_params(4, 99).unwrap()),
                interference_truth: Some(InterferenceParams {
                    kind: InterferenceKind::QpskOnOff,
                    inr_db: 6.0,
                    bandwidth_hz: 9.1e6,
                    cf_offset_hz: 0.35e6,
                    on_off_pattern: qpsk_on_off_pattern(WINDOW_S),
                    ul_dl_config: 0,
                }),
            },
        };
        write_meta(&path, &meta).unwrap();
        let back = read_meta(&path).unwrap();
        assert_eq!(meta, back);
    }

    #[test]
    fn truncated_iq_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.iq");
        std::fs::write(&path, [0u8; 7]).unwrap();
        assert!(read_capture(&path, SAMPLE_RATE_HZ).is_err());
    }
}
