//! Self-describing model checkpoints.
//!
//! Layout: `b"SSCK"` magic, `u32` version, `u32` header length, a TOML
//! header (flow kind, input normalization, layer specs, per-buffer
//! parameter counts), then the parameter buffers as little-endian `f32`
//! in network visit order. Round-trips are bit-exact.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

use super::layers::LayerSpec;
use super::network::Network;
use crate::error::{Error, Result};
use crate::io::config::InputNorm;

const MAGIC: &[u8; 4] = b"SSCK";
const VERSION: u32 = 1;

/// Everything needed to reconstruct a frozen model.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    /// Which flow the model serves (`"grid_detector"` /
    /// `"scalogram_classifier"`).
    pub kind: String,
    /// Preprocessing normalization baked in at training time.
    pub input_norm: InputNorm,
    pub specs: Vec<LayerSpec>,
    /// One flat buffer per parameter tensor, in visit order.
    pub params: Vec<Vec<f32>>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    kind: String,
    input_norm: InputNorm,
    layers: Vec<LayerSpec>,
    param_counts: Vec<u64>,
}

impl Checkpoint {
    /// Snapshot a live network.
    pub fn from_network(kind: &str, input_norm: InputNorm, net: &Network<f32>) -> Checkpoint {
        let mut params = Vec::new();
        net.visit_params(&mut |p| params.push(p.to_vec()));
        Checkpoint { kind: kind.to_string(), input_norm, specs: net.specs(), params }
    }

    /// Rebuild the network these parameters describe.
    pub fn build_network(&self) -> Result<Network<f32>> {
        let mut net: Network<f32> = Network::build(&self.specs, 0)?;
        let flat: Vec<f32> = self.params.iter().flatten().copied().collect();
        net.set_params_flat(&flat)?;
        Ok(net)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let header = Header {
            kind: self.kind.clone(),
            input_norm: self.input_norm.clone(),
            layers: self.specs.clone(),
            param_counts: self.params.iter().map(|p| p.len() as u64).collect(),
        };
        let header_text = toml::to_string(&header).map_err(Error::from)?;
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(header_text.len() as u32).to_le_bytes())?;
        w.write_all(header_text.as_bytes())?;
        for buf in &self.params {
            for v in buf {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("{}: not a checkpoint file", path.display())));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported checkpoint version {version}")));
        }
        r.read_exact(&mut word)?;
        let header_len = u32::from_le_bytes(word) as usize;
        let mut header_bytes = vec![0u8; header_len];
        r.read_exact(&mut header_bytes)?;
        let header_text = String::from_utf8(header_bytes)
            .map_err(|_| Error::Format("checkpoint header is not UTF-8".into()))?;
        let header: Header = toml::from_str(&header_text)?;

        let mut params = Vec::with_capacity(header.param_counts.len());
        for &count in &header.param_counts {
            let mut bytes = vec![0u8; count as usize * 4];
            r.read_exact(&mut bytes)?;
            params.push(bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect());
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::Format("trailing bytes after checkpoint parameters".into()));
        }
        Ok(Checkpoint { kind: header.kind, input_norm: header.input_norm, specs: header.layers, params })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::tensor::{Chw, Tensor};

    fn sample_network() -> Network<f32> {
        let specs = [
            LayerSpec::Conv2d {
                input: Chw { c: 1, h: 8, w: 4 },
                out_channels: 2,
                kernel: 3,
                stride_rows: 2,
                stride_cols: 1,
                padding: 1,
            },
            LayerSpec::Relu,
            LayerSpec::Flatten,
            LayerSpec::Dense { inputs: 2 * 4 * 4, outputs: 3 },
            LayerSpec::Sigmoid,
        ];
        Network::build(&specs, 42).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let mut net = sample_network();
        let ckpt = Checkpoint::from_network(
            "grid_detector",
            InputNorm::Affine { offset: 10.0, scale: 0.05 },
            &mut net,
        );
        ckpt.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back.kind, ckpt.kind);
        assert_eq!(back.input_norm, ckpt.input_norm);
        assert_eq!(back.specs, ckpt.specs);
        assert_eq!(back.params.len(), ckpt.params.len());
        for (a, b) in back.params.iter().zip(&ckpt.params) {
            let bits_a: Vec<u32> = a.iter().map(|v| v.to_bits()).collect();
            let bits_b: Vec<u32> = b.iter().map(|v| v.to_bits()).collect();
            assert_eq!(bits_a, bits_b);
        }

        // The rebuilt network computes the same outputs bit-for-bit.
        let rebuilt = back.build_network().unwrap();
        let x = Tensor::<f32>::from_vec(&[1, 8, 4], (0..32).map(|i| (i as f32 * 0.37).sin()).collect()).unwrap();
        let y0 = net.forward(&x).unwrap();
        let y1 = rebuilt.forward(&x).unwrap();
        assert_eq!(
            y0.data.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            y1.data.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn corrupted_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");
        std::fs::write(&path, b"NOPE0000").unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_blob_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let mut net = sample_network();
        Checkpoint::from_network("grid_detector", InputNorm::Standardize, &mut net).save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        assert!(Checkpoint::load(&path).is_err());
    }
}
