//! Versioned model file: one JSON header line, then one base64 line per
//! tensor holding little-endian `f32` values in row-major order.

use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::net::Mode;
use super::params::{init_params, NetworkParams};
use super::spec::{preset_spec, LayerSpec, NetworkSpec};
use crate::encoding::{encode_batch, encode_into, encoded_length, EncodingLevel, LAYOUT};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

const MAX_WIDTH: usize = 1 << 16;
const MAX_LAYERS: usize = 256;
const MAX_PARAMETERS: usize = 1 << 28;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format_version: u32,
    preset: String,
    input_dim: usize,
    raw_dim: usize,
    #[serde(rename = "L")]
    level: u32,
    layout: String,
    layers: Vec<LayerSpec>,
    skip_input_at: Option<usize>,
    tensors: Vec<TensorEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

/// A trained classifier together with the encoding its inputs need.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub preset: String,
    pub level: EncodingLevel,
    /// Width of the unencoded input (joint count).
    pub raw_dim: usize,
    pub params: NetworkParams<f32>,
}

impl Model {
    pub fn new(preset: impl Into<String>, level: EncodingLevel, raw_dim: usize, params: NetworkParams<f32>) -> Result<Self> {
        let expected = encoded_length(raw_dim, level);
        if params.spec().input_dim != expected {
            return Err(Error::dims(expected, params.spec().input_dim));
        }
        Ok(Self {
            preset: preset.into(),
            level,
            raw_dim,
            params,
        })
    }

    /// Freshly initialized weights for a named preset.
    pub fn untrained(preset: &str, level: EncodingLevel, raw_dim: usize, seed: u64) -> Result<Self> {
        let spec = preset_spec(preset, encoded_length(raw_dim, level))?;
        Self::new(preset, level, raw_dim, init_params(&spec, seed))
    }

    pub fn input_dim(&self) -> usize {
        self.params.spec().input_dim
    }

    /// Collision probability for one raw configuration.
    pub fn predict(&self, raw: &[f64]) -> Result<f32> {
        if raw.len() != self.raw_dim {
            return Err(Error::dims(self.raw_dim, raw.len()));
        }
        let mut buf = vec![0f32; self.input_dim()];
        encode_into(raw, self.level, &mut buf);
        self.params.forward(&buf, Mode::Infer)
    }

    /// Collision probabilities for raw configurations, one per row.
    pub fn predict_batch(&self, raw: ArrayView2<'_, f64>) -> Result<Array1<f32>> {
        if raw.ncols() != self.raw_dim {
            return Err(Error::dims(self.raw_dim, raw.ncols()));
        }
        let x = encode_batch::<f32>(raw, self.level);
        self.params.predict_batch(x.view())
    }

    pub fn to_file_string(&self) -> String {
        let spec = self.params.spec();
        let named = self.params.named_tensors();
        let header = Header {
            format_version: FORMAT_VERSION,
            preset: self.preset.clone(),
            input_dim: spec.input_dim,
            raw_dim: self.raw_dim,
            level: self.level.get() as u32,
            layout: LAYOUT.to_string(),
            layers: spec.layers.clone(),
            skip_input_at: spec.skip_input_at,
            tensors: named
                .iter()
                .map(|(name, shape, _)| TensorEntry {
                    name: name.clone(),
                    shape: shape.clone(),
                })
                .collect(),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for (_, _, data) in &named {
            let bytes: Vec<u8> = data.iter().flat_map(|v| v.to_le_bytes()).collect();
            out.push_str(&B64.encode(bytes));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header_line = lines.next().ok_or_else(|| Error::format("empty model file"))?;
        let header: Header =
            serde_json::from_str(header_line).map_err(|e| Error::format(format!("model header: {e}")))?;
        if header.format_version != FORMAT_VERSION {
            return Err(Error::format(format!(
                "unsupported model format_version {} (expected {FORMAT_VERSION})",
                header.format_version
            )));
        }
        if header.layout != LAYOUT {
            return Err(Error::format(format!("unsupported input layout {:?}", header.layout)));
        }
        let level = EncodingLevel::new(header.level).map_err(|e| Error::format(e.to_string()))?;
        if header.raw_dim == 0 || header.raw_dim > MAX_WIDTH {
            return Err(Error::format(format!("raw_dim {} out of range", header.raw_dim)));
        }
        if header.input_dim != encoded_length(header.raw_dim, level) {
            return Err(Error::format(format!(
                "input_dim {} inconsistent with raw_dim {} at L={}",
                header.input_dim, header.raw_dim, header.level
            )));
        }
        if header.layers.len() > MAX_LAYERS || header.layers.iter().any(|l| l.width > MAX_WIDTH) {
            return Err(Error::format("network too large"));
        }
        let spec = NetworkSpec::new(header.input_dim, header.layers, header.skip_input_at)
            .map_err(|e| Error::format(e.to_string()))?;
        if spec.parameter_count() > MAX_PARAMETERS {
            return Err(Error::format("network too large"));
        }

        let mut params: NetworkParams<f32> = init_params(&spec, 0);
        let expected: Vec<(String, Vec<usize>)> = params
            .named_tensors()
            .into_iter()
            .map(|(n, s, _)| (n, s))
            .collect();
        if expected.len() != header.tensors.len()
            || expected
                .iter()
                .zip(&header.tensors)
                .any(|((n, s), t)| *n != t.name || *s != t.shape)
        {
            return Err(Error::format("tensor table does not match the network layout"));
        }
        for ((name, _), dst) in expected.iter().zip(params.all_tensors_mut()) {
            let line = lines
                .next()
                .ok_or_else(|| Error::format(format!("truncated model file: missing tensor {name}")))?;
            let bytes = B64
                .decode(line.trim_end())
                .map_err(|e| Error::format(format!("tensor {name}: {e}")))?;
            if bytes.len() != dst.len() * 4 {
                return Err(Error::format(format!(
                    "tensor {name}: {} bytes, expected {}",
                    bytes.len(),
                    dst.len() * 4
                )));
            }
            for (d, chunk) in dst.iter_mut().zip(bytes.chunks_exact(4)) {
                *d = f32::from_le_bytes(chunk.try_into().unwrap());
            }
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::format("trailing data after the last tensor"));
        }
        if !params.is_finite() {
            return Err(Error::format("non-finite weight"));
        }
        Self::new(header.preset, level, header.raw_dim, params).map_err(|e| Error::format(e.to_string()))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|_| Error::format("model file is not UTF-8"))?;
        Self::parse(text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_file_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn random_configs(n: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, 6), |_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut model = Model::untrained("NeRF_MLP_BN", EncodingLevel::new(2).unwrap(), 6, 3).unwrap();
        model.params.hidden[0].norm.as_mut().unwrap().running_var.fill(1.7);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.model");
        model.save(&path).unwrap();
        let back = Model::load(&path).unwrap();
        assert_eq!(back, model);
        let xs = random_configs(100, 1);
        let a = model.predict_batch(xs.view()).unwrap();
        let b = back.predict_batch(xs.view()).unwrap();
        assert!(a.iter().zip(&b).all(|(u, v)| u.to_bits() == v.to_bits()));
    }

    #[test]
    fn truncated_file_is_a_format_error() {
        let model = Model::untrained("MLP3", EncodingLevel::new(3).unwrap(), 6, 0).unwrap();
        let text = model.to_file_string();
        let cut = &text[..text.len() * 2 / 3];
        assert!(matches!(Model::parse(cut), Err(Error::Format(_))));
        let header_only = text.lines().next().unwrap();
        assert!(matches!(Model::parse(header_only), Err(Error::Format(_))));
        assert!(matches!(Model::parse(""), Err(Error::Format(_))));
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let model = Model::untrained("MLP9", EncodingLevel::RAW, 6, 0).unwrap();
        let text = model.to_file_string().replacen("\"format_version\":1", "\"format_version\":2", 1);
        let err = Model::parse(&text).unwrap_err();
        assert!(err.to_string().contains("format_version"));
    }

    #[test]
    fn encoded_model_refuses_raw_vector() {
        let model = Model::untrained("MLP3", EncodingLevel::new(3).unwrap(), 6, 0).unwrap();
        assert_eq!(model.input_dim(), 42);
        assert!(matches!(
            model.params.forward(&[0.0f32; 6], Mode::Infer),
            Err(Error::DimensionMismatch { expected: 42, found: 6 })
        ));
        assert!(matches!(model.predict(&[0.0; 42]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn predict_encodes_before_the_network() {
        let level = EncodingLevel::new(1).unwrap();
        let model = Model::untrained("MLP1", level, 6, 7).unwrap();
        let raw = [0.1, -0.2, 0.3, 1.0, -2.0, 3.0];
        let encoded: Vec<f32> = crate::encoding::encode(&raw, level).0.iter().map(|&v| v as f32).collect();
        let direct = model.params.forward(&encoded, Mode::Infer).unwrap();
        assert_eq!(model.predict(&raw).unwrap(), direct);
    }

    #[test]
    fn header_records_layout_and_level() {
        let model = Model::untrained("MLP6", EncodingLevel::new(6).unwrap(), 6, 0).unwrap();
        let text = model.to_file_string();
        let header: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(header["L"], 6);
        assert_eq!(header["layout"], "per-scalar-grouped");
        assert_eq!(header["input_dim"], 78);
        assert_eq!(header["preset"], "MLP6");
        assert_eq!(text.lines().count(), 1 + 8);
    }
}
