use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub width: usize,
    pub activation: Activation,
    /// Batch normalization between the affine map and the activation.
    pub batch_norm: bool,
}

impl LayerSpec {
    pub fn new(width: usize, activation: Activation) -> Self {
        Self {
            width,
            activation,
            batch_norm: false,
        }
    }
}

/// Topology of a fully connected binary classifier. The output is always a
/// single sigmoid unit after the last hidden layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub layers: Vec<LayerSpec>,
    /// Hidden layer (0-based) whose input is `[previous output, network input]`.
    pub skip_input_at: Option<usize>,
}

impl NetworkSpec {
    pub fn new(input_dim: usize, layers: Vec<LayerSpec>, skip_input_at: Option<usize>) -> Result<Self> {
        let spec = Self {
            input_dim,
            layers,
            skip_input_at,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `widths.len()` hidden layers sharing one activation.
    pub fn mlp(input_dim: usize, widths: &[usize], activation: Activation) -> Result<Self> {
        Self::new(
            input_dim,
            widths.iter().map(|&w| LayerSpec::new(w, activation)).collect(),
            None,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidArgument("input_dim must be positive".into()));
        }
        if self.layers.iter().any(|l| l.width == 0) {
            return Err(Error::InvalidArgument("layer widths must be positive".into()));
        }
        if let Some(s) = self.skip_input_at {
            if s == 0 || s >= self.layers.len() {
                return Err(Error::InvalidArgument(format!(
                    "skip_input_at {s} is not a hidden layer after the first"
                )));
            }
        }
        Ok(())
    }

    /// Input width of hidden layer `l`, including the skip concatenation.
    pub fn fan_in(&self, l: usize) -> usize {
        let prev = if l == 0 {
            self.input_dim
        } else {
            self.layers[l - 1].width
        };
        if self.skip_input_at == Some(l) {
            prev + self.input_dim
        } else {
            prev
        }
    }

    /// Width feeding the output unit.
    pub fn last_width(&self) -> usize {
        self.layers.last().map_or(self.input_dim, |l| l.width)
    }

    /// Same topology with every hidden width capped at `max_width`.
    pub fn clamped(&self, max_width: usize) -> Self {
        let mut s = self.clone();
        for l in &mut s.layers {
            l.width = l.width.min(max_width);
        }
        s
    }

    pub fn with_input_dim(&self, input_dim: usize) -> Self {
        Self {
            input_dim,
            ..self.clone()
        }
    }

    pub fn parameter_count(&self) -> usize {
        let hidden: usize = (0..self.layers.len())
            .map(|l| {
                let w = self.layers[l].width;
                w * self.fan_in(l) + w + if self.layers[l].batch_norm { 2 * w } else { 0 }
            })
            .sum();
        hidden + self.last_width() + 1
    }
}

pub const PRESET_NAMES: &[&str] = &[
    "MLP0",
    "MLP1",
    "MLP3",
    "MLP6",
    "MLP9",
    "MLP12",
    "MLP16",
    "NeRF",
    "NeRF_MLP",
    "NeRF_MLP_BN",
    "MLP2D",
];

/// Three equal hidden layers per MLP preset (auto-tuned sizes for each `L`).
const MLP_TABLE: &[(&str, usize, Activation)] = &[
    ("MLP0", 106, Activation::Tanh),
    ("MLP1", 176, Activation::Relu),
    ("MLP3", 51, Activation::Relu),
    ("MLP6", 38, Activation::Relu),
    ("MLP9", 25, Activation::Tanh),
    ("MLP12", 160, Activation::Tanh),
    ("MLP16", 111, Activation::Tanh),
];

/// NeRF-style trunk: the 6th hidden layer (index 5) takes the input again.
const NERF_SKIP: usize = 5;

pub fn preset_spec(name: &str, input_dim: usize) -> Result<NetworkSpec> {
    if let Some(&(_, width, act)) = MLP_TABLE.iter().find(|(n, _, _)| *n == name) {
        return NetworkSpec::mlp(input_dim, &[width; 3], act);
    }
    match name {
        "NeRF" => NetworkSpec::new(
            input_dim,
            vec![LayerSpec::new(256, Activation::Relu); 8],
            Some(NERF_SKIP),
        ),
        "NeRF_MLP" | "NeRF_MLP_BN" => {
            let bn = name == "NeRF_MLP_BN";
            let mut layers: Vec<LayerSpec> = (0..10)
                .map(|i| match i {
                    7 => LayerSpec::new(256, Activation::Linear),
                    9 => LayerSpec::new(128, Activation::Sigmoid),
                    _ => LayerSpec::new(256, Activation::Relu),
                })
                .collect();
            for l in &mut layers {
                l.batch_norm = bn && l.activation == Activation::Relu;
            }
            NetworkSpec::new(input_dim, layers, Some(NERF_SKIP))
        }
        "MLP2D" => NetworkSpec::mlp(input_dim, &[32, 32], Activation::Relu),
        _ => Err(Error::UnknownPreset(name.to_string())),
    }
}
