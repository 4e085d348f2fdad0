use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::spec::{Activation, NetworkSpec};
use super::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    /// `fan_out × fan_in`, row-major.
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm<T> {
    pub scale: Array1<T>,
    pub shift: Array1<T>,
    pub running_mean: Array1<T>,
    pub running_var: Array1<T>,
}

impl<T: Real> BatchNorm<T> {
    fn identity(width: usize) -> Self {
        Self {
            scale: Array1::from_elem(width, T::one()),
            shift: Array1::zeros(width),
            running_mean: Array1::zeros(width),
            running_var: Array1::from_elem(width, T::one()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenLayer<T> {
    pub dense: Dense<T>,
    pub norm: Option<BatchNorm<T>>,
}

/// Weights of a network built from a [`NetworkSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams<T> {
    pub(crate) spec: NetworkSpec,
    pub(crate) hidden: Vec<HiddenLayer<T>>,
    pub(crate) output: Dense<T>,
}

fn init_std(activation: Activation, fan_in: usize, fan_out: usize) -> f64 {
    match activation {
        Activation::Relu => (2.0 / fan_in as f64).sqrt(),
        _ => (2.0 / (fan_in + fan_out) as f64).sqrt(),
    }
}

/// He-normal weights for ReLU layers, Xavier-normal otherwise (the output
/// unit counts as sigmoid). Biases start at zero; batch norm at identity
/// with running statistics (0, 1). Samples are drawn in `f64` so `f32` and
/// `f64` networks from one seed agree up to rounding.
pub fn init_params<T: Real>(spec: &NetworkSpec, seed: u64) -> NetworkParams<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dense = |fan_out: usize, fan_in: usize, act: Activation| {
        let normal = Normal::new(0.0, init_std(act, fan_in, fan_out)).expect("finite std");
        Dense {
            weight: Array2::from_shape_simple_fn((fan_out, fan_in), || {
                T::from_f64(normal.sample(&mut rng)).unwrap()
            }),
            bias: Array1::zeros(fan_out),
        }
    };
    let hidden = spec
        .layers
        .iter()
        .enumerate()
        .map(|(l, layer)| HiddenLayer {
            dense: dense(layer.width, spec.fan_in(l), layer.activation),
            norm: layer.batch_norm.then(|| BatchNorm::identity(layer.width)),
        })
        .collect();
    let output = dense(1, spec.last_width(), Activation::Sigmoid);
    NetworkParams {
        spec: spec.clone(),
        hidden,
        output,
    }
}

impl<T: Real> NetworkParams<T> {
    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn hidden(&self) -> &[HiddenLayer<T>] {
        &self.hidden
    }

    pub fn output(&self) -> &Dense<T> {
        &self.output
    }

    /// Trainable tensors in canonical order: per hidden layer weight, bias,
    /// then (with batch norm) scale, shift; finally the output weight, bias.
    pub fn trainable(&self) -> Vec<&[T]> {
        let mut out = Vec::new();
        for h in &self.hidden {
            out.push(h.dense.weight.as_slice().expect("standard layout"));
            out.push(h.dense.bias.as_slice().expect("standard layout"));
            if let Some(bn) = &h.norm {
                out.push(bn.scale.as_slice().expect("standard layout"));
                out.push(bn.shift.as_slice().expect("standard layout"));
            }
        }
        out.push(self.output.weight.as_slice().expect("standard layout"));
        out.push(self.output.bias.as_slice().expect("standard layout"));
        out
    }

    pub fn trainable_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = Vec::new();
        for h in &mut self.hidden {
            out.push(h.dense.weight.as_slice_mut().expect("standard layout"));
            out.push(h.dense.bias.as_slice_mut().expect("standard layout"));
            if let Some(bn) = &mut h.norm {
                out.push(bn.scale.as_slice_mut().expect("standard layout"));
                out.push(bn.shift.as_slice_mut().expect("standard layout"));
            }
        }
        out.push(self.output.weight.as_slice_mut().expect("standard layout"));
        out.push(self.output.bias.as_slice_mut().expect("standard layout"));
        out
    }

    /// Every stored tensor (trainable plus running statistics) with a name,
    /// in file order.
    pub fn named_tensors(&self) -> Vec<(String, Vec<usize>, &[T])> {
        let mut out = Vec::new();
        let s = |a: &[T]| a.len();
        for (i, h) in self.hidden.iter().enumerate() {
            let w = &h.dense.weight;
            out.push((format!("hidden.{i}.weight"), w.shape().to_vec(), w.as_slice().unwrap()));
            let b = h.dense.bias.as_slice().unwrap();
            out.push((format!("hidden.{i}.bias"), vec![s(b)], b));
            if let Some(bn) = &h.norm {
                for (name, t) in [
                    ("bn_scale", &bn.scale),
                    ("bn_shift", &bn.shift),
                    ("bn_running_mean", &bn.running_mean),
                    ("bn_running_var", &bn.running_var),
                ] {
                    let t = t.as_slice().unwrap();
                    out.push((format!("hidden.{i}.{name}"), vec![s(t)], t));
                }
            }
        }
        let w = &self.output.weight;
        out.push(("output.weight".into(), w.shape().to_vec(), w.as_slice().unwrap()));
        let b = self.output.bias.as_slice().unwrap();
        out.push(("output.bias".into(), vec![s(b)], b));
        out
    }

    /// Mutable counterpart of [`NetworkParams::named_tensors`] (same order).
    pub(crate) fn all_tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = Vec::new();
        for h in &mut self.hidden {
            out.push(h.dense.weight.as_slice_mut().unwrap());
            out.push(h.dense.bias.as_slice_mut().unwrap());
            if let Some(bn) = &mut h.norm {
                out.push(bn.scale.as_slice_mut().unwrap());
                out.push(bn.shift.as_slice_mut().unwrap());
                out.push(bn.running_mean.as_slice_mut().unwrap());
                out.push(bn.running_var.as_slice_mut().unwrap());
            }
        }
        out.push(self.output.weight.as_slice_mut().unwrap());
        out.push(self.output.bias.as_slice_mut().unwrap());
        out
    }

    pub fn is_finite(&self) -> bool {
        self.named_tensors()
            .iter()
            .all(|(_, _, t)| t.iter().all(|v| v.is_finite()))
    }

    /// Element-wise conversion, e.g. an `f32` network to `f64`.
    pub fn cast<U: Real>(&self) -> NetworkParams<U> {
        let c1 = |a: &Array1<T>| a.mapv(|v| U::from_f64(v.to_f64().unwrap()).unwrap());
        let c2 = |a: &Array2<T>| a.mapv(|v| U::from_f64(v.to_f64().unwrap()).unwrap());
        NetworkParams {
            spec: self.spec.clone(),
            hidden: self
                .hidden
                .iter()
                .map(|h| HiddenLayer {
                    dense: Dense {
                        weight: c2(&h.dense.weight),
                        bias: c1(&h.dense.bias),
                    },
                    norm: h.norm.as_ref().map(|bn| BatchNorm {
                        scale: c1(&bn.scale),
                        shift: c1(&bn.shift),
                        running_mean: c1(&bn.running_mean),
                        running_var: c1(&bn.running_var),
                    }),
                })
                .collect(),
            output: Dense {
                weight: c2(&self.output.weight),
                bias: c1(&self.output.bias),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{preset_spec, LayerSpec};

    #[test]
    fn seeded_init_is_reproducible() {
        let spec = preset_spec("NeRF_MLP_BN", 18).unwrap();
        let a: NetworkParams<f32> = init_params(&spec, 42);
        let b: NetworkParams<f32> = init_params(&spec, 42);
        assert_eq!(a, b);
        let c: NetworkParams<f32> = init_params(&spec, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn shapes_follow_the_spec() {
        let spec = preset_spec("NeRF", 18).unwrap();
        let p: NetworkParams<f64> = init_params(&spec, 0);
        assert_eq!(p.hidden[0].dense.weight.dim(), (256, 18));
        assert_eq!(p.hidden[5].dense.weight.dim(), (256, 256 + 18));
        assert_eq!(p.output.weight.dim(), (1, 256));
        let n: usize = p.trainable().iter().map(|t| t.len()).sum();
        assert_eq!(n, spec.parameter_count());
    }

    #[test]
    fn biases_zero_and_bn_identity() {
        let spec = preset_spec("NeRF_MLP_BN", 6).unwrap();
        let p: NetworkParams<f32> = init_params(&spec, 1);
        assert!(p.hidden.iter().all(|h| h.dense.bias.iter().all(|&b| b == 0.0)));
        assert!(p.output.bias.iter().all(|&b| b == 0.0));
        let bn = p.hidden[0].norm.as_ref().unwrap();
        assert!(bn.scale.iter().all(|&v| v == 1.0) && bn.shift.iter().all(|&v| v == 0.0));
        assert!(bn.running_mean.iter().all(|&v| v == 0.0) && bn.running_var.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn he_scale_for_relu() {
        let spec = NetworkSpec::new(100, vec![LayerSpec::new(200, Activation::Relu)], None).unwrap();
        let p: NetworkParams<f64> = init_params(&spec, 7);
        let w = &p.hidden[0].dense.weight;
        assert!(w.len() >= 10_000);
        let mean = w.mean().unwrap();
        let std = (w.mapv(|v| (v - mean).powi(2)).mean().unwrap()).sqrt();
        let target = (2.0f64 / 100.0).sqrt();
        assert!((std / target - 1.0).abs() < 0.2, "std {std} vs {target}");
    }

    #[test]
    fn xavier_scale_for_tanh() {
        let spec = NetworkSpec::new(100, vec![LayerSpec::new(200, Activation::Tanh)], None).unwrap();
        let p: NetworkParams<f64> = init_params(&spec, 7);
        let w = &p.hidden[0].dense.weight;
        let std = w.mapv(|v| v * v).mean().unwrap().sqrt();
        let target = (2.0f64 / 300.0).sqrt();
        assert!((std / target - 1.0).abs() < 0.2);
    }
}
