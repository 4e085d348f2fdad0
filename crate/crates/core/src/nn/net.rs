//! Forward passes and backpropagation.

use ndarray::{concatenate, s, Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};

use super::params::{Dense, NetworkParams};
use super::spec::Activation;
use super::Real;
use crate::error::{Error, Result};

pub const BN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch normalization uses the statistics of the batch itself.
    Train,
    /// Batch normalization uses the running statistics.
    Infer,
}

#[inline]
pub(crate) fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `−[y ln σ(z) + (1−y) ln(1−σ(z))]`, written to stay finite for large |z|.
#[inline]
pub(crate) fn bce_with_logit<T: Real>(z: T, y: T) -> T {
    z.max(T::zero()) - z * y + (-z.abs()).exp().ln_1p()
}

fn affine<T: Real>(x: ArrayView2<'_, T>, d: &Dense<T>) -> Array2<T> {
    // GEMM's fixed cost dominates a single row.
    if let (1, Some(xs), Some(w), Some(b)) = (x.nrows(), x.to_slice(), d.weight.as_slice(), d.bias.as_slice()) {
        let fan_in = xs.len();
        let z = b
            .iter()
            .enumerate()
            .map(|(o, &bo)| bo + dot(xs, &w[o * fan_in..(o + 1) * fan_in]))
            .collect();
        return Array2::from_shape_vec((1, b.len()), z).expect("1 x out");
    }
    gemm_affine(x, d)
}

fn gemm_affine<T: Real>(x: ArrayView2<'_, T>, d: &Dense<T>) -> Array2<T> {
    let mut z = x.dot(&d.weight.t());
    z += &d.bias;
    z
}

/// Eight independent partial sums so the loop vectorizes.
#[inline]
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: T = ca.remainder().iter().zip(cb.remainder()).fold(T::zero(), |s, (&u, &v)| s + u * v);
    for (u, v) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += u[k] * v[k];
        }
    }
    acc.iter().fold(tail, |s, &v| s + v)
}

fn activate<T: Real>(act: Activation, u: &mut Array2<T>) {
    match act {
        Activation::Relu => u.mapv_inplace(|v| v.max(T::zero())),
        Activation::Tanh => u.mapv_inplace(T::tanh_activation),
        Activation::Sigmoid => u.mapv_inplace(sigmoid),
        Activation::Linear => {}
    }
}

/// Multiplies `grad` in place by the activation derivative, written in
/// terms of the activation output `a`.
fn activation_backward<T: Real>(act: Activation, a: &Array2<T>, grad: &mut Array2<T>) {
    match act {
        Activation::Relu => Zip::from(grad).and(a).for_each(|g, &a| {
            if a <= T::zero() {
                *g = T::zero()
            }
        }),
        Activation::Tanh => Zip::from(grad)
            .and(a)
            .for_each(|g, &a| *g = *g * (T::one() - a * a)),
        Activation::Sigmoid => Zip::from(grad)
            .and(a)
            .for_each(|g, &a| *g = *g * a * (T::one() - a)),
        Activation::Linear => {}
    }
}

/// Products may come back column-major; gradients are exposed as slices.
fn standard<T: Real>(a: Array2<T>) -> Array2<T> {
    if a.is_standard_layout() {
        a
    } else {
        a.as_standard_layout().into_owned()
    }
}

struct LayerTrace<T> {
    input: Array2<T>,
    norm: Option<NormTrace<T>>,
    out: Array2<T>,
}

struct NormTrace<T> {
    xhat: Array2<T>,
    inv_std: Array1<T>,
    mean: Array1<T>,
    var: Array1<T>,
}

/// Per-feature batch mean and (biased) variance of one normalized layer.
#[derive(Debug, Clone)]
pub struct BatchStats<T> {
    pub mean: Array1<T>,
    pub var: Array1<T>,
}

pub(crate) struct TrainPass<T> {
    pub loss: T,
    pub gradients: Gradients<T>,
    pub stats: Vec<Option<BatchStats<T>>>,
}

/// Gradients shaped like the trainable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub hidden: Vec<LayerGradient<T>>,
    pub output_weight: Array2<T>,
    pub output_bias: Array1<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
    /// `(scale, shift)` for normalized layers.
    pub norm: Option<(Array1<T>, Array1<T>)>,
}

impl<T: Real> Gradients<T> {
    /// Same order as [`NetworkParams::trainable`].
    pub fn tensors(&self) -> Vec<&[T]> {
        let mut out = Vec::new();
        for h in &self.hidden {
            out.push(h.weight.as_slice().expect("standard layout"));
            out.push(h.bias.as_slice().expect("standard layout"));
            if let Some((scale, shift)) = &h.norm {
                out.push(scale.as_slice().expect("standard layout"));
                out.push(shift.as_slice().expect("standard layout"));
            }
        }
        out.push(self.output_weight.as_slice().expect("standard layout"));
        out.push(self.output_bias.as_slice().expect("standard layout"));
        out
    }
}

impl<T: Real> NetworkParams<T> {
    fn check_width(&self, width: usize) -> Result<()> {
        if width != self.spec.input_dim {
            return Err(Error::dims(self.spec.input_dim, width));
        }
        Ok(())
    }

    fn layer_input(&self, l: usize, h: Array2<T>, x: ArrayView2<'_, T>) -> Array2<T> {
        if self.spec.skip_input_at == Some(l) {
            concatenate![Axis(1), h, x]
        } else {
            h
        }
    }

    /// Inference-mode logits for every row of `x`.
    pub fn logits(&self, x: ArrayView2<'_, T>) -> Result<Array1<T>> {
        self.check_width(x.ncols())?;
        let eps = T::from_f64(BN_EPS).unwrap();
        let mut h = x.to_owned();
        for (l, layer) in self.hidden.iter().enumerate() {
            let input = self.layer_input(l, h, x);
            let mut z = affine(input.view(), &layer.dense);
            if let Some(bn) = &layer.norm {
                let a = Zip::from(&bn.scale)
                    .and(&bn.running_var)
                    .map_collect(|&g, &v| g / (v + eps).sqrt());
                let b = &bn.shift - &(&bn.running_mean * &a);
                z *= &a;
                z += &b;
            }
            activate(self.spec.layers[l].activation, &mut z);
            h = z;
        }
        let out = affine(h.view(), &self.output);
        Ok(out.column(0).to_owned())
    }

    /// Logits for every row of `x`; [`Mode::Train`] treats `x` as one batch.
    pub fn logits_with(&self, x: ArrayView2<'_, T>, mode: Mode) -> Result<Array1<T>> {
        match mode {
            Mode::Infer => self.logits(x),
            Mode::Train => {
                self.check_width(x.ncols())?;
                Ok(self.train_forward(x).1)
            }
        }
    }

    /// Inference-mode probabilities for every row of `x`.
    pub fn predict_batch(&self, x: ArrayView2<'_, T>) -> Result<Array1<T>> {
        Ok(self.logits(x)?.mapv(sigmoid))
    }

    /// Probability for one input vector.
    ///
    /// In [`Mode::Train`] a single sample is its own batch, so normalized
    /// layers see zero variance and output their shift.
    pub fn forward(&self, x: &[T], mode: Mode) -> Result<T> {
        self.check_width(x.len())?;
        let view = ArrayView2::from_shape((1, x.len()), x).expect("contiguous row");
        let logit = match mode {
            Mode::Infer => self.logits(view)?[0],
            Mode::Train => self.train_forward(view).1[0],
        };
        Ok(sigmoid(logit))
    }

    fn train_forward(&self, x: ArrayView2<'_, T>) -> (Vec<LayerTrace<T>>, Array1<T>, Array2<T>) {
        let eps = T::from_f64(BN_EPS).unwrap();
        let mut traces = Vec::with_capacity(self.hidden.len());
        let mut h = x.to_owned();
        for (l, layer) in self.hidden.iter().enumerate() {
            let input = self.layer_input(l, h, x);
            let mut z = affine(input.view(), &layer.dense);
            let norm = layer.norm.as_ref().map(|bn| {
                let mean = z.mean_axis(Axis(0)).expect("non-empty batch");
                z -= &mean;
                let var = z.mapv(|v| v * v).mean_axis(Axis(0)).unwrap();
                let inv_std = var.mapv(|v| T::one() / (v + eps).sqrt());
                z *= &inv_std;
                let xhat = z.clone();
                z *= &bn.scale;
                z += &bn.shift;
                NormTrace {
                    xhat,
                    inv_std,
                    mean,
                    var,
                }
            });
            activate(self.spec.layers[l].activation, &mut z);
            h = z.clone();
            traces.push(LayerTrace {
                input,
                norm,
                out: z,
            });
        }
        let logits = affine(h.view(), &self.output).column(0).to_owned();
        (traces, logits, h)
    }

    /// One training-mode forward/backward pass over a batch.
    pub(crate) fn train_pass(&self, x: ArrayView2<'_, T>, y: ArrayView1<'_, T>) -> Result<TrainPass<T>> {
        self.check_width(x.ncols())?;
        if x.nrows() != y.len() {
            return Err(Error::dims(x.nrows(), y.len()));
        }
        if x.nrows() == 0 {
            return Err(Error::EmptyDataset);
        }
        let n = T::from_usize(x.nrows()).unwrap();
        let (traces, logits, last) = self.train_forward(x);

        let loss = Zip::from(&logits)
            .and(y)
            .fold(T::zero(), |acc, &z, &t| acc + bce_with_logit(z, t))
            / n;
        let dlogit = Zip::from(&logits)
            .and(y)
            .map_collect(|&z, &t| (sigmoid(z) - t) / n);

        let dcol = dlogit.view().insert_axis(Axis(1));
        let output_weight = standard(dcol.t().dot(&last));
        let output_bias = Array1::from_elem(1, dlogit.sum());
        let mut dh = dcol.dot(&self.output.weight);

        let mut hidden = Vec::with_capacity(traces.len());
        let mut stats = Vec::with_capacity(traces.len());
        for (l, trace) in traces.iter().enumerate().rev() {
            let layer = &self.hidden[l];
            activation_backward(self.spec.layers[l].activation, &trace.out, &mut dh);
            let (dz, norm_grad, stat) = match (&layer.norm, &trace.norm) {
                (Some(bn), Some(nt)) => {
                    let du = dh;
                    let dscale = (&du * &nt.xhat).sum_axis(Axis(0));
                    let dshift = du.sum_axis(Axis(0));
                    let dxhat = du * &bn.scale;
                    let sum_dxhat = dxhat.sum_axis(Axis(0));
                    let sum_dxhat_xhat = (&dxhat * &nt.xhat).sum_axis(Axis(0));
                    let mut dz = dxhat * n;
                    dz -= &sum_dxhat;
                    dz -= &(&nt.xhat * &sum_dxhat_xhat);
                    dz *= &(&nt.inv_std / n);
                    let stat = BatchStats {
                        mean: nt.mean.clone(),
                        var: nt.var.clone(),
                    };
                    (dz, Some((dscale, dshift)), Some(stat))
                }
                _ => (dh, None, None),
            };
            let weight = standard(dz.t().dot(&trace.input));
            let bias = dz.sum_axis(Axis(0));
            dh = if l > 0 {
                let dinput = dz.dot(&layer.dense.weight);
                if self.spec.skip_input_at == Some(l) {
                    let prev = self.spec.layers[l - 1].width;
                    dinput.slice(s![.., ..prev]).to_owned()
                } else {
                    dinput
                }
            } else {
                Array2::zeros((0, 0))
            };
            hidden.push(LayerGradient {
                weight,
                bias,
                norm: norm_grad,
            });
            stats.push(stat);
        }
        hidden.reverse();
        stats.reverse();
        Ok(TrainPass {
            loss,
            gradients: Gradients {
                hidden,
                output_weight,
                output_bias,
            },
            stats,
        })
    }
}

/// Mean binary cross-entropy over the batch and its gradient with respect
/// to every trainable parameter (normalized layers use batch statistics).
pub fn gradient<T: Real>(
    params: &NetworkParams<T>,
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
) -> Result<(T, Gradients<T>)> {
    let pass = params.train_pass(x, y)?;
    Ok((pass.loss, pass.gradients))
}

/// Mean BCE of the training-mode forward pass (no gradients).
pub fn batch_loss<T: Real>(
    params: &NetworkParams<T>,
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
) -> Result<T> {
    params.check_width(x.ncols())?;
    if x.nrows() != y.len() {
        return Err(Error::dims(x.nrows(), y.len()));
    }
    let n = T::from_usize(x.nrows()).unwrap();
    let (_, logits, _) = params.train_forward(x);
    Ok(Zip::from(&logits)
        .and(y)
        .fold(T::zero(), |acc, &z, &t| acc + bce_with_logit(z, t))
        / n)
}
