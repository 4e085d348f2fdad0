//! Mini-batch Adam on mean binary cross-entropy.

use ndarray::{ArrayView1, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::net::BatchStats;
use super::params::{init_params, NetworkParams};
use super::spec::NetworkSpec;
use super::Real;
use crate::error::{Error, Result};

/// Weight of the old value in the running batch-norm statistics.
pub const BN_MOMENTUM: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Seeds both the initial weights and the per-epoch shuffle.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 256,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive and finite");
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return bad("Adam epsilon must be positive");
        }
        Ok(())
    }
}

/// Features and 0/1 labels, already encoded to the network's input width.
#[derive(Debug, Clone, Copy)]
pub struct TrainData<'a, T> {
    pub x: ArrayView2<'a, T>,
    pub y: ArrayView1<'a, T>,
    pub validation: Option<(ArrayView2<'a, T>, ArrayView1<'a, T>)>,
}

/// One entry per epoch. `validation_accuracy` is empty without validation data.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossCurve {
    pub train_loss: Vec<f64>,
    pub validation_accuracy: Vec<f64>,
}

/// Adam state for one parameter set.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    t: i32,
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl<T: Real> Adam<T> {
    pub fn new(params: &NetworkParams<T>, cfg: &TrainConfig) -> Self {
        let zeros: Vec<Vec<T>> = params
            .trainable()
            .iter()
            .map(|t| vec![T::zero(); t.len()])
            .collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            t: 0,
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            epsilon: cfg.epsilon,
        }
    }

    /// `grads` in [`NetworkParams::trainable`] order.
    pub fn step(&mut self, params: &mut NetworkParams<T>, grads: &[&[T]]) {
        self.t += 1;
        let c = |v: f64| T::from_f64(v).unwrap();
        let (b1, b2) = (c(self.beta1), c(self.beta2));
        let step = self.lr * (1.0 - self.beta2.powi(self.t)).sqrt() / (1.0 - self.beta1.powi(self.t));
        let (step, eps) = (c(step), c(self.epsilon));
        for (((p, g), m), v) in params
            .trainable_mut()
            .into_iter()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + (T::one() - b1) * gi;
                v[i] = b2 * v[i] + (T::one() - b2) * gi * gi;
                p[i] = p[i] - step * m[i] / (v[i].sqrt() + eps);
            }
        }
    }
}

fn update_running_stats<T: Real>(params: &mut NetworkParams<T>, stats: &[Option<BatchStats<T>>]) {
    let mom = T::from_f64(BN_MOMENTUM).unwrap();
    for (layer, stat) in params.hidden.iter_mut().zip(stats) {
        if let (Some(bn), Some(s)) = (&mut layer.norm, stat) {
            Zip::from(&mut bn.running_mean)
                .and(&s.mean)
                .for_each(|r, &b| *r = mom * *r + (T::one() - mom) * b);
            Zip::from(&mut bn.running_var)
                .and(&s.var)
                .for_each(|r, &b| *r = mom * *r + (T::one() - mom) * b);
        }
    }
}

/// Fraction of rows whose inference-mode probability lands on the label's
/// side of 0.5.
pub fn accuracy<T: Real>(params: &NetworkParams<T>, x: ArrayView2<'_, T>, y: ArrayView1<'_, T>) -> Result<f64> {
    if x.nrows() != y.len() {
        return Err(Error::dims(x.nrows(), y.len()));
    }
    if y.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let logits = params.logits(x)?;
    let half = T::from_f64(0.5).unwrap();
    let hits = Zip::from(&logits)
        .and(y)
        .fold(0usize, |acc, &z, &t| acc + usize::from((z >= T::zero()) == (t >= half)));
    Ok(hits as f64 / y.len() as f64)
}

pub fn train<T: Real>(spec: &NetworkSpec, data: TrainData<'_, T>, cfg: &TrainConfig) -> Result<(NetworkParams<T>, LossCurve)> {
    train_with_progress(spec, data, cfg, |_, _| {})
}

/// [`train`] with a callback after every epoch receiving the epoch index
/// and the curve so far.
pub fn train_with_progress<T: Real>(
    spec: &NetworkSpec,
    data: TrainData<'_, T>,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, &LossCurve),
) -> Result<(NetworkParams<T>, LossCurve)> {
    cfg.validate()?;
    spec.validate()?;
    let n = data.x.nrows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if data.x.ncols() != spec.input_dim {
        return Err(Error::dims(spec.input_dim, data.x.ncols()));
    }
    if data.y.len() != n {
        return Err(Error::dims(n, data.y.len()));
    }
    if let Some((vx, vy)) = data.validation {
        if vx.ncols() != spec.input_dim {
            return Err(Error::dims(spec.input_dim, vx.ncols()));
        }
        if vy.len() != vx.nrows() {
            return Err(Error::dims(vx.nrows(), vy.len()));
        }
    }
    if data.y.iter().any(|&v| v != T::zero() && v != T::one()) {
        return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
    }

    let mut params = init_params::<T>(spec, cfg.seed);
    let mut adam = Adam::new(&params, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5348_5546_464c_4521);
    let mut order: Vec<usize> = (0..n).collect();
    let mut curve = LossCurve::default();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let xb = data.x.select(Axis(0), chunk);
            let yb = data.y.select(Axis(0), chunk);
            let pass = params.train_pass(xb.view(), yb.view())?;
            let loss = pass.loss.to_f64().unwrap();
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            total += loss * chunk.len() as f64;
            adam.step(&mut params, &pass.gradients.tensors());
            update_running_stats(&mut params, &pass.stats);
        }
        if !params.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        curve.train_loss.push(total / n as f64);
        if let Some((vx, vy)) = data.validation {
            if !vy.is_empty() {
                curve.validation_accuracy.push(accuracy(&params, vx, vy)?);
            }
        }
        on_epoch(epoch, &curve);
    }
    Ok((params, curve))
}
