//! Accuracy metrics, encoding sweeps, configuration-space slices, loss
//! curve export and latency benchmarks.

mod bench;
mod curves;
mod slice;
mod sweep;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::FeatureClassifier;
use crate::dataset::{Dataset, Split};
use crate::encoding::{encode, encode_batch, encoded_length, EncodingLevel};
use crate::error::{Error, Result};
use crate::nn::Model;
use crate::robot::RobotModel;

pub use bench::{bench_latency, uniform_queries, BenchConfig, LatencyMethod, MethodTiming, TimingReport, WARMUP_QUERIES};
pub use curves::{export_loss_curves, loss_curve_table, CurvePoint};
pub use slice::{slice_raster, Category, SliceRaster, SliceRequest, DEFAULT_RESOLUTION};
pub use sweep::{baseline_accuracy, sweep_levels, BaselineKind, SweepResult, SweepRow};

/// Anything that labels raw (unencoded) configurations as colliding.
pub trait Classifier: Sync {
    /// Raw input width.
    fn input_dim(&self) -> usize;

    fn classify(&self, raw: &[f64]) -> Result<bool>;

    /// Row-parallel; results are independent of the thread count.
    fn classify_batch(&self, raw: ArrayView2<'_, f64>) -> Result<Vec<bool>> {
        if raw.ncols() != self.input_dim() {
            return Err(Error::dims(self.input_dim(), raw.ncols()));
        }
        let raw = raw.as_standard_layout();
        (0..raw.nrows())
            .into_par_iter()
            .map(|i| self.classify(raw.row(i).as_slice().expect("standard layout")))
            .collect()
    }
}

impl Classifier for RobotModel {
    fn input_dim(&self) -> usize {
        self.dof()
    }

    fn classify(&self, raw: &[f64]) -> Result<bool> {
        self.self_collision(raw)
    }
}

/// Predicts a collision when the output probability is at least 0.5, i.e.
/// when the logit is non-negative.
impl Classifier for Model {
    fn input_dim(&self) -> usize {
        self.raw_dim
    }

    fn classify(&self, raw: &[f64]) -> Result<bool> {
        let batch = ArrayView2::from_shape((1, raw.len()), raw).expect("contiguous row");
        Ok(self.classify_batch(batch)?[0])
    }

    fn classify_batch(&self, raw: ArrayView2<'_, f64>) -> Result<Vec<bool>> {
        if raw.ncols() != self.raw_dim {
            return Err(Error::dims(self.raw_dim, raw.ncols()));
        }
        let x = encode_batch::<f32>(raw, self.level);
        Ok(self.params.logits(x.view())?.iter().map(|&z| z >= 0.0).collect())
    }
}

/// A feature-space model applied to encoded raw inputs.
#[derive(Debug, Clone)]
pub struct Encoded<M> {
    pub level: EncodingLevel,
    pub raw_dim: usize,
    pub model: M,
}

impl<M: FeatureClassifier> Encoded<M> {
    pub fn new(level: EncodingLevel, raw_dim: usize, model: M) -> Result<Self> {
        let expected = encoded_length(raw_dim, level);
        if model.feature_dim() != expected {
            return Err(Error::dims(expected, model.feature_dim()));
        }
        Ok(Self { level, raw_dim, model })
    }
}

impl<M: FeatureClassifier> Classifier for Encoded<M> {
    fn input_dim(&self) -> usize {
        self.raw_dim
    }

    fn classify(&self, raw: &[f64]) -> Result<bool> {
        if raw.len() != self.raw_dim {
            return Err(Error::dims(self.raw_dim, raw.len()));
        }
        Ok(self.model.predict_features(encode(raw, self.level).as_slice())? == 1)
    }
}

/// A closure of the given raw width.
pub struct FnClassifier<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> bool + Sync> Classifier for FnClassifier<F> {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn classify(&self, raw: &[f64]) -> Result<bool> {
        if raw.len() != self.dim {
            return Err(Error::dims(self.dim, raw.len()));
        }
        Ok((self.f)(raw))
    }
}

/// Confusion counts, positive meaning "collision".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Metrics {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Metrics {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// `(tp + tn) / total`.
    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
        }
    }
}

/// Confusion counts of `predictor` on rows `x` with 0/1 labels `y`.
pub fn evaluate(predictor: &dyn Classifier, x: ArrayView2<'_, f64>, y: &[u8]) -> Result<Metrics> {
    if x.nrows() != y.len() {
        return Err(Error::dims(x.nrows(), y.len()));
    }
    let predicted = predictor.classify_batch(x)?;
    let mut m = Metrics::default();
    for (&p, &t) in predicted.iter().zip(y) {
        m.record(p, t == 1);
    }
    Ok(m)
}

pub fn evaluate_split(predictor: &dyn Classifier, ds: &Dataset, split: Split) -> Result<Metrics> {
    let (x, y): (Array2<f64>, Vec<u8>) = ds.split(split);
    if y.is_empty() {
        return Err(Error::EmptyDataset);
    }
    evaluate(predictor, x.view(), &y)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::dataset::{disc_region_contains, sample_2d_dataset};

    #[test]
    fn oracle_is_perfect() {
        let ds = sample_2d_dataset(400, 1).unwrap();
        let oracle = FnClassifier {
            dim: 2,
            f: disc_region_contains,
        };
        let m = evaluate_split(&oracle, &ds, Split::Test).unwrap();
        assert_eq!(m.accuracy(), 1.0);
        assert_eq!((m.fp, m.fn_), (0, 0));
        assert_eq!(m.total(), ds.split(Split::Test).1.len());
    }

    #[test]
    fn constant_predictor_scores_half_on_balanced_split() {
        let ds = sample_2d_dataset(400, 2).unwrap();
        let never = FnClassifier { dim: 2, f: |_: &[f64]| false };
        assert_eq!(evaluate_split(&never, &ds, Split::Train).unwrap().accuracy(), 0.5);
    }

    #[test]
    fn counts_match_a_hand_tally() {
        let ds = sample_2d_dataset(300, 3).unwrap();
        let coin = FnClassifier {
            dim: 2,
            f: |p: &[f64]| (p[0].to_bits() ^ p[1].to_bits()) % 3 == 0,
        };
        let (x, y) = ds.split(Split::Train);
        let m = evaluate(&coin, x.view(), &y).unwrap();
        let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
        for (row, &t) in x.rows().into_iter().zip(&y) {
            let p = (row[0].to_bits() ^ row[1].to_bits()) % 3 == 0;
            match (p, t) {
                (true, 1) => tp += 1,
                (false, 0) => tn += 1,
                (true, 0) => fp += 1,
                _ => fn_ += 1,
            }
        }
        assert_eq!(m, Metrics { tp, tn, fp, fn_ });
        assert_eq!(m.accuracy(), (tp + tn) as f64 / y.len() as f64);
    }

    #[test]
    fn model_threshold_agrees_with_network_accuracy() {
        let model = Model::untrained("MLP2D", EncodingLevel::new(3).unwrap(), 2, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = Array2::from_shape_fn((500, 2), |_| rng.random_range(0.0..1.0));
        let y: Vec<u8> = x.rows().into_iter().map(|r| disc_region_contains(r.as_slice().unwrap()) as u8).collect();
        let m = evaluate(&model, x.view(), &y).unwrap();
        let enc = encode_batch::<f32>(x.view(), model.level);
        let yf = ndarray::Array1::from_iter(y.iter().map(|&v| v as f32));
        let acc = crate::nn::accuracy(&model.params, enc.view(), yf.view()).unwrap();
        assert_eq!(m.accuracy(), acc);
        assert_eq!(model.classify(&[0.5, 0.5]).unwrap(), model.classify_batch(ndarray::array![[0.5, 0.5]].view()).unwrap()[0]);
    }

    #[test]
    fn width_mismatch() {
        let model = Model::untrained("MLP3", EncodingLevel::new(3).unwrap(), 6, 0).unwrap();
        let x = Array2::<f64>::zeros((2, 42));
        assert!(matches!(evaluate(&model, x.view(), &[0, 1]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }
}
