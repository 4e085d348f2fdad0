use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, ArrayView2, Axis};

use super::{check_query, check_training};
use crate::error::{Error, Result};

/// Diagonal term added to the pooled covariance before solving.
pub const RIDGE: f64 = 1e-6;

/// Two-class Fisher discriminant: predicts 1 when `w·x > threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    projection: Array1<f64>,
    threshold: f64,
    priors: [f64; 2],
}

impl LdaModel {
    /// Needs at least two samples of each class.
    pub fn fit(x: ArrayView2<'_, f64>, y: &[u8]) -> Result<Self> {
        let counts = check_training(x, y)?;
        if counts.contains(&0) {
            return Err(Error::SingleClassData);
        }
        if counts.iter().any(|&c| c < 2) {
            return Err(Error::InvalidArgument("LDA needs at least two samples per class".into()));
        }
        let d = x.ncols();
        let class_rows = |c: u8| x.select(Axis(0), &(0..y.len()).filter(|&i| y[i] == c).collect::<Vec<_>>());
        let (x0, x1) = (class_rows(0), class_rows(1));
        let m0 = x0.mean_axis(Axis(0)).unwrap();
        let m1 = x1.mean_axis(Axis(0)).unwrap();
        let c0 = &x0 - &m0;
        let c1 = &x1 - &m1;
        let scatter = c0.t().dot(&c0) + c1.t().dot(&c1);
        let dof = (y.len() - 2) as f64;
        let mut cov = DMatrix::from_fn(d, d, |i, j| scatter[[i, j]] / dof);
        for i in 0..d {
            cov[(i, i)] += RIDGE;
        }
        let chol = cov.cholesky().ok_or(Error::SingularCovariance)?;
        let diff = DVector::from_iterator(d, m1.iter().zip(&m0).map(|(a, b)| a - b));
        let w = chol.solve(&diff);
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularCovariance);
        }
        let projection = Array1::from_iter(w.iter().copied());
        let n = y.len() as f64;
        let priors = [counts[0] as f64 / n, counts[1] as f64 / n];
        let mid = 0.5 * (projection.dot(&m0) + projection.dot(&m1));
        let threshold = mid - (priors[1] / priors[0]).ln();
        Ok(Self {
            projection,
            threshold,
            priors,
        })
    }

    pub fn projection(&self) -> &Array1<f64> {
        &self.projection
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn priors(&self) -> [f64; 2] {
        self.priors
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        check_query(self.projection.len(), x)?;
        let s: f64 = self.projection.iter().zip(x).map(|(w, v)| w * v).sum();
        Ok(u8::from(s > self.threshold))
    }

    pub fn predict_batch(&self, x: ArrayView2<'_, f64>) -> Result<Vec<u8>> {
        x.as_standard_layout()
            .outer_iter()
            .map(|r| self.predict(r.as_slice().expect("standard layout")))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    use super::*;
    use crate::encoding::{encode_batch, EncodingLevel};

    fn spherical(n: usize, mu1: [f64; 3], seed: u64) -> (Array2<f64>, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let y: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let x = Array2::from_shape_fn((n, 3), |(i, j)| {
            let mu = if y[i] == 1 { mu1[j] } else { 0.0 };
            mu + noise.sample(&mut rng)
        });
        (x, y)
    }

    #[test]
    fn projection_follows_mean_difference() {
        let mu1 = [2.0, -1.0, 0.5];
        let (x, y) = spherical(20_000, mu1, 1);
        let m = LdaModel::fit(x.view(), &y).unwrap();
        let w = m.projection();
        let dot: f64 = w.iter().zip(&mu1).map(|(a, b)| a * b).sum();
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let cos = dot / (norm(w.as_slice().unwrap()) * norm(&mu1));
        assert!(cos.acos().to_degrees() < 5.0);
    }

    #[test]
    fn balanced_threshold_is_the_projected_midpoint() {
        let (x, y) = spherical(400, [1.0, 1.0, 1.0], 2);
        let m = LdaModel::fit(x.view(), &y).unwrap();
        assert_eq!(m.priors(), [0.5, 0.5]);
        let mean = |c: u8| {
            let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
            x.select(Axis(0), &rows).mean_axis(Axis(0)).unwrap()
        };
        let w = m.projection();
        let mid = 0.5 * (w.dot(&mean(0)) + w.dot(&mean(1)));
        assert!((m.threshold() - mid).abs() < 1e-9);
    }

    #[test]
    fn collinear_encoded_columns_fit() {
        let (x, y) = spherical(200, [0.5, 0.5, 0.5], 3);
        let x = ndarray::concatenate![Axis(1), x, x];
        let enc: Array2<f64> = encode_batch(x.view(), EncodingLevel::new(2).unwrap());
        let m = LdaModel::fit(enc.view(), &y).unwrap();
        assert!(m.projection().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn preconditions() {
        let (x, _) = spherical(4, [1.0; 3], 1);
        assert!(matches!(LdaModel::fit(x.view(), &[0, 0, 0, 0]), Err(Error::SingleClassData)));
        assert!(LdaModel::fit(x.view(), &[0, 1, 1, 1]).is_err());
        let m = LdaModel::fit(x.view(), &[0, 1, 0, 1]).unwrap();
        assert!(matches!(m.predict(&[0.0]), Err(Error::DimensionMismatch { .. })));
    }
}
