use std::f64::consts::PI;

use ndarray::{Array1, ArrayView2, Axis};

use super::{check_query, check_training};
use crate::error::{Error, Result};

/// Lower bound applied to every per-class feature variance.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes with per-class diagonal variances.
#[derive(Debug, Clone, PartialEq)]
pub struct GnbModel {
    means: [Array1<f64>; 2],
    variances: [Array1<f64>; 2],
    priors: [f64; 2],
}

impl GnbModel {
    pub fn fit(x: ArrayView2<'_, f64>, y: &[u8]) -> Result<Self> {
        let counts = check_training(x, y)?;
        if counts.contains(&0) {
            return Err(Error::SingleClassData);
        }
        let stats = |class: u8| {
            let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
            let sub = x.select(Axis(0), &rows);
            let mean = sub.mean_axis(Axis(0)).expect("class is non-empty");
            let var = (&sub - &mean)
                .mapv(|v| v * v)
                .mean_axis(Axis(0))
                .unwrap()
                .mapv(|v| v.max(VARIANCE_FLOOR));
            (mean, var)
        };
        let (m0, v0) = stats(0);
        let (m1, v1) = stats(1);
        let n = y.len() as f64;
        let p1 = counts[1] as f64 / n;
        Ok(Self {
            means: [m0, m1],
            variances: [v0, v1],
            priors: [1.0 - p1, p1],
        })
    }

    pub fn priors(&self) -> [f64; 2] {
        self.priors
    }

    pub fn variances(&self, class: u8) -> &Array1<f64> {
        &self.variances[class as usize]
    }

    pub fn means(&self, class: u8) -> &Array1<f64> {
        &self.means[class as usize]
    }

    /// `ln P(c) + Σ ln N(xᵢ; μᵢ, σᵢ²)` for both classes.
    pub fn log_scores(&self, x: &[f64]) -> Result<[f64; 2]> {
        check_query(self.means[0].len(), x)?;
        let score = |c: usize| {
            let mut s = self.priors[c].ln();
            for ((&xi, &m), &v) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                s -= 0.5 * ((2.0 * PI * v).ln() + (xi - m) * (xi - m) / v);
            }
            s
        };
        Ok([score(0), score(1)])
    }

    /// Class with the larger log score (class 0 on equality).
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        let [s0, s1] = self.log_scores(x)?;
        Ok(u8::from(s1 > s0))
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
    use ndarray::{array, Array2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    use super::*;

    #[test]
    fn symmetric_gaussians_split_at_midpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let n = 20_000;
        let y: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let x = Array2::from_shape_fn((n, 1), |(i, _)| {
            let mu = if y[i] == 1 { 3.0 } else { -1.0 };
            mu + noise.sample(&mut rng)
        });
        let m = GnbModel::fit(x.view(), &y).unwrap();
        // The decision boundary sits where the two scores cross; bisect.
        let (mut lo, mut hi) = (-1.0, 3.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if m.predict(&[mid]).unwrap() == 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((lo - 1.0).abs() < 0.05, "boundary at {lo}");
    }

    #[test]
    fn constant_feature_hits_the_floor() {
        let x = array![[1.0, 0.0], [1.0, 1.0], [1.0, 5.0], [1.0, 6.0]];
        let y = [0, 0, 1, 1];
        let m = GnbModel::fit(x.view(), &y).unwrap();
        assert_eq!(m.variances(0)[0], VARIANCE_FLOOR);
        let s = m.log_scores(&[1.0, 3.0]).unwrap();
        assert!(s.iter().all(|v| v.is_finite()));
        assert!((m.priors()[0] + m.priors()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn class_means_classify_correctly() {
        let x = array![[0.0, 0.0], [0.2, 0.1], [4.0, 4.0], [4.1, 3.8], [0.1, -0.1], [3.9, 4.2]];
        let y = [0, 0, 1, 1, 0, 1];
        let m = GnbModel::fit(x.view(), &y).unwrap();
        for c in 0..2u8 {
            let mean = m.means(c).to_vec();
            assert_eq!(m.predict(&mean).unwrap(), c);
        }
    }

    #[test]
    fn single_class_rejected() {
        let x = array![[0.0], [1.0]];
        assert!(matches!(GnbModel::fit(x.view(), &[1, 1]), Err(Error::SingleClassData)));
    }
}
