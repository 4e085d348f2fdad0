//! Classical classifiers used as non-neural reference points: exhaustive
//! k-nearest neighbours, Gaussian naive Bayes, and Fisher's linear
//! discriminant. All take feature rows (raw or encoded) and 0/1 labels.

mod gnb;
mod knn;
mod lda;

use ndarray::ArrayView2;

pub use gnb::{GnbModel, VARIANCE_FLOOR};
pub use knn::{KnnModel, DEFAULT_K};
pub use lda::{LdaModel, RIDGE};

use crate::error::{Error, Result};

/// A fitted model that labels feature rows of a fixed width.
pub trait FeatureClassifier: Sync {
    fn feature_dim(&self) -> usize;
    fn predict_features(&self, x: &[f64]) -> Result<u8>;
}

impl FeatureClassifier for KnnModel {
    fn feature_dim(&self) -> usize {
        self.dim()
    }

    fn predict_features(&self, x: &[f64]) -> Result<u8> {
        self.predict(x)
    }
}

impl FeatureClassifier for GnbModel {
    fn feature_dim(&self) -> usize {
        self.means(0).len()
    }

    fn predict_features(&self, x: &[f64]) -> Result<u8> {
        self.predict(x)
    }
}

impl FeatureClassifier for LdaModel {
    fn feature_dim(&self) -> usize {
        self.projection().len()
    }

    fn predict_features(&self, x: &[f64]) -> Result<u8> {
        self.predict(x)
    }
}

/// Shared fit preconditions; returns the per-class counts.
fn check_training(x: ArrayView2<'_, f64>, y: &[u8]) -> Result<[usize; 2]> {
    if x.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if x.nrows() != y.len() {
        return Err(Error::dims(x.nrows(), y.len()));
    }
    let mut counts = [0usize; 2];
    for &label in y {
        match label {
            0 | 1 => counts[label as usize] += 1,
            other => return Err(Error::InvalidArgument(format!("label {other} is not 0 or 1"))),
        }
    }
    Ok(counts)
}

fn check_query(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::dims(expected, x.len()));
    }
    Ok(())
}
