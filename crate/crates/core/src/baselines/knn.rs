use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use super::{check_query, check_training};
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 5;

/// Exhaustive Euclidean k-nearest-neighbour vote.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    k: usize,
    points: Array2<f64>,
    labels: Vec<u8>,
}

impl KnnModel {
    /// Requires `1 ≤ k ≤ rows`.
    pub fn fit(x: ArrayView2<'_, f64>, y: &[u8], k: usize) -> Result<Self> {
        check_training(x, y)?;
        if k == 0 || k > x.nrows() {
            return Err(Error::InvalidArgument(format!(
                "k = {k} needs 1 ≤ k ≤ {} training points",
                x.nrows()
            )));
        }
        Ok(Self {
            k,
            points: x.as_standard_layout().into_owned(),
            labels: y.to_vec(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    /// Indices of the `k` nearest training points, nearest first; equal
    /// distances keep the lower index first.
    pub fn neighbours(&self, x: &[f64]) -> Result<Vec<usize>> {
        check_query(self.dim(), x)?;
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(self.k + 1);
        for (i, row) in self.points.rows().into_iter().enumerate() {
            let row = row.as_slice().expect("standard layout");
            let d: f64 = row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.len() == self.k && d >= best[self.k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, i));
            best.truncate(self.k);
        }
        Ok(best.into_iter().map(|(_, i)| i).collect())
    }

    /// Majority label of the neighbours; a tied vote takes the nearest
    /// neighbour's label.
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        let nn = self.neighbours(x)?;
        let ones = nn.iter().filter(|&&i| self.labels[i] == 1).count();
        let zeros = nn.len() - ones;
        Ok(match ones.cmp(&zeros) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => self.labels[nn[0]],
        })
    }

    /// Row-parallel [`KnnModel::predict`]; the result does not depend on
    /// the thread count.
    pub fn predict_batch(&self, x: ArrayView2<'_, f64>) -> Result<Vec<u8>> {
        if x.ncols() != self.dim() {
            return Err(Error::dims(self.dim(), x.ncols()));
        }
        let x = x.as_standard_layout();
        (0..x.nrows())
            .into_par_iter()
            .map(|i| self.predict(x.row(i).as_slice().expect("standard layout")))
            .collect()
    }
}
