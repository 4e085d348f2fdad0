//! Balanced, split datasets of labelled configurations.
//!
//! Rows are stored split by split (train, test, val); inside a split they
//! keep the order in which they were drawn. Every split holds exactly as
//! many collision-free as colliding rows.

mod gap;
mod io;

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{encode_batch, EncodingLevel};
use crate::error::{Error, Result};
use crate::robot::RobotModel;

pub use gap::{train_gap_study, GapRow, GapStudy};
pub use io::{load_dataset, parse_csv, parse_sidecar, save_dataset, sidecar_path, to_csv_string, CsvRows};

/// Draws labelled per parallel batch.
const CHUNK: usize = 4096;
/// Draw count after which a class below [`STARVATION_FRACTION`] aborts sampling.
pub const STARVATION_DRAWS: usize = 1_000_000;
pub const STARVATION_FRACTION: f64 = 0.01;

/// Train, test and val shares in tenths.
const SPLIT_TENTHS: [usize; 3] = [7, 2, 1];

/// Discs `(cx, cy, r)` whose union is the colliding region of the 2D task.
pub const DISCS: [(f64, f64, f64); 6] = [
    (0.25, 0.25, 0.12),
    (0.75, 0.25, 0.08),
    (0.5, 0.5, 0.15),
    (0.2, 0.8, 0.1),
    (0.8, 0.75, 0.07),
    (0.6, 0.15, 0.05),
];

/// Closed-disc membership in the 2D ground-truth region.
pub fn disc_region_contains(p: &[f64]) -> bool {
    DISCS
        .iter()
        .any(|&(cx, cy, r)| (p[0] - cx).powi(2) + (p[1] - cy).powi(2) <= r * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    Val,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Test, Split::Val];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Val => "val",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Robot,
    Synthetic2d,
}

/// Per split `[collision-free, colliding]` row counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitCounts {
    pub train: [usize; 2],
    pub test: [usize; 2],
    pub val: [usize; 2],
}

impl SplitCounts {
    pub fn get(&self, split: Split) -> [usize; 2] {
        match split {
            Split::Train => self.train,
            Split::Test => self.test,
            Split::Val => self.val,
        }
    }

    fn get_mut(&mut self, split: Split) -> &mut [usize; 2] {
        match split {
            Split::Train => &mut self.train,
            Split::Test => &mut self.test,
            Split::Val => &mut self.val,
        }
    }

    pub fn total(&self) -> usize {
        Split::ALL.iter().map(|&s| self.get(s).iter().sum::<usize>()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub d: usize,
    pub source: Source,
    pub seed: u64,
    /// Content hash of the labelling robot; `None` for synthetic data.
    pub robot_hash: Option<String>,
    pub counts: SplitCounts,
    /// Class counts over every draw, including those discarded by balancing.
    pub drawn: [usize; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<u8>,
    splits: Vec<Split>,
    meta: DatasetMeta,
}

/// Per-class row counts for train, test and val: the 70:20:10 quotas of
/// `n_per_class` apportioned by largest remainder (ties favour the earlier
/// split), so each count is the floor or ceiling of its quota.
pub fn split_counts(n_per_class: usize) -> [usize; 3] {
    let mut counts = SPLIT_TENTHS.map(|t| t * n_per_class / 10);
    let remainders = SPLIT_TENTHS.map(|t| t * n_per_class % 10);
    let mut order = [0usize, 1, 2];
    order.sort_by_key(|&i| std::cmp::Reverse(remainders[i]));
    let missing = n_per_class - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

impl Dataset {
    /// Checks shapes, labels, finiteness and per-split balance against
    /// `meta`.
    pub fn new(features: Array2<f64>, labels: Vec<u8>, splits: Vec<Split>, meta: DatasetMeta) -> Result<Self> {
        let n = features.nrows();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if labels.len() != n {
            return Err(Error::dims(n, labels.len()));
        }
        if splits.len() != n {
            return Err(Error::dims(n, splits.len()));
        }
        if features.ncols() != meta.d {
            return Err(Error::dims(meta.d, features.ncols()));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite feature".into()));
        }
        let mut counts = SplitCounts::default();
        for (&l, &s) in labels.iter().zip(&splits) {
            if l > 1 {
                return Err(Error::InvalidArgument(format!("label {l} is not 0 or 1")));
            }
            counts.get_mut(s)[l as usize] += 1;
        }
        if counts != meta.counts {
            return Err(Error::InvalidArgument(format!(
                "split counts {counts:?} disagree with metadata {:?}",
                meta.counts
            )));
        }
        Ok(Self {
            features: features.as_standard_layout().into_owned(),
            labels,
            splits,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn d(&self) -> usize {
        self.meta.d
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn indices(&self, split: Split) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.splits[i] == split).collect()
    }

    /// Raw features and labels of one split.
    pub fn split(&self, split: Split) -> (Array2<f64>, Vec<u8>) {
        let idx = self.indices(split);
        let x = self.features.select(Axis(0), &idx);
        let y = idx.iter().map(|&i| self.labels[i]).collect();
        (x, y)
    }

    /// Encoded features and `0.0`/`1.0` labels of one split, ready for
    /// network training.
    pub fn encoded<T: crate::nn::Real>(&self, split: Split, level: EncodingLevel) -> (Array2<T>, Array1<T>) {
        let (x, y) = self.split(split);
        let y = y.iter().map(|&l| if l == 1 { T::one() } else { T::zero() }).collect();
        (encode_batch(x.view(), level), y)
    }

    /// Number of stored labels that differ from `oracle`.
    pub fn label_mismatches(&self, oracle: impl Fn(&[f64]) -> Result<bool> + Sync) -> Result<usize> {
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let got = oracle(self.features.row(i).as_slice().expect("standard layout"))?;
                Ok(usize::from(got != (self.labels[i] == 1)))
            })
            .sum::<Result<usize>>()
    }
}

/// Draws uniform points in `[low, high]^d` until both classes have
/// `n_per_class` members, then splits and interleaves them.
fn sample_balanced(
    d: usize,
    n_per_class: usize,
    seed: u64,
    uniform: Uniform<f64>,
    label: impl Fn(&[f64]) -> Result<bool> + Sync,
) -> Result<(Array2<f64>, Vec<u8>, Vec<Split>, [usize; 2])> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Accepted rows per class as (draw index, coordinates).
    let mut pools: [Vec<(usize, Vec<f64>)>; 2] = [Vec::new(), Vec::new()];
    let mut drawn = [0usize; 2];
    let mut draws = 0usize;
    let full = |p: &[Vec<(usize, Vec<f64>)>; 2]| p.iter().all(|c| c.len() >= n_per_class);
    while !full(&pools) {
        let chunk: Vec<f64> = (0..CHUNK * d).map(|_| uniform.sample(&mut rng)).collect();
        let labels: Vec<bool> = chunk.par_chunks(d).map(&label).collect::<Result<_>>()?;
        for (q, l) in chunk.chunks(d).zip(labels) {
            let c = usize::from(l);
            drawn[c] += 1;
            if pools[c].len() < n_per_class {
                pools[c].push((draws, q.to_vec()));
            }
            draws += 1;
            if full(&pools) {
                break;
            }
        }
        if draws >= STARVATION_DRAWS && !full(&pools) {
            for class in 0..2 {
                if (drawn[class] as f64) < STARVATION_FRACTION * draws as f64 {
                    return Err(Error::ClassStarvation {
                        class: class as u8,
                        found: drawn[class],
                        draws,
                    });
                }
            }
        }
    }

    let per_split = split_counts(n_per_class);
    let mut features = Vec::with_capacity(2 * n_per_class * d);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    let mut splits = Vec::with_capacity(2 * n_per_class);
    let mut start = 0;
    for (s, &count) in Split::ALL.iter().zip(&per_split) {
        let mut rows: Vec<(usize, u8, &[f64])> = (0..2)
            .flat_map(|c| pools[c][start..start + count].iter().map(move |(i, q)| (*i, c as u8, q.as_slice())))
            .collect();
        rows.sort_unstable_by_key(|r| r.0);
        for (_, c, q) in rows {
            features.extend_from_slice(q);
            labels.push(c);
            splits.push(*s);
        }
        start += count;
    }
    let features = Array2::from_shape_vec((labels.len(), d), features).expect("row-major buffer");
    Ok((features, labels, splits, drawn))
}

fn counts_of(labels: &[u8], splits: &[Split]) -> SplitCounts {
    let mut counts = SplitCounts::default();
    for (&l, &s) in labels.iter().zip(splits) {
        counts.get_mut(s)[l as usize] += 1;
    }
    counts
}

/// Uniform configurations in `[−π, π]^dof` labelled by the robot's
/// self-collision check. Deterministic in `seed` for any thread count.
pub fn sample_robot_dataset(robot: &RobotModel, n_per_class: usize, seed: u64) -> Result<Dataset> {
    if n_per_class < 10 {
        return Err(Error::InvalidArgument("n_per_class must be at least 10".into()));
    }
    let d = robot.dof();
    let uniform = Uniform::new_inclusive(-PI, PI).expect("finite bounds");
    let (features, labels, splits, drawn) = sample_balanced(d, n_per_class, seed, uniform, |q| robot.self_collision(q))?;
    let meta = DatasetMeta {
        d,
        source: Source::Robot,
        seed,
        robot_hash: Some(robot.content_hash()),
        counts: counts_of(&labels, &splits),
        drawn,
    };
    Dataset::new(features, labels, splits, meta)
}

/// `n` uniform points of `[0, 1)²` (half per class) labelled by
/// [`disc_region_contains`].
pub fn sample_2d_dataset(n: usize, seed: u64) -> Result<Dataset> {
    if n < 100 {
        return Err(Error::InvalidArgument("2D datasets need at least 100 samples".into()));
    }
    let uniform = Uniform::new(0.0, 1.0).expect("finite bounds");
    let (features, labels, splits, drawn) =
        sample_balanced(2, n / 2, seed, uniform, |p| Ok(disc_region_contains(p)))?;
    let meta = DatasetMeta {
        d: 2,
        source: Source::Synthetic2d,
        seed,
        robot_hash: None,
        counts: counts_of(&labels, &splits),
        drawn,
    };
    Dataset::new(features, labels, splits, meta)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::robot::desk_arm;

    #[test]
    fn five_hundred_per_class() {
        let ds = sample_2d_dataset(1000, 3).unwrap();
        assert_eq!(ds.len(), 1000);
        let c = ds.meta().counts;
        assert_eq!(c.train, [350, 350]);
        assert_eq!(c.test, [100, 100]);
        assert_eq!(c.val, [50, 50]);
    }

    #[test]
    fn split_counts_round_each_quota() {
        for n in 10..20_000 {
            let c = split_counts(n);
            assert_eq!(c.iter().sum::<usize>(), n);
            for (k, &t) in SPLIT_TENTHS.iter().enumerate() {
                let quota = (t * n) as f64 / 10.0;
                assert!((c[k] as f64 - quota).abs() < 1.0, "n={n} split {k}");
            }
            if n % 5 == 0 {
                for (k, &t) in SPLIT_TENTHS.iter().enumerate() {
                    // Rows per split are twice the per-class count.
                    let quota = (2 * t * n) as f64 / 10.0;
                    assert!((2.0 * c[k] as f64 - quota).abs() <= 1.0);
                }
            }
        }
    }

    #[test]
    fn disc_membership() {
        assert!(disc_region_contains(&[0.5, 0.5]));
        assert!(!disc_region_contains(&[0.0, 1.0]));
        assert!(disc_region_contains(&[0.6, 0.15]));
        assert!(!disc_region_contains(&[0.5, 0.66]));
    }

    #[test]
    fn colliding_fraction_matches_disc_area() {
        let ds = sample_2d_dataset(100_000, 1).unwrap();
        let [free, hit] = ds.meta().drawn;
        let frac = hit as f64 / (free + hit) as f64;
        let area: f64 = DISCS.iter().map(|&(_, _, r)| PI * r * r).sum();
        assert!((area - 0.192).abs() < 0.01);
        assert!((frac - area).abs() < 0.01, "{frac} vs {area}");
    }

    #[test]
    fn robot_labels_replay_and_rows_are_unique() {
        let arm = desk_arm();
        let ds = sample_robot_dataset(&arm, 200, 7).unwrap();
        assert_eq!(ds.label_mismatches(|q| arm.self_collision(q)).unwrap(), 0);
        let rows: HashSet<Vec<u64>> = ds
            .features()
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|v| v.to_bits()).collect())
            .collect();
        assert_eq!(rows.len(), ds.len());
        assert!(ds.features().iter().all(|v| v.abs() <= PI));
        assert_eq!(ds.meta().robot_hash.as_deref(), Some(arm.content_hash().as_str()));
    }

    #[test]
    fn same_seed_same_data_for_any_thread_count() {
        let arm = desk_arm();
        let a = sample_robot_dataset(&arm, 50, 11).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| sample_robot_dataset(&arm, 50, 11).unwrap());
        assert_eq!(a, b);
        let c = sample_robot_dataset(&arm, 50, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn starved_class_is_reported() {
        let uniform = Uniform::new(0.0, 1.0).unwrap();
        let err = sample_balanced(2, 10, 0, uniform, |p| Ok(p[0] < 1e-9)).unwrap_err();
        assert!(matches!(err, Error::ClassStarvation { class: 1, .. }));
    }

    #[test]
    fn splits_are_balanced_and_ordered() {
        let ds = sample_2d_dataset(246, 5).unwrap();
        for s in Split::ALL {
            let (_, y) = ds.split(s);
            let ones = y.iter().filter(|&&l| l == 1).count();
            assert_eq!(2 * ones, y.len());
        }
        let order: Vec<Split> = ds.splits().to_vec();
        let mut sorted = order.clone();
        sorted.sort_by_key(|s| Split::ALL.iter().position(|a| a == s));
        assert_eq!(order, sorted);
    }
}
