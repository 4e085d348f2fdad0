use std::hint::black_box;
use std::time::Instant;

use ndarray::{s, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::mean_std;
use crate::encoding::encode_batch;
use crate::error::{Error, Result};
use crate::nn::{Mode, Model};
use crate::robot::RobotModel;

/// Queries run untimed before the first repetition.
pub const WARMUP_QUERIES: usize = 100;
const MIN_QUERIES: usize = 1000;
const MIN_REPETITIONS: usize = 5;

/// `n` configurations drawn uniformly from `[−π, π]^dof`, row by row.
pub fn uniform_queries(dof: usize, n: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = std::f64::consts::PI;
    Array2::from_shape_simple_fn((n, dof), || rng.random_range(-pi..=pi))
}

pub enum LatencyMethod<'a> {
    /// The geometric self-collision check.
    Oracle(&'a RobotModel),
    Network { name: String, model: &'a Model },
}

impl LatencyMethod<'_> {
    pub fn name(&self) -> &str {
        match self {
            LatencyMethod::Oracle(_) => "oracle",
            LatencyMethod::Network { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub repetitions: usize,
    /// Batch sizes timed in addition to single queries.
    pub batch_sizes: Vec<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            repetitions: 5,
            batch_sizes: vec![100],
        }
    }
}

/// Per-query latency of one method on one query subset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodTiming {
    pub method: String,
    /// `all`, or `colliding` / `free` for the oracle's label subsets.
    pub subset: String,
    /// 1 for single queries; otherwise latency is amortized per query.
    pub batch_size: usize,
    /// Over per-query latencies, each the median across repetitions.
    pub mean_ns: f64,
    pub std_ns: f64,
    pub median_ns: f64,
    /// Timed calls, all repetitions included.
    pub samples: usize,
}

impl MethodTiming {
    /// Coefficient of variation, `std / mean`.
    pub fn cov(&self) -> f64 {
        self.std_ns / self.mean_ns
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TimingReport {
    pub rows: Vec<MethodTiming>,
}

impl TimingReport {
    pub fn find(&self, method: &str, subset: &str, batch_size: usize) -> Option<&MethodTiming> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.subset == subset && r.batch_size == batch_size)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,subset,batch_size,mean_ns,std_ns,median_ns,samples\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.1},{:.1},{:.1},{}\n",
                r.method, r.subset, r.batch_size, r.mean_ns, r.std_ns, r.median_ns, r.samples
            ));
        }
        out
    }
}

/// Each query's latency is its median over repetitions, which discards
/// scheduler preemptions that would otherwise dominate the spread of
/// microsecond timings. Mean, std and median are taken over those values.
fn summarize(method: &str, subset: &str, batch_size: usize, per_rep: &[Vec<f64>]) -> MethodTiming {
    let per_query: Vec<f64> = (0..per_rep[0].len())
        .map(|i| median(per_rep.iter().map(|r| r[i]).collect()))
        .collect();
    let (mean_ns, std_ns) = mean_std(&per_query);
    MethodTiming {
        method: method.to_string(),
        subset: subset.to_string(),
        batch_size,
        mean_ns,
        std_ns,
        median_ns: median(per_query.clone()),
        samples: per_rep.iter().map(Vec::len).sum(),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Inputs prepared outside the timed region.
enum Prepared<'a> {
    Oracle(&'a RobotModel, Array2<f64>),
    Network(&'a Model, Array2<f32>),
}

impl Prepared<'_> {
    fn single(&self, i: usize) -> Result<bool> {
        match self {
            Prepared::Oracle(robot, q) => robot.self_collision(q.row(i).as_slice().unwrap()),
            Prepared::Network(model, x) => Ok(model.params.forward(x.row(i).as_slice().unwrap(), Mode::Infer)? >= 0.5),
        }
    }

    fn batch(&self, start: usize, end: usize) -> Result<usize> {
        match self {
            Prepared::Oracle(robot, q) => {
                let mut hits = 0;
                for i in start..end {
                    hits += usize::from(robot.self_collision(q.row(i).as_slice().unwrap())?);
                }
                Ok(hits)
            }
            Prepared::Network(model, x) => {
                let p = model.params.predict_batch(x.slice(s![start..end, ..]))?;
                Ok(p.iter().filter(|&&v| v >= 0.5).count())
            }
        }
    }
}

/// Times each method on the same queries: single calls per query, then
/// contiguous batches per configured size. Network inputs are encoded
/// before timing starts, so only inference is measured. Oracle single-query
/// timings are additionally reported for the colliding and free subsets.
pub fn bench_latency(methods: &[LatencyMethod<'_>], queries: ArrayView2<'_, f64>, cfg: &BenchConfig) -> Result<TimingReport> {
    let n = queries.nrows();
    if n < MIN_QUERIES {
        return Err(Error::InvalidArgument(format!("latency benchmarks need at least {MIN_QUERIES} queries")));
    }
    if cfg.repetitions < MIN_REPETITIONS {
        return Err(Error::InvalidArgument(format!("latency benchmarks need at least {MIN_REPETITIONS} repetitions")));
    }
    if cfg.batch_sizes.contains(&0) {
        return Err(Error::InvalidArgument("batch sizes must be positive".into()));
    }
    let queries = queries.as_standard_layout().into_owned();
    let mut report = TimingReport::default();
    for method in methods {
        let prepared = match method {
            LatencyMethod::Oracle(robot) => {
                if queries.ncols() != robot.dof() {
                    return Err(Error::dims(robot.dof(), queries.ncols()));
                }
                Prepared::Oracle(robot, queries.clone())
            }
            LatencyMethod::Network { model, .. } => {
                if queries.ncols() != model.raw_dim {
                    return Err(Error::dims(model.raw_dim, queries.ncols()));
                }
                Prepared::Network(model, encode_batch::<f32>(queries.view(), model.level))
            }
        };
        let name = method.name();

        for i in 0..WARMUP_QUERIES.min(n) {
            black_box(prepared.single(i)?);
        }
        let mut per_rep = Vec::with_capacity(cfg.repetitions);
        for _ in 0..cfg.repetitions {
            let mut times = Vec::with_capacity(n);
            for i in 0..n {
                let t0 = Instant::now();
                black_box(prepared.single(black_box(i))?);
                times.push(t0.elapsed().as_nanos() as f64);
            }
            per_rep.push(times);
        }
        report.rows.push(summarize(name, "all", 1, &per_rep));

        if let Prepared::Oracle(robot, q) = &prepared {
            let labels: Vec<bool> = (0..n)
                .map(|i| robot.self_collision(q.row(i).as_slice().unwrap()))
                .collect::<Result<_>>()?;
            for (subset, want) in [("colliding", true), ("free", false)] {
                let part: Vec<Vec<f64>> = per_rep
                    .iter()
                    .map(|r| r.iter().zip(&labels).filter(|(_, &l)| l == want).map(|(&t, _)| t).collect())
                    .collect();
                if part[0].is_empty() {
                    continue;
                }
                report.rows.push(summarize(name, subset, 1, &part));
            }
        }

        for &b in &cfg.batch_sizes {
            let mut per_rep = Vec::with_capacity(cfg.repetitions);
            for _ in 0..cfg.repetitions {
                let mut times = Vec::with_capacity(n / b + 1);
                for start in (0..n).step_by(b) {
                    let end = (start + b).min(n);
                    let t0 = Instant::now();
                    black_box(prepared.batch(black_box(start), end)?);
                    times.push(t0.elapsed().as_nanos() as f64 / (end - start) as f64);
                }
                per_rep.push(times);
            }
            report.rows.push(summarize(name, "all", b, &per_rep));
        }
    }
    Ok(report)
}
