use serde::Serialize;

use super::{Dataset, Split};
use crate::encoding::{encoded_length, EncodingLevel};
use crate::error::{Error, Result};
use crate::nn::{accuracy, preset_spec, train, TrainConfig, TrainData};

/// Train/test accuracy gap as a function of dataset size.
#[derive(Debug, Clone)]
pub struct GapStudy {
    pub preset: String,
    pub level: EncodingLevel,
    /// Total rows per dataset, ascending.
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub train: TrainConfig,
    /// Trial `t` samples with `seed + t` and trains with `train.seed + t`.
    pub seed: u64,
}

/// Means over the trials of one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub size: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub gap: f64,
}

/// `sample(size, seed)` supplies each trial's dataset.
pub fn train_gap_study(study: &GapStudy, sample: impl Fn(usize, u64) -> Result<Dataset>) -> Result<Vec<GapRow>> {
    if study.sizes.is_empty() || study.trials == 0 {
        return Err(Error::InvalidArgument("gap study needs sizes and at least one trial".into()));
    }
    if study.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("gap study sizes must be strictly ascending".into()));
    }
    let mut rows = Vec::with_capacity(study.sizes.len());
    for &size in &study.sizes {
        let (mut train_sum, mut test_sum) = (0.0, 0.0);
        for t in 0..study.trials as u64 {
            let ds = sample(size, study.seed.wrapping_add(t))?;
            let spec = preset_spec(&study.preset, encoded_length(ds.d(), study.level))?;
            let (xtr, ytr) = ds.encoded::<f32>(Split::Train, study.level);
            let (xte, yte) = ds.encoded::<f32>(Split::Test, study.level);
            let cfg = TrainConfig {
                seed: study.train.seed.wrapping_add(t),
                ..study.train.clone()
            };
            let data = TrainData {
                x: xtr.view(),
                y: ytr.view(),
                validation: None,
            };
            let (params, _) = train(&spec, data, &cfg)?;
            train_sum += accuracy(&params, xtr.view(), ytr.view())?;
            test_sum += accuracy(&params, xte.view(), yte.view())?;
        }
        let k = study.trials as f64;
        let (train_accuracy, test_accuracy) = (train_sum / k, test_sum / k);
        rows.push(GapRow {
            size,
            train_accuracy,
            test_accuracy,
            gap: train_accuracy - test_accuracy,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::sample_2d_dataset;

    fn study(sizes: Vec<usize>) -> GapStudy {
        GapStudy {
            preset: "MLP2D".into(),
            level: EncodingLevel::new(2).unwrap(),
            sizes,
            trials: 2,
            train: TrainConfig {
                epochs: 3,
                ..TrainConfig::default()
            },
            seed: 1,
        }
    }

    #[test]
    fn single_size_gives_single_row() {
        let rows = train_gap_study(&study(vec![400]), sample_2d_dataset).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].size, 400);
        assert!((rows[0].gap - (rows[0].train_accuracy - rows[0].test_accuracy)).abs() < 1e-15);
    }

    #[test]
    fn deterministic() {
        let a = train_gap_study(&study(vec![200, 400]), sample_2d_dataset).unwrap();
        let b = train_gap_study(&study(vec![200, 400]), sample_2d_dataset).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sizes_must_ascend() {
        assert!(train_gap_study(&study(vec![400, 200]), sample_2d_dataset).is_err());
        assert!(train_gap_study(&study(vec![]), sample_2d_dataset).is_err());
    }
}
