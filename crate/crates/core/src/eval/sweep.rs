use serde::Serialize;

use super::{evaluate_split, mean_std, Classifier, Encoded};
use crate::baselines::{GnbModel, KnnModel, LdaModel, DEFAULT_K};
use crate::dataset::{Dataset, Split};
use crate::encoding::{encode_batch, encoded_length, EncodingLevel};
use crate::error::{Error, Result};
use crate::nn::{accuracy, preset_spec, train, LossCurve, TrainConfig, TrainData};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "L")]
    pub level: EncodingLevel,
    pub input_length: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    /// Test accuracy of every trial.
    pub accuracies: Vec<f64>,
    #[serde(skip)]
    pub curves: Vec<LossCurve>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Level with the highest mean test accuracy (the first on ties).
    pub fn best(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .fold(None, |best: Option<&SweepRow>, r| match best {
                Some(b) if b.mean_accuracy >= r.mean_accuracy => Some(b),
                _ => Some(r),
            })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("L,input_length,mean_accuracy,std_accuracy,trials\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.level.get(),
                r.input_length,
                r.mean_accuracy,
                r.std_accuracy,
                r.accuracies.len()
            ));
        }
        out
    }
}

/// Trains `preset` `trials` times per level (trial `t` uses seed
/// `cfg.seed + t`) on the train split, with the val split for the curve,
/// and scores the test split.
pub fn sweep_levels(
    preset: &str,
    ds: &Dataset,
    levels: &[EncodingLevel],
    trials: usize,
    cfg: &TrainConfig,
) -> Result<SweepResult> {
    if levels.is_empty() || trials == 0 {
        return Err(Error::InvalidArgument("sweep needs at least one level and one trial".into()));
    }
    let mut result = SweepResult::default();
    for &level in levels {
        let input_length = encoded_length(ds.d(), level);
        let spec = preset_spec(preset, input_length)?;
        let (xtr, ytr) = ds.encoded::<f32>(Split::Train, level);
        let (xva, yva) = ds.encoded::<f32>(Split::Val, level);
        let (xte, yte) = ds.encoded::<f32>(Split::Test, level);
        let mut accuracies = Vec::with_capacity(trials);
        let mut curves = Vec::with_capacity(trials);
        for t in 0..trials as u64 {
            let trial_cfg = TrainConfig {
                seed: cfg.seed.wrapping_add(t),
                ..cfg.clone()
            };
            let data = TrainData {
                x: xtr.view(),
                y: ytr.view(),
                validation: (!yva.is_empty()).then(|| (xva.view(), yva.view())),
            };
            let (params, curve) = train(&spec, data, &trial_cfg)?;
            accuracies.push(accuracy(&params, xte.view(), yte.view())?);
            curves.push(curve);
        }
        let (mean_accuracy, std_accuracy) = mean_std(&accuracies);
        result.rows.push(SweepRow {
            level,
            input_length,
            mean_accuracy,
            std_accuracy,
            accuracies,
            curves,
        });
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Exhaustive k-NN with `k` = [`DEFAULT_K`].
    Knn,
    Gnb,
    Lda,
}

/// Fits a classical model on the encoded train split and returns its test
/// accuracy.
pub fn baseline_accuracy(kind: BaselineKind, ds: &Dataset, level: EncodingLevel) -> Result<f64> {
    let (xtr, ytr) = ds.split(Split::Train);
    let features = encode_batch::<f64>(xtr.view(), level);
    let d = ds.d();
    let classifier: Box<dyn Classifier> = match kind {
        BaselineKind::Knn => Box::new(Encoded::new(level, d, KnnModel::fit(features.view(), &ytr, DEFAULT_K)?)?),
        BaselineKind::Gnb => Box::new(Encoded::new(level, d, GnbModel::fit(features.view(), &ytr)?)?),
        BaselineKind::Lda => Box::new(Encoded::new(level, d, LdaModel::fit(features.view(), &ytr)?)?),
    };
    Ok(evaluate_split(classifier.as_ref(), ds, Split::Test)?.accuracy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::sample_2d_dataset;
    use crate::nn::NetworkParams;

    fn quick() -> TrainConfig {
        TrainConfig {
            epochs: 4,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn input_length_column_follows_the_encoding() {
        let ds = sample_2d_dataset(200, 1).unwrap();
        let levels: Vec<_> = [0, 1, 3].map(|l| EncodingLevel::new(l).unwrap()).to_vec();
        let r = sweep_levels("MLP2D", &ds, &levels, 2, &quick()).unwrap();
        assert_eq!(r.rows.len(), 3);
        for row in &r.rows {
            assert_eq!(row.input_length, 2 * (1 + 2 * row.level.get()));
            assert_eq!(row.accuracies.len(), 2);
            assert_eq!(row.curves[0].validation_accuracy.len(), 4);
        }
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(2).unwrap().starts_with("1,6,"));
        assert!(r.best().is_some());
    }

    #[test]
    fn single_level_equals_plain_training() {
        let ds = sample_2d_dataset(200, 2).unwrap();
        let r = sweep_levels("MLP2D", &ds, &[EncodingLevel::RAW], 1, &quick()).unwrap();
        let (xtr, ytr) = ds.encoded::<f32>(Split::Train, EncodingLevel::RAW);
        let (xva, yva) = ds.encoded::<f32>(Split::Val, EncodingLevel::RAW);
        let (xte, yte) = ds.encoded::<f32>(Split::Test, EncodingLevel::RAW);
        let spec = preset_spec("MLP2D", 2).unwrap();
        let data = TrainData {
            x: xtr.view(),
            y: ytr.view(),
            validation: Some((xva.view(), yva.view())),
        };
        let (p, _): (NetworkParams<f32>, _) = train(&spec, data, &quick()).unwrap();
        assert_eq!(r.rows[0].mean_accuracy, accuracy(&p, xte.view(), yte.view()).unwrap());
        assert_eq!(r.rows[0].std_accuracy, 0.0);
    }

    #[test]
    fn baselines_beat_chance_on_discs() {
        let ds = sample_2d_dataset(2000, 3).unwrap();
        for kind in [BaselineKind::Knn, BaselineKind::Gnb, BaselineKind::Lda] {
            let acc = baseline_accuracy(kind, &ds, EncodingLevel::new(1).unwrap()).unwrap();
            assert!(acc > 0.5, "{kind:?}: {acc}");
        }
    }
}
