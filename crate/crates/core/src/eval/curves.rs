use std::path::Path;

use super::mean_std;
use crate::error::{Error, Result};
use crate::nn::LossCurve;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// 1-based.
    pub epoch: usize,
    pub mean_loss: f64,
    pub std_loss: f64,
}

/// Per-epoch mean and population std of the training loss across curves.
pub fn loss_curve_table(curves: &[LossCurve]) -> Result<Vec<CurvePoint>> {
    let first = curves
        .first()
        .ok_or_else(|| Error::InvalidArgument("no loss curves to export".into()))?;
    let epochs = first.train_loss.len();
    if curves.iter().any(|c| c.train_loss.len() != epochs) {
        return Err(Error::InvalidArgument("loss curves differ in length".into()));
    }
    Ok((0..epochs)
        .map(|e| {
            let values: Vec<f64> = curves.iter().map(|c| c.train_loss[e]).collect();
            let (mean_loss, std_loss) = mean_std(&values);
            CurvePoint {
                epoch: e + 1,
                mean_loss,
                std_loss,
            }
        })
        .collect())
}

/// CSV with columns `epoch,mean_loss,std_loss`.
pub fn export_loss_curves(curves: &[LossCurve], path: &Path) -> Result<()> {
    let mut out = String::from("epoch,mean_loss,std_loss\n");
    for p in loss_curve_table(curves)? {
        out.push_str(&format!("{},{},{}\n", p.epoch, p.mean_loss, p.std_loss));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
