use std::f64::consts::PI;

use ndarray::Array2;

use super::{Classifier, Metrics};
use crate::error::{Error, Result};

pub const DEFAULT_RESOLUTION: usize = 256;
const MIN_RESOLUTION: usize = 16;

/// A 2D grid through configuration space: joints `joints.0` (columns) and
/// `joints.1` (rows) vary over `[−π, π]`, the rest stay at `fixed`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceRequest {
    /// 0-based joint indices.
    pub joints: (usize, usize),
    /// Full configuration; the two varying entries are ignored.
    pub fixed: Vec<f64>,
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    TruePositive,
    TrueNegative,
    FalsePositive,
    FalseNegative,
}

impl Category {
    pub fn of(predicted: bool, actual: bool) -> Self {
        match (predicted, actual) {
            (true, true) => Category::TruePositive,
            (false, false) => Category::TrueNegative,
            (true, false) => Category::FalsePositive,
            (false, true) => Category::FalseNegative,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Category::TruePositive => "TP",
            Category::TrueNegative => "TN",
            Category::FalsePositive => "FP",
            Category::FalseNegative => "FN",
        }
    }

    /// Blue, green, orange, red.
    pub fn rgb(self) -> [u8; 3] {
        match self {
            Category::TruePositive => [0, 0, 255],
            Category::TrueNegative => [0, 170, 0],
            Category::FalsePositive => [255, 165, 0],
            Category::FalseNegative => [255, 0, 0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceRaster {
    pub request: SliceRequest,
    /// Row-major, `cells[row * resolution + col]`; row 0 is the lowest
    /// angle of the second joint.
    pub cells: Vec<Category>,
}

/// Center of cell `i` along one axis.
pub fn cell_center(i: usize, resolution: usize) -> f64 {
    -PI + (i as f64 + 0.5) * (2.0 * PI / resolution as f64)
}

impl SliceRaster {
    pub fn resolution(&self) -> usize {
        self.request.resolution
    }

    pub fn category(&self, row: usize, col: usize) -> Category {
        self.cells[row * self.resolution() + col]
    }

    pub fn counts(&self) -> Metrics {
        let mut m = Metrics::default();
        for c in &self.cells {
            match c {
                Category::TruePositive => m.tp += 1,
                Category::TrueNegative => m.tn += 1,
                Category::FalsePositive => m.fp += 1,
                Category::FalseNegative => m.fn_ += 1,
            }
        }
        m
    }

    /// Binary PPM (P6), one pixel per cell, second joint increasing upward.
    pub fn to_ppm(&self) -> Vec<u8> {
        let n = self.resolution();
        let mut out = format!("P6\n{n} {n}\n255\n").into_bytes();
        for row in (0..n).rev() {
            for col in 0..n {
                out.extend_from_slice(&self.category(row, col).rgb());
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let (a, b) = self.request.joints;
        let n = self.resolution();
        let mut out = format!("theta{},theta{},category\n", a + 1, b + 1);
        for row in 0..n {
            for col in 0..n {
                out.push_str(&format!(
                    "{},{},{}\n",
                    cell_center(col, n),
                    cell_center(row, n),
                    self.category(row, col).code()
                ));
            }
        }
        out
    }
}

/// The configuration at every cell center, in cell order.
pub fn grid_points(req: &SliceRequest) -> Array2<f64> {
    let n = req.resolution;
    let (a, b) = req.joints;
    let mut pts = Array2::zeros((n * n, req.fixed.len()));
    for row in 0..n {
        for col in 0..n {
            let mut p = pts.row_mut(row * n + col);
            p.assign(&ndarray::ArrayView1::from(&req.fixed[..]));
            p[a] = cell_center(col, n);
            p[b] = cell_center(row, n);
        }
    }
    pts
}

/// Labels every cell by comparing `predictor` against `oracle`.
pub fn slice_raster(predictor: &dyn Classifier, oracle: &dyn Classifier, req: &SliceRequest) -> Result<SliceRaster> {
    let d = oracle.input_dim();
    if predictor.input_dim() != d {
        return Err(Error::dims(d, predictor.input_dim()));
    }
    if req.fixed.len() != d {
        return Err(Error::dims(d, req.fixed.len()));
    }
    let (a, b) = req.joints;
    if a == b || a >= d || b >= d {
        return Err(Error::InvalidArgument(format!(
            "slice joints ({a}, {b}) must be distinct indices below {d}"
        )));
    }
    if req.resolution < MIN_RESOLUTION {
        return Err(Error::InvalidArgument(format!("resolution must be at least {MIN_RESOLUTION}")));
    }
    let pts = grid_points(req);
    let predicted = predictor.classify_batch(pts.view())?;
    let actual = oracle.classify_batch(pts.view())?;
    let cells = predicted.iter().zip(&actual).map(|(&p, &t)| Category::of(p, t)).collect();
    Ok(SliceRaster {
        request: req.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{evaluate, FnClassifier};

    fn ring(p: &[f64]) -> bool {
        let r = (p[0] * p[0] + p[2] * p[2]).sqrt();
        (1.0..2.0).contains(&r)
    }

    fn request() -> SliceRequest {
        SliceRequest {
            joints: (0, 2),
            fixed: vec![0.0, 0.3, 0.0],
            resolution: 32,
        }
    }

    #[test]
    fn oracle_against_itself_has_no_errors() {
        let oracle = FnClassifier { dim: 3, f: ring };
        let r = slice_raster(&oracle, &oracle, &request()).unwrap();
        let m = r.counts();
        assert_eq!(m.fp + m.fn_, 0);
        assert!(m.tp > 0 && m.tn > 0);
    }

    #[test]
    fn inverted_oracle_is_all_errors() {
        let oracle = FnClassifier { dim: 3, f: ring };
        let inverted = FnClassifier { dim: 3, f: |p: &[f64]| !ring(p) };
        let m = slice_raster(&inverted, &oracle, &request()).unwrap().counts();
        assert_eq!(m.tp + m.tn, 0);
        assert_eq!(m.total(), 32 * 32);
    }

    #[test]
    fn counts_equal_evaluate_on_the_grid() {
        let oracle = FnClassifier { dim: 3, f: ring };
        let guess = FnClassifier { dim: 3, f: |p: &[f64]| p[0] > 0.2 };
        let req = request();
        let r = slice_raster(&guess, &oracle, &req).unwrap();
        let pts = grid_points(&req);
        let labels: Vec<u8> = pts.rows().into_iter().map(|p| ring(p.as_slice().unwrap()) as u8).collect();
        assert_eq!(r.counts(), evaluate(&guess, pts.view(), &labels).unwrap());
    }

    #[test]
    fn exports() {
        let oracle = FnClassifier { dim: 3, f: ring };
        let r = slice_raster(&oracle, &oracle, &request()).unwrap();
        let ppm = r.to_ppm();
        let header = b"P6\n32 32\n255\n";
        assert_eq!(&ppm[..header.len()], header);
        assert_eq!(ppm.len(), header.len() + 32 * 32 * 3);
        let csv = r.to_csv();
        assert!(csv.starts_with("theta1,theta3,category\n"));
        assert_eq!(csv.lines().count(), 1 + 32 * 32);
        assert!((cell_center(0, 32) + PI - PI / 32.0).abs() < 1e-12);
    }

    #[test]
    fn bad_requests() {
        let oracle = FnClassifier { dim: 3, f: ring };
        let mut req = request();
        req.joints = (1, 1);
        assert!(slice_raster(&oracle, &oracle, &req).is_err());
        let mut req = request();
        req.resolution = 8;
        assert!(slice_raster(&oracle, &oracle, &req).is_err());
        let mut req = request();
        req.fixed = vec![0.0; 2];
        assert!(matches!(slice_raster(&oracle, &oracle, &req), Err(Error::DimensionMismatch { .. })));
    }
}
