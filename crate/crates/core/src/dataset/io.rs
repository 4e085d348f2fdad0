//! CSV rows with header `f1,…,fd,label,split` plus a JSON sidecar holding
//! the metadata.

use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::{Dataset, DatasetMeta, Split};
use crate::error::{Error, Result};

/// Parsed CSV body before it is joined with its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRows {
    pub features: Array2<f64>,
    pub labels: Vec<u8>,
    pub splits: Vec<Split>,
}

/// `<path>.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn to_csv_string(ds: &Dataset) -> String {
    let d = ds.d();
    let mut out = String::with_capacity(ds.len() * (d * 24 + 8));
    let header: Vec<String> = (1..=d).map(|i| format!("f{i}")).chain(["label".into(), "split".into()]).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..ds.len() {
        for v in ds.features().row(i) {
            // 17 significant digits round-trip every f64.
            out.push_str(&format!("{v:.16e},"));
        }
        out.push_str(&format!("{},{}\n", ds.labels()[i], ds.splits()[i].as_str()));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<CsvRows> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::format(format!("dataset header: {e}")))?
        .clone();
    if header.len() < 3 {
        return Err(Error::format(format!(
            "dataset header has {} columns; expected f1,...,fd,label,split",
            header.len()
        )));
    }
    let d = header.len() - 2;
    let expected = (1..=d).map(|i| format!("f{i}")).chain(["label".into(), "split".into()]);
    for (col, (got, want)) in header.iter().zip(expected).enumerate() {
        if got != want {
            return Err(Error::format(format!("header column {}: `{got}`, expected `{want}`", col + 1)));
        }
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut splits = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::format(format!("line {line}: {e}")))?;
        for field in record.iter().take(d) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::format(format!("line {line}: `{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(Error::format(format!("line {line}: non-finite feature")));
            }
            features.push(v);
        }
        labels.push(match &record[d] {
            "0" => 0,
            "1" => 1,
            other => return Err(Error::format(format!("line {line}: label `{other}` is not 0 or 1"))),
        });
        let split = &record[d + 1];
        splits.push(Split::parse(split).ok_or_else(|| Error::format(format!("line {line}: unknown split `{split}`")))?);
    }
    if labels.is_empty() {
        return Err(Error::format("dataset has no rows"));
    }
    let features = Array2::from_shape_vec((labels.len(), d), features).expect("row-major buffer");
    Ok(CsvRows {
        features,
        labels,
        splits,
    })
}

pub fn parse_sidecar(text: &str) -> Result<DatasetMeta> {
    serde_json::from_str(text).map_err(|e| Error::format(format!("dataset metadata: {e}")))
}

/// Writes the CSV to `path` and the metadata to [`sidecar_path`].
pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv_string(ds)).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(ds.meta()).expect("metadata serializes");
    std::fs::write(&side, json + "\n").map_err(|e| Error::io(&side, e))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let meta_text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let rows = parse_csv(&text)?;
    let meta = parse_sidecar(&meta_text)?;
    Dataset::new(rows.features, rows.labels, rows.splits, meta).map_err(|e| Error::format(e.to_string()))
}
