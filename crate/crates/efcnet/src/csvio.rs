//! CSV formats: subject time series, the labels manifest, and training
//! history.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! series survives a write/read cycle bit-exactly even though the file is
//! text.

use std::path::Path;

use efcnet_core::model::EpochStats;
use efcnet_core::signal::TimeSeriesMatrix;
use efcnet_core::Mat;

use crate::error::{AppError, Result};

/// Writes a `T x N` series with a `region_0..region_{N-1}` header.
pub fn write_series(path: &Path, ts: &TimeSeriesMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let header: Vec<String> = (0..ts.n_regions()).map(|i| format!("region_{i}")).collect();
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for t in 0..ts.t_len() {
        let row: Vec<String> = ts.values().row(t).iter().map(|v| v.to_string()).collect();
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(AppError::io(path))
}

/// Reads a series CSV; a first line that does not parse as numbers is
/// treated as a header.
pub fn read_series(path: &Path) -> Result<TimeSeriesMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(row) => {
                let w = *width.get_or_insert(row.len());
                if row.len() != w {
                    return Err(AppError::format(
                        path,
                        format!("row {} has {} fields, expected {w}", i + 1, row.len()),
                    ));
                }
                rows.push(row);
            }
            Err(e) => {
                if i == 0 {
                    continue; // header line
                }
                return Err(AppError::format(
                    path,
                    format!("row {} is not numeric: {e}", i + 1),
                ));
            }
        }
    }
    if rows.is_empty() {
        return Err(AppError::format(path, "no data rows"));
    }
    let (t, n) = (rows.len(), rows[0].len());
    let m = Mat::from_fn(t, n, |r, c| rows[r][c]);
    TimeSeriesMatrix::new(m).map_err(AppError::from)
}

/// Writes the `subject_id,class` manifest.
pub fn write_labels(path: &Path, rows: &[(String, usize)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["subject_id", "class"])
        .map_err(|e| csv_err(path, e))?;
    for (id, class) in rows {
        w.write_record([id.as_str(), &class.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(AppError::io(path))
}

pub fn read_labels(path: &Path) -> Result<Vec<(String, usize)>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut out = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        if record.len() != 2 {
            return Err(AppError::format(
                path,
                format!(
                    "manifest row {} has {} fields, expected 2",
                    i + 1,
                    record.len()
                ),
            ));
        }
        let class = record[1].trim().parse::<usize>().map_err(|e| {
            AppError::format(path, format!("manifest row {}: bad class: {e}", i + 1))
        })?;
        out.push((record[0].to_string(), class));
    }
    if out.is_empty() {
        return Err(AppError::format(path, "manifest has no rows"));
    }
    Ok(out)
}

/// Writes the per-epoch training curve as `epoch,loss,train_accuracy`.
pub fn write_history(path: &Path, history: &[EpochStats]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["epoch", "loss", "train_accuracy"])
        .map_err(|e| csv_err(path, e))?;
    for e in history {
        w.write_record([
            e.epoch.to_string(),
            e.loss.to_string(),
            e.train_accuracy.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(AppError::io(path))
}

fn csv_err(path: &Path, e: csv::Error) -> AppError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => AppError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => AppError::format(path, format!("{other:?}")),
    }
}
