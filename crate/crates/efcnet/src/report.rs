//! Cross-validation report document: JSON on disk, table on stdout.
//!
//! The JSON layout is fixed (struct field order, shortest-round-trip float
//! formatting), so identical runs produce byte-identical files and the
//! rendered table always agrees with the stored values.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use efcnet_core::eval::CvReport;

use crate::error::{AppError, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MetricsRow {
    pub accuracy: f64,
    pub precision: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FoldRow {
    pub fold: usize,
    pub test_size: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReportDoc {
    pub model: String,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldRow>,
    pub mean: MetricsRow,
    pub std: MetricsRow,
}

impl ReportDoc {
    pub fn from_cv(model: &str, report: &CvReport) -> Self {
        ReportDoc {
            model: model.to_string(),
            k: report.k,
            seed: report.seed,
            folds: report
                .folds
                .iter()
                .zip(&report.test_sizes)
                .enumerate()
                .map(|(i, (m, &test_size))| FoldRow {
                    fold: i + 1,
                    test_size,
                    accuracy: m.accuracy,
                    precision: m.precision,
                    f1: m.f1,
                })
                .collect(),
            mean: MetricsRow {
                accuracy: report.mean.accuracy,
                precision: report.mean.precision,
                f1: report.mean.f1,
            },
            std: MetricsRow {
                accuracy: report.std.accuracy,
                precision: report.std.precision,
                f1: report.std.f1,
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(AppError::io(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(AppError::io(path))?;
        serde_json::from_str(&text)
            .map_err(|e| AppError::format(path, format!("not a report document: {e}")))
    }

    /// Fixed-width table, one row per fold plus the mean and std lines.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "model: {}   k: {}   seed: {}\n",
            self.model, self.k, self.seed
        ));
        out.push_str(&format!(
            "{:>4}  {:>9}  {:>8}  {:>9}  {:>8}\n",
            "fold", "test_size", "accuracy", "precision", "f1"
        ));
        for f in &self.folds {
            out.push_str(&format!(
                "{:>4}  {:>9}  {:>8.4}  {:>9.4}  {:>8.4}\n",
                f.fold, f.test_size, f.accuracy, f.precision, f.f1
            ));
        }
        out.push_str(&format!(
            "{:>4}  {:>9}  {:>8.4}  {:>9.4}  {:>8.4}\n",
            "mean", "", self.mean.accuracy, self.mean.precision, self.mean.f1
        ));
        out.push_str(&format!(
            "{:>4}  {:>9}  {:>8.4}  {:>9.4}  {:>8.4}\n",
            "std", "", self.std.accuracy, self.std.precision, self.std.f1
        ));
        out
    }
}
