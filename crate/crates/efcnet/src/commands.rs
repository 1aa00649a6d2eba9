//! The six subcommands. Each returns its stdout text so the logic is
//! callable in-process by tests; `main` only parses arguments and prints.

use std::fs;
use std::path::{Path, PathBuf};

use efcnet_core::connectivity::{edge_fc, edge_fc_blocked, node_fc};
use efcnet_core::eval::cross_validate;
use efcnet_core::model::{train_model, ModelKind, TrainedModel};
use efcnet_core::signal::{edge_time_series, zscore};
use efcnet_core::synth::generate_labeled_series;

use crate::checkpoint::save_checkpoint;
use crate::config::RunConfig;
use crate::csvio::{read_series, write_history, write_labels, write_series};
use crate::error::{AppError, Result};
use crate::graphio::load_dataset;
use crate::matio::write_matrix;
use crate::report::ReportDoc;

/// Generates the synthetic dataset: one CSV per subject, a labels manifest,
/// and a copy of the resolved configuration.
pub fn cmd_synth(cfg: &RunConfig, out_dir: &Path) -> Result<String> {
    let synth_cfg = cfg.synth_config();
    let series = generate_labeled_series(&synth_cfg, cfg.synth.n_per_class)?;
    fs::create_dir_all(out_dir).map_err(AppError::io(out_dir))?;

    let mut manifest = Vec::with_capacity(series.len());
    for (i, (ts, class)) in series.iter().enumerate() {
        let id = format!("subject_{i:04}");
        write_series(&out_dir.join(format!("{id}.csv")), ts)?;
        manifest.push((id, *class));
    }
    write_labels(&out_dir.join("labels.csv"), &manifest)?;
    let config_path = out_dir.join("config.json");
    fs::write(&config_path, cfg.to_json()).map_err(AppError::io(&config_path))?;

    log::info!("synthesized {} subjects", series.len());
    Ok(format!(
        "wrote {} subjects, labels.csv, and config.json to {}\n",
        series.len(),
        out_dir.display()
    ))
}

pub struct EfcOptions {
    pub blocked: bool,
    pub block_size: usize,
    pub memory_budget: u64,
}

/// Computes edge connectivity for one series CSV into a binary matrix file.
pub fn cmd_efc(input: &Path, output: &Path, opts: &EfcOptions) -> Result<String> {
    let ts = read_series(input)?;
    let z = zscore(&ts)?;
    let ets = edge_time_series(&z);
    let efc = if opts.blocked {
        log::info!(
            "blocked kernel: block {} budget {} bytes",
            opts.block_size,
            opts.memory_budget
        );
        edge_fc_blocked(&ets, opts.block_size, opts.memory_budget)?
    } else {
        edge_fc(&ets)?
    };
    write_matrix(output, efc.values())?;
    Ok(format!(
        "{} regions -> {} edge pairs; wrote {}x{} matrix to {}\n",
        ts.n_regions(),
        ets.n_edges(),
        ets.n_edges(),
        ets.n_edges(),
        output.display()
    ))
}

/// Computes node connectivity (Pearson correlations) for one series CSV.
pub fn cmd_nfc(input: &Path, output: &Path) -> Result<String> {
    let ts = read_series(input)?;
    let fc = node_fc(&ts)?;
    write_matrix(output, fc.values())?;
    Ok(format!(
        "wrote {0}x{0} matrix to {1}\n",
        ts.n_regions(),
        output.display()
    ))
}

fn model_files(baseline: bool) -> (&'static str, &'static str, &'static str, ModelKind) {
    if baseline {
        (
            "baseline.efcc",
            "baseline_history.csv",
            "gcn-baseline",
            ModelKind::GcnBaseline,
        )
    } else {
        (
            "model.efcc",
            "history.csv",
            "co-embedding",
            ModelKind::CoEmbedding,
        )
    }
}

/// Trains one model on the whole dataset; writes a checkpoint and the
/// training history.
pub fn cmd_train(
    cfg: &RunConfig,
    data_dir: &Path,
    baseline: bool,
    out_dir: &Path,
) -> Result<String> {
    let data = load_dataset(data_dir)?;
    let (ckpt_name, history_name, label, kind) = model_files(baseline);
    let tc = if baseline {
        cfg.baseline_config()
    } else {
        cfg.train_config()
    };

    log::info!(
        "training {label} on {} graphs for {} epochs",
        data.len(),
        tc.epochs
    );
    let (model, history) = train_model(&data, kind, &tc)?;

    fs::create_dir_all(out_dir).map_err(AppError::io(out_dir))?;
    let ckpt = out_dir.join(ckpt_name);
    save_checkpoint(&ckpt, &model)?;
    write_history(&out_dir.join(history_name), &history)?;

    let last = history.last().expect("at least one epoch");
    Ok(format!(
        "{label}: {} epochs, final loss {:.6}, train accuracy {:.4}\ncheckpoint: {}\nhistory: {}\n",
        history.len(),
        last.loss,
        last.train_accuracy,
        ckpt.display(),
        out_dir.join(history_name).display()
    ))
}

fn cv_one(
    cfg: &RunConfig,
    data: &[efcnet_core::graph::BrainGraph],
    baseline: bool,
    out_dir: &Path,
) -> Result<(ReportDoc, PathBuf)> {
    let (_, _, label, kind) = model_files(baseline);
    let tc = if baseline {
        cfg.baseline_config()
    } else {
        cfg.train_config()
    };
    log::info!("cross-validating {label} with k = {}", cfg.cv.k);
    let report = cross_validate(data, kind, &tc, cfg.cv.k, cfg.seed)?;
    let doc = ReportDoc::from_cv(label, &report);
    let path = out_dir.join(if baseline {
        "cv_gcn_baseline.json"
    } else {
        "cv_co_embedding.json"
    });
    doc.save(&path)?;
    Ok((doc, path))
}

/// Cross-validates the co-embedding model, and with `baseline` also the
/// plain GCN; writes one JSON report per model and returns their tables.
pub fn cmd_cv(cfg: &RunConfig, data_dir: &Path, baseline: bool, out_dir: &Path) -> Result<String> {
    let data = load_dataset(data_dir)?;
    fs::create_dir_all(out_dir).map_err(AppError::io(out_dir))?;

    let (doc, path) = cv_one(cfg, &data, false, out_dir)?;
    let mut out = format!("{}report: {}\n", doc.render_table(), path.display());
    if baseline {
        let (doc, path) = cv_one(cfg, &data, true, out_dir)?;
        out.push('\n');
        out.push_str(&format!(
            "{}report: {}\n",
            doc.render_table(),
            path.display()
        ));
    }
    Ok(out)
}

/// Renders a stored JSON report as a table.
pub fn cmd_report(path: &Path) -> Result<String> {
    Ok(ReportDoc::load(path)?.render_table())
}

/// Eval-mode prediction helper shared by tests: loads nothing, just maps a
/// checkpointed model over a dataset directory.
pub fn predict_dir(model: &TrainedModel, data_dir: &Path) -> Result<Vec<(usize, usize)>> {
    let data = load_dataset(data_dir)?;
    data.iter()
        .map(|g| Ok((model.predict(g)?, g.label())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matio::read_matrix;
    use tempfile::tempdir;

    fn small_cfg() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.synth.n_regions = 8;
        cfg.synth.t_len = 40;
        cfg.synth.n_per_class = 6;
        cfg.train.epochs = 4;
        cfg.train.hidden_dim = 16;
        cfg.cv.k = 3;
        cfg.seed = 11;
        cfg
    }

    #[test]
    fn synth_writes_subjects_manifest_and_config() {
        let dir = tempdir().unwrap();
        let out = dir.path().join("data");
        let cfg = small_cfg();
        let msg = cmd_synth(&cfg, &out).unwrap();
        assert!(msg.contains("12 subjects"));
        assert!(out.join("subject_0000.csv").exists());
        assert!(out.join("subject_0011.csv").exists());
        assert!(!out.join("subject_0012.csv").exists());
        let manifest = crate::csvio::read_labels(&out.join("labels.csv")).unwrap();
        assert_eq!(manifest.len(), 12);
        let stored = RunConfig::load(&out.join("config.json")).unwrap();
        assert_eq!(stored, cfg);
    }

    #[test]
    fn synth_is_reproducible_byte_for_byte() {
        let dir = tempdir().unwrap();
        let cfg = small_cfg();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        cmd_synth(&cfg, &a).unwrap();
        cmd_synth(&cfg, &b).unwrap();
        for name in [
            "subject_0000.csv",
            "subject_0011.csv",
            "labels.csv",
            "config.json",
        ] {
            let left = std::fs::read(a.join(name)).unwrap();
            let right = std::fs::read(b.join(name)).unwrap();
            assert_eq!(left, right, "{name} differs between runs");
        }
    }

    #[test]
    fn efc_blocked_agrees_with_direct() {
        let dir = tempdir().unwrap();
        let cfg = small_cfg();
        let data = dir.path().join("data");
        cmd_synth(&cfg, &data).unwrap();
        let input = data.join("subject_0000.csv");

        let direct_path = dir.path().join("direct.efcm");
        let blocked_path = dir.path().join("blocked.efcm");
        let msg = cmd_efc(
            &input,
            &direct_path,
            &EfcOptions {
                blocked: false,
                block_size: 512,
                memory_budget: 1 << 30,
            },
        )
        .unwrap();
        assert!(msg.contains("28x28"));
        cmd_efc(
            &input,
            &blocked_path,
            &EfcOptions {
                blocked: true,
                block_size: 5,
                memory_budget: 1 << 30,
            },
        )
        .unwrap();

        let direct = read_matrix(&direct_path).unwrap();
        let blocked = read_matrix(&blocked_path).unwrap();
        assert_eq!(direct.dims(), (28, 28));
        assert!(direct.max_abs_diff(&blocked) < 1e-10);
    }

    #[test]
    fn efc_reports_degenerate_regions_and_budgets() {
        let dir = tempdir().unwrap();
        let input = dir.path().join("flat.csv");
        std::fs::write(&input, "1.0,2.0\n1.0,3.0\n1.0,4.0\n").unwrap();
        let out = dir.path().join("out.efcm");
        let err = cmd_efc(
            &input,
            &out,
            &EfcOptions {
                blocked: false,
                block_size: 512,
                memory_budget: 1 << 30,
            },
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert!(err.to_string().contains("region 0"));

        std::fs::write(&input, "1.0,2.0\n2.0,3.0\n1.5,4.0\n").unwrap();
        let err = cmd_efc(
            &input,
            &out,
            &EfcOptions {
                blocked: true,
                block_size: 1,
                memory_budget: 8,
            },
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 5);
    }

    #[test]
    fn nfc_writes_square_correlations() {
        let dir = tempdir().unwrap();
        let cfg = small_cfg();
        let data = dir.path().join("data");
        cmd_synth(&cfg, &data).unwrap();
        let out = dir.path().join("nfc.efcm");
        cmd_nfc(&data.join("subject_0003.csv"), &out).unwrap();
        let m = read_matrix(&out).unwrap();
        assert_eq!(m.dims(), (8, 8));
        for i in 0..8 {
            assert!((m[(i, i)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn train_writes_checkpoint_and_full_history() {
        let dir = tempdir().unwrap();
        let cfg = small_cfg();
        let data = dir.path().join("data");
        cmd_synth(&cfg, &data).unwrap();
        let out = dir.path().join("run");
        let msg = cmd_train(&cfg, &data, false, &out).unwrap();
        assert!(msg.contains("co-embedding"));

        let model = crate::checkpoint::load_checkpoint(&out.join("model.efcc")).unwrap();
        let preds = predict_dir(&model, &data).unwrap();
        assert_eq!(preds.len(), 12);

        let history = std::fs::read_to_string(out.join("history.csv")).unwrap();
        assert_eq!(history.lines().count(), cfg.train.epochs + 1);

        cmd_train(&cfg, &data, true, &out).unwrap();
        assert!(out.join("baseline.efcc").exists());
        assert!(out.join("baseline_history.csv").exists());
    }

    #[test]
    fn cv_writes_reports_and_report_rerenders_identically() {
        let dir = tempdir().unwrap();
        let cfg = small_cfg();
        let data = dir.path().join("data");
        cmd_synth(&cfg, &data).unwrap();
        let out = dir.path().join("run");

        let text = cmd_cv(&cfg, &data, true, &out).unwrap();
        assert!(text.contains("co-embedding"));
        assert!(text.contains("gcn-baseline"));

        let co = out.join("cv_co_embedding.json");
        let doc = ReportDoc::load(&co).unwrap();
        assert_eq!(doc.folds.len(), 3);
        assert_eq!(cmd_report(&co).unwrap(), doc.render_table());
        assert!(text.contains(&doc.render_table()));

        let text2 = cmd_cv(&cfg, &data, true, &out).unwrap();
        assert_eq!(text, text2);
    }
}
