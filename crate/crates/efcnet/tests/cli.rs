//! End-to-end tests driving the compiled binary the way a user would.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn efcnet() -> Command {
    Command::new(env!("CARGO_BIN_EXE_efcnet"))
}

fn run(args: &[&str]) -> Output {
    efcnet().args(args).output().expect("binary should launch")
}

fn assert_ok(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A configuration small enough that every subcommand finishes in seconds.
fn small_config(dir: &Path) -> String {
    let path = dir.join("run.json");
    fs::write(
        &path,
        r#"{
  "seed": 11,
  "synth": {
    "n_regions": 8,
    "t_len": 60,
    "n_communities": 2,
    "coupling_by_class": [0.7, 0.2],
    "noise_std": 1.0,
    "n_per_class": 6
  },
  "train": { "epochs": 30, "hidden_dim": 64 },
  "baseline": { "hidden_dim": 64 },
  "cv": { "k": 3 }
}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn pipeline_runs_end_to_end() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    let data = tmp.path().join("data");
    let data_s = data.to_str().unwrap();

    let out = run(&["--config", &cfg, "synth", "--out", data_s]);
    assert_ok(&out, "synth");
    assert!(data.join("labels.csv").is_file());
    assert!(data.join("config.json").is_file());
    assert!(data.join("subject_0000.csv").is_file());
    assert!(data.join("subject_0011.csv").is_file());
    assert!(!data.join("subject_0012.csv").exists());

    let subject = data.join("subject_0000.csv");
    let efc_out = tmp.path().join("edge.efcm");
    let out = run(&[
        "--config",
        &cfg,
        "efc",
        subject.to_str().unwrap(),
        efc_out.to_str().unwrap(),
    ]);
    assert_ok(&out, "efc");
    assert!(efc_out.is_file());

    // 8 regions -> 28 edge pairs -> 28x28 matrix behind a 23-byte header.
    let bytes = fs::read(&efc_out).unwrap();
    assert_eq!(bytes.len(), 23 + 28 * 28 * 8);

    let nfc_out = tmp.path().join("node.efcm");
    let out = run(&[
        "--config",
        &cfg,
        "nfc",
        subject.to_str().unwrap(),
        nfc_out.to_str().unwrap(),
    ]);
    assert_ok(&out, "nfc");
    assert_eq!(fs::read(&nfc_out).unwrap().len(), 23 + 8 * 8 * 8);

    let out = run(&["--config", &cfg, "train", data_s, "--out", data_s]);
    assert_ok(&out, "train");
    assert!(data.join("model.efcc").is_file());
    let history = fs::read_to_string(data.join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 31, "header plus one row per epoch");

    let out = run(&[
        "--config",
        &cfg,
        "train",
        data_s,
        "--baseline",
        "--out",
        data_s,
    ]);
    assert_ok(&out, "train --baseline");
    assert!(data.join("baseline.efcc").is_file());
    assert!(data.join("baseline_history.csv").is_file());

    let out = run(&[
        "--config",
        &cfg,
        "cv",
        data_s,
        "--baseline",
        "--out",
        data_s,
    ]);
    assert_ok(&out, "cv");
    let co_report = data.join("cv_co_embedding.json");
    let gcn_report = data.join("cv_gcn_baseline.json");
    assert!(co_report.is_file());
    assert!(gcn_report.is_file());
    let table = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(table.contains("co-embedding"));
    assert!(table.contains("gcn-baseline"));
    assert!(table.contains("fold"));
    assert!(table.contains("mean"));

    let out = run(&["report", co_report.to_str().unwrap()]);
    assert_ok(&out, "report");
    let rendered = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(rendered.contains("model: co-embedding"));
    assert!(rendered.contains("k: 3"));
    assert!(rendered.contains("std"));
}

#[test]
fn seed_flag_overrides_the_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());

    let mk = |name: &str, seed: Option<&str>| {
        let dir = tmp.path().join(name);
        let mut args = vec!["--config", &cfg];
        if let Some(s) = seed {
            args.extend(["--seed", s]);
        }
        let dir_s = dir.to_str().unwrap().to_owned();
        args.extend(["synth", "--out"]);
        let mut owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        owned.push(dir_s);
        let out = efcnet().args(&owned).output().unwrap();
        assert_ok(&out, "synth");
        dir
    };

    let base = mk("base", None);
    let same = mk("same", Some("11"));
    let other = mk("other", Some("12"));

    let read = |dir: &Path, f: &str| fs::read(dir.join(f)).unwrap();
    // The config seed is 11, so passing --seed 11 reproduces it byte for byte.
    assert_eq!(
        read(&base, "subject_0000.csv"),
        read(&same, "subject_0000.csv")
    );
    assert_eq!(read(&base, "labels.csv"), read(&same, "labels.csv"));
    assert_ne!(
        read(&base, "subject_0000.csv"),
        read(&other, "subject_0000.csv"),
        "a different seed must change the sampled series"
    );
}

#[test]
fn extra_threads_leave_outputs_unchanged() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());

    let run_with = |threads: &str, name: &str| {
        let dir = tmp.path().join(name);
        let dir_s = dir.to_str().unwrap().to_owned();
        let out = efcnet()
            .args([
                "--config",
                &cfg,
                "--threads",
                threads,
                "synth",
                "--out",
                &dir_s,
            ])
            .output()
            .unwrap();
        assert_ok(&out, "synth");
        let out = efcnet()
            .args([
                "--config",
                &cfg,
                "--threads",
                threads,
                "train",
                &dir_s,
                "--out",
                &dir_s,
            ])
            .output()
            .unwrap();
        assert_ok(&out, "train");
        dir
    };

    let one = run_with("1", "one");
    let four = run_with("4", "four");

    for file in [
        "labels.csv",
        "subject_0003.csv",
        "model.efcc",
        "history.csv",
    ] {
        assert_eq!(
            fs::read(one.join(file)).unwrap(),
            fs::read(four.join(file)).unwrap(),
            "{file} differs across thread counts"
        );
    }
}

#[test]
fn unknown_config_keys_exit_with_the_config_code() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, r#"{ "train": { "learning_rte": 0.1 } }"#).unwrap();

    let out = run(&["--config", cfg.to_str().unwrap(), "synth"]);
    assert_eq!(exit_code(&out), 2);
    let err = stderr(&out);
    assert!(err.starts_with("error:"), "stderr was: {err}");
    assert!(err.contains("learning_rte"), "stderr was: {err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn zero_threads_is_a_config_error() {
    let out = run(&["--threads", "0", "nfc", "in.csv", "out.efcm"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("threads"));
}

#[test]
fn missing_input_exits_with_the_io_code() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nope.csv");
    let out = run(&[
        "efc",
        missing.to_str().unwrap(),
        tmp.path().join("out.efcm").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 3);
    assert!(stderr(&out).contains("nope.csv"));
}

#[test]
fn flat_regions_exit_with_the_data_code() {
    let tmp = TempDir::new().unwrap();
    let series = tmp.path().join("flat.csv");
    fs::write(&series, "region_0,region_1\n1.0,2.0\n1.0,3.0\n1.0,4.0\n").unwrap();

    let out = run(&[
        "efc",
        series.to_str().unwrap(),
        tmp.path().join("out.efcm").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 4);
    let err = stderr(&out);
    assert!(err.contains("zero variance"), "stderr was: {err}");
}

#[test]
fn tiny_memory_budgets_exit_with_the_budget_code() {
    let tmp = TempDir::new().unwrap();
    let series = tmp.path().join("s.csv");
    let mut text = String::from("region_0,region_1,region_2,region_3\n");
    for t in 0..20 {
        let t = t as f64;
        text.push_str(&format!(
            "{},{},{},{}\n",
            (t * 0.7).sin(),
            (t * 1.3).cos(),
            (t * 0.9).sin() + 0.1 * t,
            (t * 1.7).cos() - 0.05 * t,
        ));
    }
    fs::write(&series, text).unwrap();

    let out = run(&[
        "efc",
        series.to_str().unwrap(),
        tmp.path().join("out.efcm").to_str().unwrap(),
        "--blocked",
        "--memory-budget",
        "64",
    ]);
    assert_eq!(exit_code(&out), 5);
    assert!(stderr(&out).contains("budget"));
}

#[test]
fn malformed_reports_exit_with_the_format_code() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("report.json");
    fs::write(&path, "{ this is not a report").unwrap();

    let out = run(&["report", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 6);
    assert!(stderr(&out).contains("not a report document"));
}

#[test]
fn truncated_series_rows_exit_with_the_format_code() {
    let tmp = TempDir::new().unwrap();
    let series = tmp.path().join("ragged.csv");
    fs::write(&series, "region_0,region_1\n1.0,2.0\n3.0\n").unwrap();

    let out = run(&[
        "nfc",
        series.to_str().unwrap(),
        tmp.path().join("out.efcm").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 6);
}
