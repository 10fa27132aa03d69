use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gdistill(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdistill"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = gdistill(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn toy_fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/toy")
}

/// A config small enough for debug builds.
fn tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("cfg.json");
    std::fs::write(
        &path,
        r#"{"hks": {"num_bins": 8, "num_steps": 8}, "fc_shared_units": 8, "head_units": 4,
            "schedule": {"max_epochs": 3, "patience": 2, "batch_size": 16}}"#,
    )
    .unwrap();
    path
}

fn corpus(dir: &Path, count: usize) -> PathBuf {
    let path = dir.join("d.jsonl");
    ok(&["generate", "--model", "er", "--count", &count.to_string(), "--seed", "1", "--out", s(&path)]);
    path
}

#[test]
fn generate_writes_header_plus_one_line_per_graph() {
    let dir = tempfile::tempdir().unwrap();
    let path = corpus(dir.path(), 100);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 101);
    assert!(text.starts_with("{\"format\":1,"));
}

#[test]
fn missing_data_is_exit_2_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.jsonl");
    let out = gdistill(&[
        "train",
        "--data",
        s(&missing),
        "--main",
        "diameter",
        "--seed",
        "0",
        "--out-model",
        "m.json",
        "--out-metrics",
        "x.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.jsonl"));
}

#[test]
fn usage_errors_are_exit_1() {
    assert_eq!(gdistill(&["generate", "--bogus"]).status.code(), Some(1));
    assert_eq!(gdistill(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(gdistill(&["--help"]).status.code(), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_gdistill"))
        .args(["generate", "--model", "er", "--count", "1", "--out", "/dev/null"])
        .env("GD_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn learning_curve_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let data = corpus(dir.path(), 60);
    let cfg = tiny_config(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "learning-curve",
            "--data",
            s(&data),
            "--main",
            "diameter",
            "--aux",
            "density",
            "--sizes",
            "5,10,20",
            "--seeds",
            "3",
            "--config",
            s(&cfg),
            "--out",
            s(&out),
        ]);
        std::fs::read(&out).unwrap()
    };
    let a = run("a.csv");
    let text = String::from_utf8(a.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "variant,main_task,train_size,seed,metric_name,metric_value,best_epoch,wall_seconds");
    assert_eq!(lines.len(), 1 + 18);
    assert!(lines[1..].iter().all(|l| l.ends_with(',') && !l.contains(",,")));
    assert_eq!(a, run("b.csv"));
    assert!(dir.path().join("a_summary.csv").exists());
    assert!(dir.path().join("a.json").exists());
}

#[test]
fn train_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let data = corpus(dir.path(), 30);
    let cfg = tiny_config(dir.path());
    let model = dir.path().join("model.json");
    let metrics = dir.path().join("metrics.csv");
    ok(&[
        "train",
        "--data",
        s(&data),
        "--main",
        "diameter",
        "--aux",
        "density",
        "--budget",
        "10",
        "--seed",
        "4",
        "--config",
        s(&cfg),
        "--out-model",
        s(&model),
        "--out-metrics",
        s(&metrics),
    ]);
    let text = std::fs::read_to_string(&metrics).unwrap();
    assert!(text.contains("test,diameter,mse,"));
    assert!(text.contains("train,diameter,mse,") && text.contains(",10\n"));
    let eval = dir.path().join("eval.csv");
    ok(&["evaluate", "--model", s(&model), "--data", s(&data), "--out", s(&eval)]);
    let text = std::fs::read_to_string(&eval).unwrap();
    assert!(text.contains("all,diameter,mse,") && text.contains("all,density,mse,"));
}

#[test]
fn parse_tu_then_hks() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("toy.jsonl");
    ok(&["parse-tu", "--dir", s(&toy_fixture()), "--name", "TOY", "--out", s(&ds)]);
    let text = std::fs::read_to_string(&ds).unwrap();
    assert_eq!(text.lines().count(), 3);
    let out = dir.path().join("h.jsonl");
    ok(&["hks", "--in", s(&ds), "--bins", "4", "--steps", "3", "--out", s(&out)]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().contains("\"num_bins\":4"));

    let bad = gdistill(&["parse-tu", "--dir", s(dir.path()), "--name", "TOY", "--out", s(&ds)]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn search_and_cv() {
    let dir = tempfile::tempdir().unwrap();
    let data = corpus(dir.path(), 30);
    let cfg = tiny_config(dir.path());
    let out = dir.path().join("search.csv");
    ok(&[
        "search", "--data", s(&data), "--main", "density", "--aux", "diameter", "--trials", "2", "--seed", "1",
        "--config", s(&cfg), "--out", s(&out),
    ]);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 3);
    let best = dir.path().join("search_best.json");
    assert!(best.exists());

    let cv = dir.path().join("cv.csv");
    let stdout = ok(&[
        "cv", "--data", s(&data), "--main", "density", "--aux", "diameter", "--folds", "3", "--seed", "2",
        "--config", s(&best), "--out", s(&cv),
    ])
    .stdout;
    assert_eq!(std::fs::read_to_string(&cv).unwrap().lines().count(), 4);
    assert!(String::from_utf8_lossy(&stdout).contains("±"));
}
