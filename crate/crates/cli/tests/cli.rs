use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn pamle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pamle"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn help_exits_zero() {
    assert_eq!(pamle(&["--help"]).status.code(), Some(0));
    for sub in ["simulate", "fit", "limits", "experiment", "ingest"] {
        let out = pamle(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
    }
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = pamle(&[
            "simulate",
            "--model",
            "hpam",
            "--n",
            "300",
            "--seed",
            "4",
            "--pi",
            "0.3,0.7",
            "--gamma",
            "1,0.5,0.5,1.5",
            "--out",
            path(p),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let stdout = pamle(&[
        "simulate", "--model", "bo", "--a", "1.5", "--n", "50", "--seed", "4",
    ]);
    let text = String::from_utf8(stdout.stdout).unwrap();
    assert!(text.starts_with("node,target,membership,target_membership\n"));
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn simulate_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.csv");
    assert!(pamle(&[
        "simulate",
        "--model",
        "lcd",
        "--n",
        "2000",
        "--seed",
        "1",
        "--out",
        path(&h)
    ])
    .status
    .success());
    let out = pamle(&["fit", "--model", "bo", "--input", path(&h)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["a_hat"].as_f64().unwrap() - 1.0).abs() < 0.4);
    assert_eq!(v["converged"], Value::Bool(true));
    assert!(v["boundary"].is_null());
    assert!(v["std_error"].as_f64().unwrap() > 0.0);
}

#[test]
fn boundary_fit_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("loops.csv");
    fs::write(
        &h,
        "node,target,membership,target_membership\n1,1,,\n2,2,,\n3,3,,\n",
    )
    .unwrap();
    let out = pamle(&["fit", "--model", "bo", "--input", path(&h)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["boundary"], Value::String("upper".into()));
}

#[test]
fn hpam_fit_needs_labels() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.csv");
    assert!(pamle(&[
        "simulate",
        "--model",
        "bo",
        "--a",
        "1",
        "--n",
        "100",
        "--out",
        path(&h)
    ])
    .status
    .success());
    assert_eq!(
        pamle(&["fit", "--model", "hpam", "--input", path(&h)])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn usage_errors_exit_two() {
    let tx = fixture("tx.csv");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.csv");
    let r = pamle(&[
        "ingest",
        "--input",
        path(&tx),
        "--out",
        path(&out),
        "--top-fraction",
        "1.5",
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!out.exists());
    assert_eq!(
        pamle(&["simulate", "--model", "bo", "--n", "10"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        pamle(&["limits", "--model", "hpam", "--pi", "0.5,0.5", "--gamma", "1,2,3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(pamle(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn limits_report() {
    let out = pamle(&["limits", "--model", "bo", "--a0", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    let p = v["p"].as_array().unwrap();
    assert!((p[0].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert!((p[1].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-15);
    let beta = v["beta"].as_f64().unwrap();
    assert!((beta - (std::f64::consts::PI.powi(2) / 6.0 - 1.5)).abs() < 1e-10);
    let out = pamle(&[
        "limits",
        "--model",
        "hpam",
        "--pi",
        "0.25,0.75",
        "--gamma",
        "2,2,2,2",
    ]);
    let v = json(&out);
    let p0: Vec<f64> = v["p0"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((p0[0] - 0.5).abs() < 1e-12 && (p0[1] - 1.5).abs() < 1e-12);
}

#[test]
fn ingest_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.csv");
    let report = dir.path().join("report.json");
    let out = pamle(&[
        "ingest",
        "--input",
        path(&fixture("tx.csv")),
        "--blocklist",
        "1Dice",
        "--top-fraction",
        "0.05",
        "--out",
        path(&h),
        "--report",
        path(&report),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r: Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert!(r["dropped_blocked"].as_u64().unwrap() > 0);
    assert_eq!(r["reordered"].as_u64().unwrap(), 3);
    let nodes = r["nodes"].as_u64().unwrap();
    let text = fs::read_to_string(&h).unwrap();
    assert_eq!(text.lines().count() as u64, nodes + 1);
    assert!(!text.contains("Dice"));
    let fit = pamle(&["fit", "--model", "hpam", "--input", path(&h)]);
    assert!(
        fit.status.success(),
        "{}",
        String::from_utf8_lossy(&fit.stderr)
    );
    assert_eq!(json(&fit)["k"].as_u64(), Some(2));
}

#[test]
fn experiment_writes_both_files_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"model":"bo","true_params":{"a0":[1.0]},"sample_sizes":[50,100],
            "replications":5,"base_seed":3,"output_path":"unused"}"#,
    )
    .unwrap();
    let mut raws = Vec::new();
    for (name, threads) in [("one", "1"), ("two", "3")] {
        let out_dir = dir.path().join(name);
        let out = Command::new(env!("CARGO_BIN_EXE_pamle"))
            .args([
                "experiment",
                "--config",
                path(&cfg),
                "--out-dir",
                path(&out_dir),
            ])
            .env("PA_THREADS", threads)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 3);
        raws.push(fs::read(out_dir.join("raw_estimates.csv")).unwrap());
    }
    assert_eq!(raws[0], raws[1]);
}

#[test]
fn experiment_schema_error_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"model":"bo","true_params":{"a0":[1.0]},"sample_sizes":[50],
            "replications":0,"base_seed":3,"output_path":"unused"}"#,
    )
    .unwrap();
    let out = pamle(&["experiment", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("replications"));
}
