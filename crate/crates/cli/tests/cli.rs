use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cfexplain(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfexplain"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "info")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    std::fs::write(
        d.join("synth.json"),
        r#"{"rows": 250, "noise_rate": 0.1, "threshold": 5,
            "decisive": [{"feature": "ham01", "weight": 1}, {"feature": "ham09", "weight": 1}, {"feature": "ham13", "weight": 1}]}"#,
    )
    .unwrap();
    let out = cfexplain(&["gen-data", "--config", "synth.json", "--seed", "7", "--out", "data.csv"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed 7"));
    let csv = std::fs::read_to_string(d.join("data.csv")).unwrap();
    assert_eq!(csv.lines().count(), 251);

    std::fs::write(
        d.join("forest.json"),
        r#"{"model_kind": "forest", "n_trees": 15, "max_depth": 8, "min_leaf": 2, "feature_subsample": 0.3, "bootstrap": true}"#,
    )
    .unwrap();
    let out = cfexplain(
        &["train", "--data", "data.csv", "--model-kind", "forest", "--params", "forest.json", "--cv", "5", "--seed", "1"],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = read_json(&d.join("cv_metrics.json"));
    assert_eq!(metrics["folds"].as_array().unwrap().len(), 5);
    let model = read_json(&d.join("model.json"));
    assert_eq!(model["model_kind"], "forest");
    assert_eq!(model["feature_mads"].as_array().unwrap().len(), 17);

    let out = cfexplain(&["evaluate", "--model", "model.json", "--data", "data.csv"], d);
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["accuracy"].as_f64().unwrap() > 0.5);

    std::fs::write(d.join("p.json"), r#"{"values": [3,1,2,1,0,1,2,1,3,2,1,0,2,1,2,1,0]}"#).unwrap();
    let out = cfexplain(
        &["explain", "--model", "model.json", "--instance", "p.json", "--k", "10", "--immutable", "ham10", "--seed", "3", "--out", "cfs.json"],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let set = read_json(&d.join("cfs.json"));
    let cfs = set["cfs"].as_array().unwrap();
    assert!(!cfs.is_empty() && cfs.len() <= 10);
    for cf in cfs {
        assert_eq!(cf["values"][9], 2.0);
    }

    let out = cfexplain(
        &["importance", "--model", "model.json", "--data", "data.csv", "--limit", "5", "--k", "3", "--out", "global.json", "--csv", "global.csv"],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_json(&d.join("global.json"))["scope"], "global");
    let csv = std::fs::read_to_string(d.join("global.csv")).unwrap();
    assert_eq!(csv.lines().count(), 18);

    let out = cfexplain(&["importance", "--model", "model.json", "--instance", "p.json", "--k", "3"], d);
    assert!(out.status.success());
    let local: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(local["scope"], "local");
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = cfexplain(&["train", "--model-kind", "forest"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--data"));
    let out = cfexplain(&["explain", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--bogus"));
}

#[test]
fn runtime_errors_exit_1_and_name_the_operation() {
    let dir = tempfile::tempdir().unwrap();
    let out = cfexplain(&["evaluate", "--model", "missing.json", "--data", "x.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("load model failed"));

    std::fs::write(dir.path().join("bad.json"), r#"{"rows": 10, "noise_rate": 0.9, "threshold": 1, "decisive": []}"#).unwrap();
    let out = cfexplain(&["gen-data", "--config", "bad.json", "--out", "d.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gen-data failed"));
}
