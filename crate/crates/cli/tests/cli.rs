use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_vec_pretty(value).unwrap()).unwrap();
    path
}

fn clusterx(args: &[&str], config: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_clusterx"));
    cmd.args(args).env_remove("CLUSTERX_CAP");
    if let Some(path) = config {
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn single_spin_compare_matches_log_cosh() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "spin.json", &json!({ "model": { "lr_tfi": { "N": 1, "alpha": 2.0, "h": 1.0 } }, "beta": { "re": 0.1 }, "m": 6 }));
    let out = clusterx(&["compare"], Some(&cfg));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    let exact = doc["exact"]["re"].as_f64().unwrap();
    assert!((exact - 0.1f64.cosh().ln()).abs() < 1e-14);
    assert!(doc["abs_error"].as_f64().unwrap() <= 1e-8);
    assert_eq!(doc["bound_violated"], json!(false));
}

#[test]
fn estimate_at_zero_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "zero.json", &json!({ "model": { "lr_tfi": { "N": 4, "alpha": 1.5 } }, "beta": { "re": 0.0 }, "m": 3 }));
    let out = clusterx(&["estimate"], Some(&cfg));
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["T_m"]["re"].as_f64(), Some(0.0));
    assert_eq!(doc["error_bound"].as_f64(), Some(0.0));
    assert_eq!(doc["certified"], json!(true));
}

#[test]
fn floats_print_with_seventeen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.json", &json!({ "model": { "lr_tfi": { "N": 4, "alpha": 2.5 } }, "beta": { "re": 0.05 }, "m": 2 }));
    let out = clusterx(&["estimate", "--no-timing"], Some(&cfg));
    let text = String::from_utf8(out.stdout).unwrap();
    let doc: Value = serde_json::from_str(&text).unwrap();
    let beta_star = doc["beta_star"].as_f64().unwrap();
    let rendered = format!("\"beta_star\":{beta_star:.16e}");
    assert!(text.contains(&rendered), "{text}");
    assert!(text.contains("\"wall_time_s\":null"));
}

#[test]
fn enumerate_single_term_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "one.json", &json!({ "model": { "lr_tfi": { "N": 1, "alpha": 2.0 } }, "m": 2 }));
    let out = clusterx(&["enumerate"], Some(&cfg));
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<Value> = String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    let pair = lines.iter().find(|c| c["n"] == json!(2)).unwrap();
    assert_eq!(pair["ursell"].as_f64(), Some(-0.5));
    assert_eq!(pair["factor"], json!(1));
}

#[test]
fn custom_model_resolves_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let model = json!({ "d": 2, "extents": [2], "terms": [
        { "support": [0, 1], "matrix": { "re": [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]] } },
        { "support": [0], "matrix": { "re": [[0, 0.5], [0.5, 0]] } }
    ] });
    std::fs::write(dir.path().join("h.json"), model.to_string()).unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "model": { "custom": { "path": "h.json", "alpha": 2.0 } }, "beta": { "re": 0.02 }, "m": 4 }));
    let out = clusterx(&["compare"], Some(&cfg));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["N"], json!(2));
    assert!(doc["abs_error"].as_f64().unwrap() <= doc["error_bound"].as_f64().unwrap());
}

#[test]
fn csv_output_writes_a_summary_next_to_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "dos.json", &json!({ "model": { "lr_tfi": { "N": 4, "alpha": 1.5 } }, "dos": { "n_t": 256 } }));
    let out_path = dir.path().join("dos.csv");
    let out = clusterx(&["dos", "--format", "csv", "--out", out_path.to_str().unwrap()], Some(&cfg));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&out_path).unwrap();
    assert!(table.starts_with("energy,density,cdos,exact_cdos\n"));
    assert_eq!(table.lines().count(), 257);
    let summary: Value = serde_json::from_slice(&std::fs::read(dir.path().join("dos.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["n_t"], json!(256));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "bad.json", &json!({ "model": { "lr_tfi": { "N": 4, "alpha": 1.5 } }, "bogus": 1 }));
    assert_eq!(clusterx(&["estimate"], Some(&unknown)).status.code(), Some(2));
    assert_eq!(clusterx(&["estimate"], None).status.code(), Some(2));
    assert_eq!(clusterx(&["estimate"], Some(&dir.path().join("missing.json"))).status.code(), Some(2));
    let lambdas = write_config(dir.path(), "l.json", &json!({ "model": { "lr_tfi": { "N": 4, "alpha": 1.5 } }, "lambdas": [{ "re": 0.1 }], "m": 2 }));
    assert_eq!(clusterx(&["estimate"], Some(&lambdas)).status.code(), Some(2));
    assert_eq!(clusterx(&["frobnicate"], None).status.code(), Some(2));
}

#[test]
fn computation_errors_exit_with_three_and_a_json_body() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "big.json", &json!({ "model": { "lr_tfi": { "N": 6, "alpha": 1.5 } }, "beta": { "re": 0.1 }, "m": 2 }));
    let out = Command::new(env!("CARGO_BIN_EXE_clusterx")).args(["exact", "--config"]).arg(&cfg).env("CLUSTERX_CAP", "16").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout_json(&out)["error"], json!("cap_exceeded"));
}

#[test]
fn general_estimate_with_colored_couplings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "g.json",
        &json!({ "model": { "lr_tfi": { "N": 4, "alpha": 1.5 } }, "lambdas": [{ "re": -1e-4 }, { "re": -2e-4 }], "orders": [2, 2] }),
    );
    let out = clusterx(&["compare"], Some(&cfg));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["certified"], json!(true));
    assert!(doc["abs_error"].as_f64().unwrap() <= doc["error_bound"].as_f64().unwrap());
}
