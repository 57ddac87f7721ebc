//! End-to-end tests of the `shubin` binary: exit codes, result files and
//! determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

const IDENTITY: &str =
    r#"{"n": 1, "components": [{"degree": [0, 0], "terms": [{"coeff": [[[1, 0]]], "beta": [0], "alpha": [0]}]}]}"#;
const HO: &str = r#"{"n": 1, "exact": "ho"}"#;
const INVERSE_SQUARE: &str =
    r#"{"n": 1, "exact": {"name": "shifted_quadratic_power", "s": [-2, 0], "shift": 1, "scale": 1}}"#;

struct Run {
    code: i32,
    result: Value,
    csv: Option<String>,
}

fn symbol_file(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn run(dir: &Path, prefix: &str, args: &[&str]) -> Run {
    let out = dir.join(prefix);
    let status = Command::new(env!("CARGO_BIN_EXE_shubin"))
        .arg("--output")
        .arg(&out)
        .args(args)
        .env("SHUBIN_THREADS", "2")
        .output()
        .unwrap();
    let read = |suffix: &str| std::fs::read_to_string(format!("{}{suffix}", out.display())).ok();
    Run {
        code: status.status.code().unwrap(),
        result: serde_json::from_str(&read(".result.json").expect("result file")).unwrap(),
        csv: read(".samples.csv"),
    }
}

#[test]
fn residue_of_identity() {
    let dir = tempfile::tempdir().unwrap();
    let sym = symbol_file(dir.path(), "identity.json", IDENTITY);
    let r = run(dir.path(), "res", &["residue", "--symbol", sym.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    assert_eq!(r.result["value"], serde_json::json!([0.0, 0.0]));
    assert!(r.result["wall_time"].is_null());
    assert_eq!(r.result["config_echo"]["command"], "residue");
}

#[test]
fn kv_tr_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let sym = symbol_file(dir.path(), "inv.json", INVERSE_SQUARE);
    let args = ["kv", "--symbol", sym.to_str().unwrap()];
    let a = run(dir.path(), "a", &args);
    run(dir.path(), "b", &args);
    assert_eq!(a.code, 0);
    let v = a.result["value"][0].as_f64().unwrap();
    assert!((v - 0.5).abs() < 1e-8, "TR = {v}");
    assert_eq!(
        std::fs::read(dir.path().join("a.result.json")).unwrap(),
        std::fs::read(dir.path().join("b.result.json")).unwrap()
    );
}

#[test]
fn oracle_zeta_writes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let sym = symbol_file(dir.path(), "ho.json", HO);
    let r = run(dir.path(), "o", &["oracle", "--symbol", sym.to_str().unwrap(), "--zeta", "2", "3"]);
    assert_eq!(r.code, 0);
    let csv = r.csv.expect("samples file");
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3, "{csv}");
    let first: f64 = rows[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!((first - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-10, "{csv}");
}

#[test]
fn record_time_fills_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let sym = symbol_file(dir.path(), "identity.json", IDENTITY);
    let r = run(dir.path(), "t", &["--record-time", "residue", "--symbol", sym.to_str().unwrap()]);
    assert!(r.result["wall_time"].as_f64().unwrap() >= 0.0);
}

#[test]
fn invalid_symbol_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let sym = symbol_file(dir.path(), "bad.json", r#"{"n": 1, "exact": "diag_ho"}"#);
    let r = run(dir.path(), "bad", &["residue", "--symbol", sym.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.result["value"].is_null());
    assert!(r.result["error"]["code"].is_string());
}

#[test]
fn missing_symbol_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(dir.path(), "m", &["residue", "--symbol", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(r.code, 2);
}

#[test]
fn zeta_at_pole_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let sym = symbol_file(dir.path(), "ho.json", HO);
    let r = run(dir.path(), "p", &["zeta", "--grid", "64", "--symbol", sym.to_str().unwrap(), "--z", "1"]);
    assert_eq!(r.code, 3, "{}", r.result);
    assert_eq!(r.result["error"]["code"], "pole_point");
}

#[test]
fn unknown_suite_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(dir.path(), "v", &["verify", "--suite", "nope"]);
    assert_eq!(r.code, 2);
}

#[test]
fn calculus_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(dir.path(), "v", &["verify", "--suite", "calculus"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.result["value"], true);
}
