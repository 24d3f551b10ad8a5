use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_onesided-lab"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run_config(path: &Path, out: &Path) -> Output {
    bin().arg("run").arg(path).arg("--out").arg(out).output().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn class_constant_of_constant_weight() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_config(&config("class-constant.json"), tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(tmp.path());
    let v = r["result"]["estimate"]["value"].as_f64().unwrap();
    assert!((v - 0.25).abs() <= 1e-4 * 0.25, "{v}");
    assert!(tmp.path().join("manifest.json").exists());
    assert!(tmp.path().join("ladder.csv").exists());
}

#[test]
fn p_equal_one_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_config(&config("class-constant-invalid.json"), tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1 < p"), "{err}");
    assert!(!tmp.path().join("report.json").exists());
}

#[test]
fn counterexample_reports_violation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_config(&config("counterexample.json"), tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(tmp.path().join("report.json")).unwrap();
    assert!(text.contains("violates A_p^+ necessary condition"));
}

#[test]
fn describe_unknown_experiment() {
    let out = bin().args(["describe", "bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["describe", "gap-check"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("ungapped_max"));
}

#[test]
fn failed_assertion_still_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(
        tmp.path(),
        r#"{"experiment": "class-constant", "weight": {"kind": "const", "value": 1},
            "class": "Ap+", "p": 2, "expect": {"value": 0.3}}"#,
    );
    let out_dir = tmp.path().join("out");
    let out = run_config(&path, &out_dir);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out_dir)["pass"], Value::Bool(false));
    assert!(out_dir.join("manifest.json").exists());
}

#[test]
fn config_hash_ignores_formatting_and_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write_config(tmp.path(), r#"{"experiment":"class-constant","weight":{"kind":"const","value":1},"class":"Ap+","p":2}"#);
    let a_out = tmp.path().join("a");
    run_config(&a, &a_out);
    let b = write_config(
        tmp.path(),
        r#"{ "p": 2, "class": "Ap+", "output_dir": "elsewhere",
             "weight": { "value": 1, "kind": "const" }, "experiment": "class-constant" }"#,
    );
    let b_out = tmp.path().join("b");
    run_config(&b, &b_out);
    assert_eq!(report(&a_out)["config_hash"], report(&b_out)["config_hash"]);
    assert_eq!(
        std::fs::read(a_out.join("report.json")).unwrap(),
        std::fs::read(b_out.join("report.json")).unwrap()
    );
}

#[test]
fn unknown_fields_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(
        tmp.path(),
        r#"{"experiment": "class-constant", "weight": {"kind": "const", "value": 1},
            "class": "Ap+", "p": 2, "tolerance": 1}"#,
    );
    let out = bin().arg("validate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().arg("validate").arg(config("interpolate.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
