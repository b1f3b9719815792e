use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn svarsoft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svarsoft"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn run_config(dir: &Path, yaml: &str) -> Output {
    let path = dir.join("run.yaml");
    std::fs::write(&path, yaml).unwrap();
    svarsoft(&["run", "--config", path.to_str().unwrap()])
}

fn error_record(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("error.json")).unwrap()).unwrap()
}

#[test]
fn bivariate_demo_writes_schema_tagged_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        &format!(
            "mode: bivariate-demo\nseed: 1\nm: 500\ndelta: 1.0e-3\nrestrictions: {}\nbivariate: {{design: connected}}\n",
            fixtures().join("bivariate_connected.cfg").display()
        ),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let draws = std::fs::read_to_string(dir.path().join("out/theta_draws.csv")).unwrap();
    let mut lines = draws.lines();
    assert_eq!(lines.next(), Some("# svarsoft theta-draws v1"));
    assert_eq!(lines.next(), Some("record,index,theta,branch"));
    assert_eq!(lines.next(), Some("lower,0,-1.1071487177940904,rotation"));
    assert_eq!(lines.next(), Some("upper,0,-0.5880026035475675,rotation"));
    assert_eq!(lines.count(), 500);
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/run_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema"], "svarsoft run-summary v1");
    assert_eq!(summary["draws_outside_oracle"], 0);
    assert!(!dir.path().join("out/error.json").exists());
}

#[test]
fn nonpositive_delta_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "mode: bivariate-demo\ndelta: 0\nbivariate: {design: connected}\n");
    assert_eq!(out.status.code(), Some(2));
    let err = error_record(&dir.path().join("out"));
    assert_eq!(err["kind"], "config");
    assert_eq!(err["exit_code"], 2);
    assert!(err["message"].as_str().unwrap().contains("delta"));
}

#[test]
fn delta_override_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.yaml");
    std::fs::write(&path, "mode: bivariate-demo\nbivariate: {design: connected}\n").unwrap();
    let out = svarsoft(&["run", "--config", path.to_str().unwrap(), "--delta=-1"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(stderr["schema"], "svarsoft error v1");
}

#[test]
fn unknown_config_field_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "mode: standard\nsamplr: soft-sign\n");
    assert_eq!(out.status.code(), Some(2));
    let stderr: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(stderr["kind"], "schema");
}

#[test]
fn missing_config_file_is_an_input_error() {
    let out = svarsoft(&["run", "--config", "/nonexistent/run.yaml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_variable_in_restrictions_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(
        &cfg,
        "variables: [REA, PROD, RPO]\nshocks: [a, b, c]\nrestrictions:\n  - {kind: irf-sign, variable: GDP, shock: a, horizon: 0, sign: '+'}\n",
    )
    .unwrap();
    let out = run_config(
        dir.path(),
        &format!(
            "mode: standard\nrestrictions: {}\ndataset: {{path: {}}}\nlags: 2\n",
            cfg.display(),
            fixtures().join("synthetic_oil.csv").display()
        ),
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&dir.path().join("out"))["kind"], "unknown-variable");
}

#[test]
fn plausibility_floor_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.cfg");
    // η ≥ 100 on impact cannot hold for any Q at these data
    std::fs::write(
        &cfg,
        "variables: [REA, PROD, RPO]\nshocks: [a, b, c]\nrestrictions:\n  - {kind: irf-sign, variable: REA, shock: a, horizon: 0, sign: '+', threshold: 100}\n",
    )
    .unwrap();
    let out = run_config(
        dir.path(),
        &format!(
            "mode: standard\nrestrictions: {}\ndataset: {{path: {}}}\nlags: 2\nm: 20\nphi_kept: 5\nmax_phi_attempts: 20\n",
            cfg.display(),
            fixtures().join("synthetic_oil.csv").display()
        ),
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(error_record(&dir.path().join("out"))["kind"], "plausibility-floor");
}

#[test]
fn synth_writes_a_loadable_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("oil.csv");
    let out = svarsoft(&["synth", "--out", path.to_str().unwrap(), "--periods", "60", "--seed", "1"]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("date,REA,PROD,RPO\n1971-01,"));
    assert_eq!(text.lines().count(), 61);
    let fixture = std::fs::read_to_string(fixtures().join("synthetic_oil.csv")).unwrap();
    let full = svarsoft(&["synth", "--out", path.to_str().unwrap()]);
    assert!(full.status.success());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), fixture);
}
