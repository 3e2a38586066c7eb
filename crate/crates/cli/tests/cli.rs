//! Exit-code and output contract of the command-line interface.

use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_purposegraph");

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn extract(dir: &Path, out: &Path) -> std::process::Output {
    Command::new(BIN).arg("extract").arg(dir).arg("--out").arg(out).output().unwrap()
}

#[test]
fn empty_dir_extracts_root_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.json");
    let output = extract(dir.path(), &out);
    assert_eq!(output.status.code(), Some(0));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(value["policy"]["purposes"].as_array().unwrap().len(), 1);
    assert_eq!(value["stats"]["nControllers"], 0);
}

#[test]
fn broken_source_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.msvc"), "class A { void m( }").unwrap();
    let output = extract(dir.path(), &dir.path().join("result.json"));
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("bad.msvc:1:19"), "stderr: {stderr}");
}

#[test]
fn validate_flags_data_subset_mutation() {
    let text = std::fs::read_to_string(fixtures().join("webshop_policy.json")).unwrap();
    // give p2 a datum its parent p1.1 does not hold
    let mutated = text.replace("\"data\": [\"User.history\"]", "\"data\": [\"User.history\", \"Card.pan\"]");
    assert_ne!(text, mutated);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mutated.json");
    std::fs::write(&path, mutated).unwrap();
    let output = Command::new(BIN).arg("validate").arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let violations = report["violations"].as_array().unwrap();
    assert_eq!(violations.len(), 1);
    assert_eq!(violations[0]["rule"], "dataSubset");
}

#[test]
fn malformed_policy_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"version\": ").unwrap();
    let output = Command::new(BIN).arg("validate").arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn coverage_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.json");
    assert!(extract(&fixtures().join("account"), &out).status.success());

    // extraction result doubles as policy and service model; fully covered
    let ok = Command::new(BIN).arg("coverage").arg(&out).arg(&out).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let text = std::fs::read_to_string(&out).unwrap();

    // dropping a gov edge leaves a service ungoverned
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["gov"].as_array_mut().unwrap().pop();
    let ungoverned = dir.path().join("ungoverned.json");
    std::fs::write(&ungoverned, value.to_string()).unwrap();
    let output = Command::new(BIN).arg("coverage").arg(&out).arg(&ungoverned).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report["allGoverned"], false);

    // a gov edge to an unknown purpose is a reference error
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["gov"].as_array_mut().unwrap()[0]["purpose"] = "nope".into();
    let dangling = dir.path().join("dangling.json");
    std::fs::write(&dangling, value.to_string()).unwrap();
    let output = Command::new(BIN).arg("coverage").arg(&out).arg(&dangling).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn stats_handles_zero_services() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.json");
    assert!(extract(dir.path(), &out).status.success());
    // strip the root service and its gov edge
    let mut value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    value["services"] = serde_json::json!([]);
    value["gov"] = serde_json::json!([]);
    std::fs::write(&out, value.to_string()).unwrap();
    let output = Command::new(BIN).arg("stats").arg(&out).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let table = String::from_utf8(output.stdout).unwrap();
    assert!(table.contains("transparency ratio: n/a"), "{table}");
}

#[test]
fn stats_json_variant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.json");
    assert!(extract(&fixtures().join("account"), &out).status.success());
    let output = Command::new(BIN).arg("stats").arg(&out).arg("--json").output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(value["transparencyRatio"], 1.0);
    assert_eq!(value["ratioFlag"], true);
    assert_eq!(value["stats"]["nEndpoints"], 1);
}

#[test]
fn defaults_config_via_env_var() {
    let dir = tempfile::tempdir().unwrap();
    let defaults = dir.path().join("defaults.json");
    std::fs::write(
        &defaults,
        r#"{"optOut": true, "recipients": [{"name": "Corp", "kind": "processor"}]}"#,
    )
    .unwrap();
    let out = dir.path().join("result.json");
    let output = Command::new(BIN)
        .arg("extract")
        .arg(fixtures().join("account"))
        .arg("--out")
        .arg(&out)
        .env("PURPOSEGRAPH_DEFAULTS", &defaults)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let purpose = &value["policy"]["purposes"][0];
    assert_eq!(purpose["optOut"], true);
    assert_eq!(purpose["recipients"][0]["name"], "Corp");
    assert_eq!(purpose["recipients"][0]["kind"], "processor");
}

#[test]
fn strict_inheritance_flag_tightens_validation() {
    let text = std::fs::read_to_string(fixtures().join("webshop_policy.json")).unwrap();
    // p1.1 keeps less data than its hierarchy parent p1: fine by default,
    // a violation under strict inheritance when flipped the other way
    let mutated = text.replace(
        "\"id\": \"p1\",\n      \"name\": \"personalization\",\n      \"optOut\": false",
        "\"id\": \"p1\",\n      \"name\": \"personalization\",\n      \"optOut\": true",
    );
    assert_ne!(text, mutated);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("policy.json");
    std::fs::write(&path, &mutated).unwrap();
    let default_run = Command::new(BIN).arg("validate").arg(&path).output().unwrap();
    assert_eq!(default_run.status.code(), Some(0));
    let strict_run = Command::new(BIN)
        .args(["validate", "--strict-inheritance"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(strict_run.status.code(), Some(1));
}
