mod support;

use std::path::Path;
use std::process::{Command, Output};

fn tdcomp(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdcomp"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .expect("binary runs")
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"output_dir": "out", "data": {"synthetic": {"n": 10, "rows": 6, "cols": 4}}}"#).unwrap();
    let out = tdcomp(&["ingest"], &cfg);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_config_exits_2() {
    let out = tdcomp(&["all"], Path::new("/nonexistent/tdcomp.json"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stage_without_upstream_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mini.json");
    std::fs::write(&cfg, support::mini_config(&dir.path().join("out"))).unwrap();
    let out = tdcomp(&["solve"], &cfg);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn stages_run_one_at_a_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mini.json");
    std::fs::write(&cfg, support::mini_config(&dir.path().join("out"))).unwrap();
    for stage in [
        "ingest",
        "synthesize",
        "select",
        "build-pseudo",
        "augment",
        "decompose",
        "solve",
        "train-fusion",
        "verify",
        "evaluate",
        "report",
    ] {
        let out = tdcomp(&[stage], &cfg);
        assert!(out.status.success(), "{stage}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let report = std::fs::read_to_string(dir.path().join("out/report/report.txt")).unwrap();
    assert!(report.contains("verification accuracy"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report/report.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
}

#[test]
fn unknown_stage_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_tdcomp"))
        .args(["train", "--config", "x.json"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
