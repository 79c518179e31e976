use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn qhgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhgeo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMOKE: &str = r#"{"seed": 0, "experiments": [
    {"name": "rotation", "theorem": "remark_rotation", "sample": {"count": 1000}},
    {"name": "puncture", "theorem": "remark_puncture", "m_max": 100}
]}"#;

#[test]
fn validate_reports_ok_and_errors() {
    let dir = TempDir::new().unwrap();
    let ok = write_config(dir.path(), "ok.json", SMOKE);
    let out = qhgeo(&["validate", s(&ok)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("2 experiment(s)"));

    let typo = write_config(
        dir.path(),
        "typo.json",
        r#"{"experiments": [{"name": "t", "theorem": "thm1",
            "domain": {"kind": "annulus", "inner": 0.5, "outer": 1.0},
            "map": {"kind": "rotatoin", "angle": 1.0}}]}"#,
    );
    let out = qhgeo(&["validate", s(&typo)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("UnknownKind at experiments[0].map"), "{err}");
    assert!(err.contains("rotatoin"), "{err}");

    let eps = write_config(
        dir.path(),
        "eps.json",
        r#"{"experiments": [{"name": "l", "theorem": "lemma212_suite",
            "domain": {"kind": "ball"}, "epsilon": [0.0]}]}"#,
    );
    let out = qhgeo(&["validate", s(&eps)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("SchemaError at experiments[0].epsilon[0]"), "{err}");

    let out = qhgeo(&["validate", s(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("file not found"));
}

#[test]
fn run_writes_replayable_reports_idempotently() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "smoke.json", SMOKE);
    let out_dir = dir.path().join("out");
    let out = qhgeo(&["run", s(&cfg), "--out", s(&out_dir), "--jobs", "2", "--plots"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let mut files: Vec<String> = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(
        files,
        [
            "puncture.csv",
            "puncture.json",
            "puncture.svg",
            "rotation.csv",
            "rotation.json",
            "rotation.svg",
            "run.log"
        ]
    );
    let svg = fs::read_to_string(out_dir.join("rotation.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    let csv = fs::read_to_string(out_dir.join("puncture.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("experiment,series,index,x,fx,j,k,aux"));

    let first: Vec<Vec<u8>> = ["rotation.json", "rotation.csv", "puncture.json", "puncture.csv"]
        .iter()
        .map(|f| fs::read(out_dir.join(f)).unwrap())
        .collect();
    let out = qhgeo(&["run", s(&cfg), "--out", s(&out_dir), "--jobs", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let second: Vec<Vec<u8>> = ["rotation.json", "rotation.csv", "puncture.json", "puncture.csv"]
        .iter()
        .map(|f| fs::read(out_dir.join(f)).unwrap())
        .collect();
    assert_eq!(first, second);

    for f in ["rotation.json", "puncture.json"] {
        let out = qhgeo(&["replay-check", s(&out_dir.join(f))]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn replay_check_catches_tampering() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.json",
        r#"{"experiments": [{"name": "puncture", "theorem": "remark_puncture"}]}"#,
    );
    let out_dir = dir.path().join("out");
    assert_eq!(qhgeo(&["run", s(&cfg), "--out", s(&out_dir)]).status.code(), Some(0));
    let path = out_dir.join("puncture.json");
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    v["records"][10]["j"] = serde_json::json!(0.0);
    fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let out = qhgeo(&["replay-check", s(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stdout.is_empty());

    fs::write(&path, "{}").unwrap();
    assert_eq!(qhgeo(&["replay-check", s(&path)]).status.code(), Some(2));
}

#[test]
fn zero_tolerance_forces_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "f.json",
        r#"{"experiments": [{"name": "rot", "theorem": "remark_rotation",
            "tolerances": {"exactness": 0.0}}]}"#,
    );
    let out_dir = dir.path().join("out");
    let out = qhgeo(&["run", s(&cfg), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("rot: FAIL"), "{text}");
    // the report is written regardless
    assert!(out_dir.join("rot.json").exists());
}

#[test]
fn unwritable_output_is_an_infrastructure_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "smoke.json", SMOKE);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = qhgeo(&["run", s(&cfg), "--out", s(&blocker.join("sub"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = qhgeo(&["run", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
}
