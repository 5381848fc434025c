use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn stretchlab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stretchlab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("STRETCHLAB_OUT")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn qubit_writes_report_and_sidecar() {
    let tmp = TempDir::new().unwrap();
    let out = stretchlab(tmp.path(), &["qubit", "--strength", "0.4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("qubit");
    let entries: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    let artifacts: Vec<_> = entries.iter().filter(|n| !n.ends_with(".meta.json")).collect();
    assert!(!artifacts.is_empty());
    for a in artifacts {
        let meta = json(&dir.join(format!("{a}.meta.json")));
        assert_eq!(meta["artifact"], a.as_str());
        assert_eq!(meta["command"], "qubit");
        assert_eq!(meta["config"]["params"]["strength"], 0.4);
    }
    assert!(!dir.join("failure.json").exists());
}

#[test]
fn runs_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for tmp in [&a, &b] {
        let out = stretchlab(tmp.path(), &["curves", "--points", "50", "--lambdas", "2,10"]);
        assert!(out.status.success());
    }
    for entry in fs::read_dir(a.path().join("curves")).unwrap() {
        let name = entry.unwrap().file_name();
        let x = fs::read(a.path().join("curves").join(&name)).unwrap();
        let y = fs::read(b.path().join("curves").join(&name)).unwrap();
        assert_eq!(x, y, "{name:?} differs between runs");
    }
}

#[test]
fn curves_csv_has_header_and_rows() {
    let tmp = TempDir::new().unwrap();
    assert!(stretchlab(tmp.path(), &["curves", "--points", "20"]).status.success());
    let csv = fs::read_dir(tmp.path().join("curves"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "csv"))
        .expect("a csv artifact");
    let text = fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("sigma"));
    assert_eq!(lines.count(), 20);
}

#[test]
fn invalid_configuration_exits_2() {
    let tmp = TempDir::new().unwrap();
    for args in [
        &["curves", "--sigma-min", "-1"][..],
        &["thermal", "--betas", "0.5,1.0,2.0"],
        &["qubit", "--strength", "1.5"],
        &["stretch-sweep", "--lambdas", "64", "--dim", "16"],
        &["moyal", "--n-corr", "3"],
        &["curves", "--hbar", "-1"],
    ] {
        let out = stretchlab(tmp.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn blackbody_checks_pass() {
    let tmp = TempDir::new().unwrap();
    let out = stretchlab(tmp.path(), &["blackbody", "--points", "40"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn injected_fault_fails_the_gate() {
    let tmp = TempDir::new().unwrap();
    let out = stretchlab(tmp.path(), &["verify-all", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    let failure = json(&tmp.path().join("verify-all").join("failure.json"));
    let failures = failure["failures"].as_array().unwrap();
    assert!(!failures.is_empty());
    assert!(failures.iter().any(|f| f["check"].as_str().unwrap().contains("entropy")));
}

#[test]
fn output_root_from_environment() {
    let tmp = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_stretchlab"))
        .args(["qubit", "--directions", "12"])
        .env("STRETCHLAB_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("qubit").is_dir());
}
