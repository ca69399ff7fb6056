use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn tool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectral-topos"))
        .args(args)
        .env_remove("SPECTRAL_TOPOS_TOL")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn contexts_writes_csv_dot_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = fixture("qutrit_demo.json");
    let out = tool(&["contexts", "--scenario", path_str(&scenario), "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let dot = fs::read_to_string(dir.path().join("hasse.dot")).unwrap();
    assert_eq!(dot.matches("->").count(), 1);
    assert!(dir.path().join("contexts.csv").exists());
    let report = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains("\"input_digest\""));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let scenario = fixture("qubit_demo.json");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = tool(&["evolve", "--scenario", path_str(&scenario), "--out", path_str(dir.path())]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["evolve.csv", "evolve_minima.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let qubit = fixture("qubit_demo.json");
    let q = path_str(&qubit);
    assert_eq!(tool(&["check", "--scenario", q, "--check", "compat"]).status.code(), Some(0));
    assert_eq!(tool(&["check", "--scenario", q, "--check", "flow-identity"]).status.code(), Some(0));
    assert_eq!(tool(&["ks", "--scenario", q]).status.code(), Some(0));

    let corrupted = fixture("corrupted_axioms.json");
    let out = tool(&["check", "--scenario", path_str(&corrupted), "--check", "axioms"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));

    let cabello = fixture("cabello18.json");
    let out = tool(&["ks", "--scenario", path_str(&cabello)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("NO-SECTION"));
    assert_eq!(tool(&["ks", "--scenario", path_str(&cabello), "--budget", "5"]).status.code(), Some(3));

    assert_eq!(tool(&["contexts", "--scenario", "/nonexistent/scenario.json"]).status.code(), Some(2));
    assert_eq!(tool(&["daseinise", "--scenario", q, "--proposition", "missing"]).status.code(), Some(2));
}

#[test]
fn invalid_scenario_reports_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("qubit_demo.json")).unwrap().replace(r#"[["Z"], ["X"]]"#, "[]");
    let path = dir.path().join("bad.json");
    fs::write(&path, text).unwrap();
    let out = tool(&["contexts", "--scenario", path_str(&path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("context_seeds"));
}

#[test]
fn tolerance_comes_from_the_environment() {
    let corrupted = fixture("corrupted_axioms.json");
    let out = Command::new(env!("CARGO_BIN_EXE_spectral-topos"))
        .args(["check", "--scenario", path_str(&corrupted), "--check", "axioms"])
        .env("SPECTRAL_TOPOS_TOL", "0.5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn tables_go_to_stdout_without_out_dir() {
    let qubit = fixture("qubit_demo.json");
    let out = tool(&["daseinise", "--scenario", path_str(&qubit), "--proposition", "plus"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# daseinise.csv"));
    assert!(text.contains("proposition,context,id,blocks,rank"));
}
