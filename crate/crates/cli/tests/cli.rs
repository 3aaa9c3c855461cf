use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bellscope(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellscope"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("BELLSCOPE_JOBS")
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path, command: &str) -> Value {
    let text = fs::read_to_string(dir.join(format!("{command}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn sign_ghz_headline() {
    let dir = TempDir::new().unwrap();
    let out = bellscope(dir.path(), &["sign-ghz", "--m", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path(), "sign-ghz");
    let b = s["headline"]["bell_factor"].as_f64().unwrap();
    assert!((b - 2.0318).abs() < 1e-4);
    for key in ["command", "inputs", "headline", "tolerances", "rows", "csv_file", "wall_time_s"] {
        assert!(s.get(key).is_some(), "missing {key}");
    }
    let csv = fs::read_to_string(dir.path().join("sign-ghz.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("m,bell_factor,closed_form,violates"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn csv_is_deterministic_across_worker_counts() {
    let args = ["noise-sweep", "--m", "3:5", "--p", "0:0.3:0.05"];
    let mut tables = Vec::new();
    for jobs in ["1", "4", "4"] {
        let dir = TempDir::new().unwrap();
        let mut full = args.to_vec();
        full.extend(["--jobs", jobs]);
        let out = bellscope(dir.path(), &full);
        assert_eq!(out.status.code(), Some(0));
        tables.push(fs::read(dir.path().join("noise-sweep.csv")).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
    assert_eq!(tables[1], tables[2]);
}

#[test]
fn psi3_curve_is_deterministic_and_crosses() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["psi3-curve", "--alpha", "0.5:2:0.25"];
    assert_eq!(bellscope(a.path(), &[&args[..], &["--jobs", "1"]].concat()).status.code(), Some(0));
    assert_eq!(bellscope(b.path(), &[&args[..], &["--jobs", "3"]].concat()).status.code(), Some(0));
    let ca = fs::read(a.path().join("psi3-curve.csv")).unwrap();
    assert_eq!(ca, fs::read(b.path().join("psi3-curve.csv")).unwrap());
    let crossing = summary(a.path(), "psi3-curve")["headline"]["crossing_alpha"].as_f64().unwrap();
    assert!((0.75..1.5).contains(&crossing));
}

#[test]
fn root_max_reaches_quantum_bound() {
    let dir = TempDir::new().unwrap();
    assert_eq!(bellscope(dir.path(), &["root-max", "--m", "3"]).status.code(), Some(0));
    let s = summary(dir.path(), "root-max");
    let b = s["headline"]["bell_factor_by_m"][0]["bell_factor"].as_f64().unwrap();
    assert!((b - 4.0).abs() < 1e-9);
}

#[test]
fn sign_optimize_reports_convergence() {
    let dir = TempDir::new().unwrap();
    let out = bellscope(dir.path(), &["sign-optimize", "--m", "3", "--d", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let h = &summary(dir.path(), "sign-optimize")["headline"];
    assert!(h["bell"].as_f64().unwrap() > 2.2);
    assert!(h["converged"].as_bool().unwrap());
}

#[test]
fn prep_fidelity_with_fixed_conditioning() {
    let dir = TempDir::new().unwrap();
    let out = bellscope(dir.path(), &["prep-fidelity", "--alpha", "3", "--x0", "-4.242640687"]);
    assert_eq!(out.status.code(), Some(0));
    let p = &summary(dir.path(), "prep-fidelity")["headline"]["points"][0];
    assert!(p["fidelity"].as_f64().unwrap() > 0.9999);
    assert!((p["fidelity"].as_f64().unwrap() - p["alternate_fidelity"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn configuration_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["psi3-curve", "--alpha", "0"][..],
        &["cat-vw", "--alpha", "-1"],
        &["noise-sweep", "--p", "0:2:0.5"],
        &["sign-ghz", "--m", "1"],
        &["sign-ghz", "--m", "3:x"],
        &["sign-ghz", "--tol", "-1"],
        &["sign-optimize", "--d", "1"],
        &["root-max", "--labeling", "diagonal"],
        &["no-such-command"],
    ] {
        let out = bellscope(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn numerical_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    let out = bellscope(dir.path(), &["prep-fidelity", "--alpha", "3", "--x0", "1000"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical failure"));
}
