use std::f64::consts::LN_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dephtomo"))
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn dephasing() -> Value {
    serde_json::from_str(&fs::read_to_string(scenario_dir().join("dephasing.json")).unwrap()).unwrap()
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, serde_json::to_string(v).unwrap()).unwrap();
    path
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| v.to_string().parse().unwrap())
}

fn matrix(v: &Value) -> Vec<Vec<(f64, f64)>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|row| row.as_array().unwrap().iter().map(|z| (num(&z[0]), num(&z[1]))).collect())
        .collect()
}

fn distance(a: &[Vec<(f64, f64)>], b: &[Vec<(f64, f64)>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x.0 - y.0).powi(2) + (x.1 - y.1).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn example_state() -> Vec<Vec<(f64, f64)>> {
    vec![vec![(0.6, 0.0), (0.1, -0.2)], vec![(0.1, 0.2), (0.4, 0.0)]]
}

#[test]
fn validate_accepts_dephasing() {
    let path = scenario_dir().join("dephasing.json");
    let o = exec(&["validate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json_out(&o)["all_ok"], Value::Bool(true));
}

#[test]
fn validate_rejects_bad_initial_condition() {
    let dir = TempDir::new().unwrap();
    let mut s = dephasing();
    s["channel"]["damping_model"]["decomposition"]["basis"][1] = serde_json::json!([[[0, 0], [2, 0]], [[2, 0], [0, 0]]]);
    let path = write(&dir, "bad.json", &s);
    let o = exec(&["validate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let v = json_out(&o);
    assert_eq!(v["init_ok"], Value::Bool(false));
    assert_eq!(v["all_ok"], Value::Bool(false));
}

#[test]
fn malformed_or_missing_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{\"name\": ").unwrap();
    assert_eq!(code(&exec(&["validate", "--scenario", path.to_str().unwrap()])), 2);
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&exec(&["run", "--scenario", missing.to_str().unwrap()])), 2);
    let mut s = dephasing();
    s["channel"]["lindblad"] = Value::Null;
    let two_channels = write(&dir, "two.json", &s);
    assert_eq!(code(&exec(&["validate", "--scenario", two_channels.to_str().unwrap()])), 2);
    assert_eq!(code(&exec(&["demo-dephasing", "--gamma", "x", "--t", "1"])), 2);
}

#[test]
fn decompose_reports_mu() {
    let path = scenario_dir().join("dephasing.json");
    let o = exec(&["decompose", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(json_out(&o)["mu"], 2);

    let dir = TempDir::new().unwrap();
    let mut s = dephasing();
    let ones = serde_json::json!([[[1, 0], [1, 0]], [[1, 0], [1, 0]]]);
    s["channel"] = serde_json::json!({ "damping_model": { "samples": [
        { "t": 0.0, "matrix": ones }, { "t": 1.0, "matrix": ones }, { "t": 2.0, "matrix": ones }
    ] } });
    s["candidate_times"] = serde_json::json!([0.0, 0.5, 1.0, 1.5, 2.0]);
    let path = write(&dir, "identity.json", &s);
    let o = exec(&["decompose", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json_out(&o)["mu"], 1);
}

#[test]
fn decompose_names_undersampled_time() {
    let dir = TempDir::new().unwrap();
    let mut s = dephasing();
    s["candidate_times"] = serde_json::json!([0.0]);
    s["validation_grid"] = serde_json::json!([0.0, 0.5, 1.0]);
    let path = write(&dir, "under.json", &s);
    let o = exec(&["decompose", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("t = 5.0000000000000000e-1"), "{err}");
}

#[test]
fn run_recovers_example_state() {
    let dir = TempDir::new().unwrap();
    let (csv, report) = (dir.path().join("r.csv"), dir.path().join("r.json"));
    let path = scenario_dir().join("dephasing.json");
    let o = exec(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--record-out",
        csv.to_str().unwrap(),
        "--report-out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(num(&v["frobenius_error"]) <= 1e-10);
    assert!(distance(&matrix(&v["reconstruction"]["state"]), &example_state()) <= 1e-10);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,Q1,Q2"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((first[1] - 0.2).abs() < 1e-15 && (first[2] - 0.6).abs() < 1e-15);
}

#[test]
fn run_is_deterministic_with_noise() {
    let dir = TempDir::new().unwrap();
    let mut s = dephasing();
    s["noise_sigma"] = serde_json::json!(1e-3);
    s["seed"] = serde_json::json!(42);
    let path = write(&dir, "noisy.json", &s);
    let mut outputs = Vec::new();
    for k in 0..2 {
        let (csv, report) = (dir.path().join(format!("r{k}.csv")), dir.path().join(format!("r{k}.json")));
        let o = exec(&[
            "run",
            "--scenario",
            path.to_str().unwrap(),
            "--record-out",
            csv.to_str().unwrap(),
            "--report-out",
            report.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        outputs.push((fs::read(&csv).unwrap(), fs::read(&report).unwrap(), o.stdout));
    }
    assert_eq!(outputs[0], outputs[1]);
    let v: Value = serde_json::from_slice(&outputs[0].1).unwrap();
    let err = num(&v["frobenius_error"]);
    assert!(err > 0.0 && err < 1e-2, "{err}");
}

#[test]
fn run_reports_incomplete_frame() {
    let dir = TempDir::new().unwrap();
    let mut s = dephasing();
    s["observables"].as_array_mut().unwrap().truncate(1);
    let path = write(&dir, "s1.json", &s);
    let o = exec(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("deficit 2"), "{err}");
}

#[test]
fn run_reads_record_file() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("measured.csv");
    let path = scenario_dir().join("dephasing.json");
    assert_eq!(code(&exec(&["run", "--scenario", path.to_str().unwrap(), "--record-out", csv.to_str().unwrap()])), 0);
    let mut s = dephasing();
    s.as_object_mut().unwrap().remove("true_state");
    s["record"] = Value::String("measured.csv".into());
    let path = write(&dir, "from_file.json", &s);
    let o = exec(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_out(&o);
    assert!(v["frobenius_error"].is_null());
    assert!(distance(&matrix(&v["reconstruction"]["state"]), &example_state()) <= 1e-10);
}

#[test]
fn run_pure_decoherence_auto_grid() {
    let path = scenario_dir().join("qutrit_pure_decoherence.json");
    let o = exec(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_out(&o);
    assert!(num(&v["frobenius_error"]) <= 1e-8);
    assert_eq!(v["grid"].as_array().unwrap().len() as u64, v["mu"].as_u64().unwrap());
}

#[test]
fn demo_matches_hand_values() {
    let t = LN_2.to_string();
    let o = exec(&["demo-dephasing", "--gamma", "1", "--t", &t, "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_out(&o);
    // Tr σ₃ρ = 0.6 - 0.4, Tr σ₂ρ = 2 Im ρ₂₁
    assert!((num(&v["projections"]["tr_sigma3_rho"]) - 0.2).abs() <= 1e-12);
    assert!((num(&v["projections"]["tr_sigma2_rho"]) - 0.4).abs() <= 1e-12);
    assert!(distance(&matrix(&v["state"]), &example_state()) <= 1e-12);
    assert!(v["warnings"].as_array().unwrap().is_empty());

    let text = exec(&["demo-dephasing", "--gamma", "1", "--t", &t]);
    assert_eq!(code(&text), 0);
    assert!(String::from_utf8_lossy(&text.stdout).contains("Tr(sigma_2 rho)"));
}

#[test]
fn demo_edge_cases() {
    let o = exec(&["demo-dephasing", "--gamma", "1", "--t", "0"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("division-degenerate"));

    let o = exec(&["demo-dephasing", "--gamma", "1", "--t", "50"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn run_agrees_with_demo() {
    let path = scenario_dir().join("dephasing.json");
    let run = json_out(&exec(&["run", "--scenario", path.to_str().unwrap()]));
    let demo = json_out(&exec(&["demo-dephasing", "--gamma", "1", "--t", &LN_2.to_string(), "--json"]));
    let gap = distance(&matrix(&run["reconstruction"]["state"]), &matrix(&demo["state"]));
    assert!(gap <= 1e-10, "{gap}");
}
