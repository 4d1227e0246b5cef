use std::fs;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convex-bandit")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bound_prints_the_one_dimensional_bound() {
    let o = cli(&["bound", "--T", "100000", "--sigma", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let value: f64 = stdout(&o).trim().parse().unwrap();
    assert!((value - 1183698.1911485502).abs() < 1e-6 * value);
}

#[test]
fn bound_outside_its_domain_is_an_input_error() {
    let o = cli(&["bound", "--T", "3", "--sigma", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(cli(&["run", "--algorithm", "3d"]).status.code(), Some(1));
    assert_eq!(cli(&["run"]).status.code(), Some(1));
    assert_eq!(cli(&["run", "--algorithm", "nd", "--mode", "theory", "--c2", "0.5"]).status.code(), Some(1));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn run_writes_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cli(&["run", "--algorithm", "1d", "--T", "20000", "--seeds", "1,2", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("regret bound"));
    for name in ["trace_seed1.csv", "trace_seed2.csv", "events_seed1.json", "summary.json"] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seeds"].as_array().unwrap().len(), 2);
}

#[test]
fn run_reads_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.toml");
    fs::write(
        &path,
        "algorithm = \"nd\"\nd = 2\nT = 5000\nsigma = 0.05\nseeds = [0]\n\n[function]\nkind = \"piecewise-linear-nd\"\nminimizer = [0.1, 0.2]\nslope = 1.0\n",
    )
    .unwrap();
    let o = cli(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("epoch bound"));
}

#[test]
fn missing_config_file_is_a_runtime_error() {
    assert_eq!(cli(&["run", "--config", "/nonexistent/exp.toml"]).status.code(), Some(2));
}

#[test]
fn verify_geometry_reports_json() {
    let o = cli(&["verify-geometry", "--d", "2", "--trials", "10", "--samples", "500"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["cap_violations"].as_u64(), Some(0));
}
