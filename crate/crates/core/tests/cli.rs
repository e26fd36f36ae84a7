use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_decaylab");

fn run(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("DECAYLAB_OUT");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

const GAUSSIAN: &str = r#"
[model]
id = "laplacian"
params = { n = 3 }
[state]
id = "gaussian_laplacian"
params = { n = 3 }
[grid]
start = 0.1
stop = 1e4
points = 200
[run]
tol = 1e-10
"#;

#[test]
fn catalog_lists_anchor_rows() {
    let a = run(&["catalog"], &[]);
    assert!(a.status.success());
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().any(|l| l == "dirac | θ(λ)=√(λ²−m²)/λ | Prop 7.7"));
    assert!(text.lines().any(|l| l == "P4.1 | guaranteed t^{−1}"));
    assert_eq!(text.as_bytes(), run(&["catalog"], &[]).stdout.as_slice());
}

#[test]
fn fit_writes_expected_exponent_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GAUSSIAN);
    let out = dir.path().join("out");
    let o = run(&["fit", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let fit = json(&out.join("fit.json"));
    // |ψ| = (1+t²)^{−3/4} decays like t^{−3/2}.
    assert!((fit["exponent"].as_f64().unwrap() - 1.5).abs() < 1e-3);
    assert_eq!(fit["expected_exponent"], 0.5);
    assert_eq!(fit["theorem"], "P4.3");
    let csv = std::fs::read_to_string(out.join("amplitudes.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,re,im,abs,err_est,flag"));
    assert_eq!(csv.lines().count(), 201);
    for name in ["report.json", "checks.json", "timing.json"] {
        assert!(out.join(name).exists(), "{name}");
    }
    assert_eq!(json(&out.join("report.json"))["status"], "PASS");
}

#[test]
fn reports_are_bit_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let body = GAUSSIAN.replace("tol = 1e-10", "tol = 1e-10\nchecks = [\"simulate\", \"fit\", \"bounds\", \"ineq\"]");
    let cfg = write_config(dir.path(), &body);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert!(run(&["check", "--config", &cfg, "--out", out.to_str().unwrap()], &[]).status.success());
    }
    for name in ["amplitudes.csv", "fit.json", "checks.json", "report.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn empty_check_list_reports_nothing_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GAUSSIAN);
    let out = dir.path().join("out");
    let o = run(&["check", "--config", &cfg, "--json"], &[("DECAYLAB_OUT", &out)]);
    assert_eq!(o.status.code(), Some(0));
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed["checks"].as_array().unwrap().len(), 0);
    assert_eq!(json(&out.join("report.json")), printed);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), &GAUSSIAN.replace("points = 200", "points = 4"));
    assert_eq!(run(&["fit", "--config", &bad], &[]).status.code(), Some(2));
    assert_eq!(run(&["fit"], &[]).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(run(&["fit", "--config", missing.to_str().unwrap()], &[]).status.code(), Some(3));
    let good = write_config(dir.path(), GAUSSIAN);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let under_file = blocker.join("out");
    assert_eq!(run(&["fit", "--config", &good, "--out", under_file.to_str().unwrap()], &[]).status.code(), Some(3));
    assert_eq!(run(&["fit", "--config", &good, "--tol", "0.5"], &[]).status.code(), Some(2));
}

#[test]
fn matrix_verb_uses_seed_and_env_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["matrix", "--seed", "9", "--json"], &[("DECAYLAB_OUT", dir.path())]);
    assert!(o.status.success());
    let rows: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rows.as_array().unwrap().iter().all(|r| r["seed"] == 9 && r["pass"] == true));
    assert_eq!(json(&dir.path().join("matrix.json")), rows);
}
