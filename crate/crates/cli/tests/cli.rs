use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zerofree(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zerofree"))
        .args(args)
        .current_dir(cwd)
        .env_remove("ZEROFREE_CONFIG")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn compute_degree_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = zerofree(&["compute", "--n", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out)["v"].as_f64().unwrap();
    assert!((v - 36.9199911).abs() <= 1e-6);
}

#[test]
fn compute_degree_seven_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = zerofree(&["compute", "--n", "7", "--grid", "501", "--seed", "7", "--out", "v7.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let value: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("v7.json")).unwrap()).unwrap();
    assert!((value["v"].as_f64().unwrap() - 34.6494874).abs() <= 1e-5);
    assert_eq!(value["seed"].as_u64(), Some(7));
}

#[test]
fn unsupported_degree_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = zerofree(&["compute", "--n", "9"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn sweep_degree_five() {
    let dir = tempfile::tempdir().unwrap();
    let out = zerofree(&["sweep", "--n", "5", "--grid", "201", "--csv", "out.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("a,chi,ratio,subproblem,certified"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 201);
    let min = rows.iter().filter(|r| r[4] == "true").map(|r| r[2].parse::<f64>().unwrap()).fold(f64::INFINITY, f64::min);
    // Nodes 7.8e-4 apart and a local curvature of 560 keep the grid minimum within 560·(3.9e-4)² ≈ 8.5e-5.
    assert!((34.8992259 - 1e-6..=34.8992259 + 1e-4).contains(&min), "{min}");
}

#[test]
fn sweep_subproblem_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = zerofree(&["sweep", "--n", "6", "--grid", "11", "--subproblems"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for id in 1..=4 {
        let table = fs::read_to_string(dir.path().join(format!("sweep_n6_sub{id}.csv"))).unwrap();
        assert!(table.starts_with("a,chi,ratio,feasible\n"));
        assert_eq!(table.lines().count(), 12);
    }
    assert!(!dir.path().join("sweep_n6_sub5.csv").exists());
}

#[test]
fn sweep_two_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = zerofree(&["sweep", "--n", "4", "--grid", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}

#[test]
fn verify_computed_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    for (n, expected) in [("4", 34.8992259), ("8", 34.5399155)] {
        let file = format!("v{n}.json");
        let out = zerofree(&["compute", "--n", n, "--grid", "201", "--out", &file], dir.path());
        assert_eq!(out.status.code(), Some(0));
        let out = zerofree(&["verify", &file], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let report = json(&out);
        assert_eq!(report["membership"]["in_class"], Value::Bool(true));
        let v = report["v"].as_f64().unwrap();
        assert!((v - expected).abs() <= 1e-6, "{v}");
        if n == "4" {
            assert!((report["R"].as_f64().unwrap() - 17.4496130).abs() <= 1e-6);
        }
    }
}

#[test]
fn verify_rejects_non_member() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.json"), r#"{"degree": 1, "coeffs": [1.0, 1.0]}"#).unwrap();
    let out = zerofree(&["verify", "p.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let report = json(&out);
    assert_eq!(report["membership"]["violated_conditions"][0], "A2-order-violation");
}

#[test]
fn verify_parse_failure() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), "not json").unwrap();
    assert_eq!(zerofree(&["verify", "bad.json"], dir.path()).status.code(), Some(1));
    assert_eq!(zerofree(&["verify", "missing.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn bounds_examples() {
    let dir = tempfile::tempdir().unwrap();
    for (n, upper, lo, hi) in [("8", "34.6494874", 1.6566924, 1.8191095), ("4", "36.9199911", 1.5597515, 1.7320508)] {
        let out = zerofree(&["bounds", "--n", n, "--upper", upper], dir.path());
        assert_eq!(out.status.code(), Some(0));
        let interval = &json(&out)["interval"];
        assert!((interval[0].as_f64().unwrap() - lo).abs() <= 1e-6);
        assert!((interval[1].as_f64().unwrap() - hi).abs() <= 1e-6);
    }
}

#[test]
fn audit_degree_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = zerofree(&["audit", "--n", "4", "--samples", "100000", "--grid", "201"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["points"].as_array().unwrap().len(), 5);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("settings.txt"), "seed = 9\ngrid = 5\n").unwrap();
    let out = zerofree(&["--config", "settings.txt", "sweep", "--n", "4"], dir.path());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 6);
    let out = zerofree(&["--config", "settings.txt", "sweep", "--n", "4", "--grid", "3"], dir.path());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);

    let out = Command::new(env!("CARGO_BIN_EXE_zerofree"))
        .args(["compute", "--n", "2"])
        .current_dir(dir.path())
        .env("ZEROFREE_CONFIG", dir.path().join("settings.txt"))
        .output()
        .unwrap();
    assert_eq!(json(&out)["seed"].as_u64(), Some(9));

    fs::write(dir.path().join("broken.txt"), "colour = red\n").unwrap();
    assert_eq!(zerofree(&["--config", "broken.txt", "compute", "--n", "2"], dir.path()).status.code(), Some(1));
}

#[test]
fn parallel_jobs_are_noted() {
    let dir = tempfile::tempdir().unwrap();
    let out = zerofree(&["compute", "--n", "4", "--grid", "21", "--jobs", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["warm_start"], Value::Bool(false));
}
