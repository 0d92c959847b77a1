mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use kuranet::config::RunConfig;
use kuranet::diagnostics::{energy_e1, energy_e2};
use kuranet::{ModelParams, OscState};
use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kuranet"))
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = bin().args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Complete graph on 5 vertices with D0 = 1.2; K = 800 lies inside the sufficient regime.
fn feasible() -> Value {
    let k: f64 = 800.0;
    json!({
        "graph": {"kind": "complete", "n": 5},
        "params": {"m": 1.0 / (k * k), "K": k, "alpha": 1.0 / (k * k),
                   "omega_natural": {"kind": "uniform", "low": -5e-4, "high": 5e-4, "seed": 1}},
        "initial": {"theta": {"kind": "uniform", "low": -0.05, "high": 0.05, "seed": 2},
                    "omega": [0, 0, 0, 0, 0]},
        "thresholds": {"d0": 1.2, "d_inf": 1.0}
    })
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&["check", "--config", s(&write(dir.path(), "ok.json", &feasible()))]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    let report: Value = serde_json::from_str(&ok.stdout).unwrap();
    assert_eq!(report["all_hold"], true);
    assert_eq!(report["conditions"].as_array().unwrap().len(), 9);

    let mut heavy = feasible();
    heavy["params"]["m"] = json!(1.0);
    let r = run(&["check", "--config", s(&write(dir.path(), "m1.json", &heavy))]);
    assert_eq!(r.code, 2);
    let report: Value = serde_json::from_str(&r.stdout).unwrap();
    let inertia = report["conditions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["id"] == "c2" && c["clause"] == "inertia")
        .unwrap();
    assert_eq!(inertia["holds"], false);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"graph\": ").unwrap();
    let r = run(&["check", "--config", s(&bad)]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.is_empty() && !r.stderr.is_empty());

    let r = run(&["check", "--config", s(&dir.path().join("missing.json"))]);
    assert_eq!(r.code, 1);
}

#[test]
fn missing_seed_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = feasible();
    cfg["initial"]["theta"] = json!({"kind": "uniform", "low": -0.05, "high": 0.05});
    let r = run(&["check", "--config", s(&write(dir.path(), "c.json", &cfg))]);
    assert_eq!(r.code, 1);
}

#[test]
fn simulate_full_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write(dir.path(), "c.json", &feasible());
    let out = dir.path().join("full.csv");
    let r = run(&["simulate", "--config", s(&cfg_path), "--out", s(&out), "--observables", "full"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let (header, rows) = parse_csv(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(header[..5], ["t", "d_theta", "d_omega", "e1", "e2"]);
    assert_eq!(header[5], "theta_1");
    assert_eq!(header[14], "omega_5");
    assert!(rows.len() > 100);

    let cfg = RunConfig::from_json(&feasible().to_string()).unwrap();
    let inst = cfg.instance().unwrap();
    let params: &ModelParams = &inst.params;
    for row in &rows {
        let theta = row[5..10].to_vec();
        let omega = row[10..15].to_vec();
        let state = OscState::new(theta.clone(), omega.clone()).unwrap();
        let d = theta.iter().cloned().fold(f64::MIN, f64::max) - theta.iter().cloned().fold(f64::MAX, f64::min);
        assert!(common::rel_err(row[1], d) <= 1e-12);
        let e1 = energy_e1(&state, params).unwrap();
        let e2 = energy_e2(&state, params, &inst.graph).unwrap();
        assert!(common::rel_err(row[3], e1) <= 1e-12, "{} {}", row[3], e1);
        assert!(common::rel_err(row[4], e2) <= 1e-12, "{} {}", row[4], e2);
    }

    let diag = dir.path().join("diag.csv");
    assert_eq!(run(&["simulate", "--config", s(&cfg_path), "--out", s(&diag)]).code, 0);
    let (dh, drows) = parse_csv(&std::fs::read_to_string(&diag).unwrap());
    assert_eq!(dh, ["t", "d_theta", "d_omega", "e1", "e2"]);
    for (a, b) in drows.iter().zip(&rows) {
        assert_eq!(a[..], b[..5]);
    }
}

#[test]
fn simulate_is_bytewise_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write(dir.path(), "c.json", &feasible());
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        assert_eq!(run(&["simulate", "--config", s(&cfg_path), "--out", s(out), "--observables", "full"]).code, 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn degenerate_simulations() {
    let dir = tempfile::tempdir().unwrap();
    let single = json!({
        "graph": {"kind": "complete", "n": 1},
        "params": {"m": 0.5, "K": 1.0, "alpha": 0.1, "omega_natural": [0.7]},
        "initial": {"theta": [0.2], "omega": [0.0]},
        "integration": {"dt": 0.01, "t_max": 1.0, "sample_every": 10}
    });
    let out = dir.path().join("one.csv");
    assert_eq!(run(&["simulate", "--config", s(&write(dir.path(), "one.json", &single)), "--out", s(&out)]).code, 0);
    let (_, rows) = parse_csv(&std::fs::read_to_string(&out).unwrap());
    assert!(rows.iter().all(|r| r[1] == 0.0));

    let same = json!({
        "graph": {"kind": "ring", "n": 4},
        "params": {"m": 0.5, "K": 1.0, "alpha": 0.1, "omega_natural": [0.3, 0.3, 0.3, 0.3]},
        "initial": {"theta": [1.0, 1.0, 1.0, 1.0], "omega": [0.2, 0.2, 0.2, 0.2]},
        "integration": {"dt": 0.01, "t_max": 1.0}
    });
    let out = dir.path().join("same.csv");
    assert_eq!(run(&["simulate", "--config", s(&write(dir.path(), "same.json", &same)), "--out", s(&out)]).code, 0);
    let (_, rows) = parse_csv(&std::fs::read_to_string(&out).unwrap());
    assert!(rows.iter().all(|r| r[2] == 0.0));
}

#[test]
fn simulate_blowup_is_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "graph": {"kind": "complete", "n": 2},
        "params": {"m": 1e-3, "K": 1.0, "alpha": 0.1, "omega_natural": [0.0, 0.0]},
        "initial": {"theta": [0.0, 1.0], "omega": [0.0, 0.0]},
        "integration": {"dt": 1.0, "t_max": 1000.0}
    });
    let out = dir.path().join("x.csv");
    let r = run(&["simulate", "--config", s(&write(dir.path(), "x.json", &cfg)), "--out", s(&out)]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(!out.exists());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let r = run(&["verify", "--config", s(&write(dir.path(), "ok.json", &feasible())), "--out", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for key in ["phase_trap_ok", "e1_bounded_ok", "e1_gronwall_ok", "e2_decay_ok", "rate_ok"] {
        assert_eq!(report[key], true, "{key}");
    }

    let mut weak = feasible();
    weak["params"]["K"] = json!(50.0);
    weak["params"]["m"] = json!(1e-4);
    let r = run(&["verify", "--config", s(&write(dir.path(), "weak.json", &weak)), "--out", s(&out)]);
    assert_eq!(r.code, 4, "{}", r.stderr);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["vacuous"], true);

    let mut short = feasible();
    short["integration"] = json!({"t_max": 1e-3});
    let r = run(&["verify", "--config", s(&write(dir.path(), "short.json", &short)), "--out", s(&dir.path().join("s.json"))]);
    assert_eq!(r.code, 3, "{}", r.stderr);

    let r1 = std::fs::read(&out).unwrap();
    let r = run(&["verify", "--config", s(&dir.path().join("weak.json")), "--out", s(&out)]);
    assert_eq!(r.code, 4);
    assert_eq!(std::fs::read(&out).unwrap(), r1);
}

fn scan_config(theta: Value, grid: Value) -> Value {
    json!({
        "graph": {"kind": "complete", "n": 5},
        "params": {"omega_natural": {"kind": "uniform", "low": -5e-4, "high": 5e-4, "seed": 1}},
        "initial": {"theta": theta, "omega": [0, 0, 0, 0, 0]},
        "thresholds": {"d0": 1.2, "d_inf": 1.0},
        "k_grid": grid
    })
}

#[test]
fn scan_exit_codes_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let theta = json!({"kind": "uniform", "low": -0.05, "high": 0.05, "seed": 2});
    let out = dir.path().join("scan.csv");
    let cfg = scan_config(theta.clone(), json!({"k_min": 1.0, "factor": 1.2, "count": 100}));
    let r = run(&["scan", "--config", s(&write(dir.path(), "scan.json", &cfg)), "--out", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "K,m,alpha,all_hold,c1,c2,c3,c4,c5,c6,margin_min");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.last().unwrap()[3], "true");
    assert!(rows[..rows.len() - 1].iter().all(|r| r[3] == "false"));
    for r in &rows {
        let k: f64 = r[0].parse().unwrap();
        let m: f64 = r[1].parse().unwrap();
        assert!(common::rel_err(m, 1.0 / (k * k)) < 1e-15);
    }

    let tiny = scan_config(theta, json!({"k_min": 1.0, "factor": 1.5, "count": 1}));
    let r = run(&["scan", "--config", s(&write(dir.path(), "tiny.json", &tiny)), "--out", s(&out)]);
    assert_eq!(r.code, 2);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 2);

    // Nearly antipodal phases: the initial energy is above the trap for every K.
    let apart = scan_config(json!([0.0, 3.1, 0.0, 3.1, 0.0]), json!({"k_min": 1.0, "factor": 1.5, "count": 60}));
    let r = run(&["scan", "--config", s(&write(dir.path(), "apart.json", &apart)), "--out", s(&out)]);
    assert_eq!(r.code, 2);

    let no_grid = feasible();
    let r = run(&["scan", "--config", s(&write(dir.path(), "ng.json", &no_grid)), "--out", s(&out)]);
    assert_eq!(r.code, 1);
}

#[test]
fn lemmas_command() {
    let r = run(&["lemmas", "--trials", "200", "--seed", "42"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["trials"], 200);
    assert_eq!(v["failures"], 0);
}

#[test]
fn thread_cap_is_honored_and_validated() {
    let a = bin().args(["lemmas", "--trials", "300", "--seed", "9"]).env("KURANET_THREADS", "1").output().unwrap();
    let b = bin().args(["lemmas", "--trials", "300", "--seed", "9"]).env("KURANET_THREADS", "3").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let bad = bin().args(["lemmas", "--trials", "3", "--seed", "9"]).env("KURANET_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn unknown_subcommand_is_config_error() {
    assert_eq!(run(&["frobnicate"]).code, 1);
}
