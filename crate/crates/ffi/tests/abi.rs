use std::ffi::{CStr, CString};
use std::ptr;

use kuranet_ffi::*;
use serde_json::{json, Value};

fn last_error() -> String {
    let p = kn_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { kn_string_free(p) };
    s
}

fn ring(n: usize) -> *mut KnGraph {
    let spec = CString::new(format!(r#"{{"kind": "ring", "n": {n}}}"#)).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { kn_graph_generate_json(spec.as_ptr(), &mut g) }, KnStatus::Ok);
    g
}

#[test]
fn graph_handles() {
    let g = ring(5);
    let mut c = KnGraphConstants::default();
    assert_eq!(unsafe { kn_graph_constants(g, &mut c) }, KnStatus::Ok);
    assert_eq!((c.n, c.r, c.card_e, c.card_ec), (5, 2, 10, 15));
    assert_eq!(c.lambda1, 1.0 / 31.0);
    let mut connected = false;
    assert_eq!(unsafe { kn_graph_is_connected(g, &mut connected) }, KnStatus::Ok);
    assert!(connected);
    assert_eq!(unsafe { kn_graph_n(g) }, 5);
    unsafe { kn_graph_free(g) };

    // Two isolated vertices: a valid graph without constants.
    let w = [0.0; 4];
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { kn_graph_from_matrix(2, w.as_ptr(), &mut g) }, KnStatus::Ok);
    assert_eq!(unsafe { kn_graph_constants(g, &mut c) }, KnStatus::InvalidInput);
    assert!(!last_error().is_empty());
    unsafe { kn_graph_free(g) };

    let asym = [0.0, 1.0, 2.0, 0.0];
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { kn_graph_from_matrix(2, asym.as_ptr(), &mut g) }, KnStatus::InvalidInput);
    assert!(g.is_null());
    assert!(last_error().contains("symmetric") || last_error().contains("asym"), "{}", last_error());
}

#[test]
fn null_and_bad_strings() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { kn_graph_from_matrix(2, ptr::null(), &mut g) }, KnStatus::NullPointer);
    assert!(last_error().contains("weights"));
    let bad = [0xffu8, 0];
    assert_eq!(unsafe { kn_graph_generate_json(bad.as_ptr().cast(), &mut g) }, KnStatus::InvalidUtf8);
    let junk = CString::new("{").unwrap();
    assert_eq!(unsafe { kn_graph_generate_json(junk.as_ptr(), &mut g) }, KnStatus::InvalidInput);
    unsafe {
        kn_graph_free(ptr::null_mut());
        kn_trajectory_free(ptr::null_mut());
        kn_string_free(ptr::null_mut());
    }
    assert_eq!(unsafe { kn_graph_n(ptr::null()) }, 0);
}

#[test]
fn rhs_energies_and_integration() {
    let g = ring(3);
    let omega_nat = [0.1, -0.2, 0.05];
    let params = KnParams { m: 0.5, coupling_k: 2.0, alpha: 0.2, omega_natural: omega_nat.as_ptr() };
    let theta = [0.0, 0.4, -0.3];
    let omega = [0.1, 0.0, -0.1];
    let (mut dth, mut dom) = ([0.0; 3], [0.0; 3]);
    assert_eq!(
        unsafe { kn_phase_rhs(g, &params, theta.as_ptr(), omega.as_ptr(), dth.as_mut_ptr(), dom.as_mut_ptr()) },
        KnStatus::Ok
    );
    assert_eq!(dth, omega);
    for i in 0..3 {
        let s: f64 = (0..3).filter(|&l| l != i).map(|l| (theta[l] - theta[i] + 0.2f64).sin()).sum();
        let want = (omega_nat[i] - omega[i] + 2.0 / 3.0 * s) / 0.5;
        assert!((dom[i] - want).abs() < 1e-14);
    }

    let (mut e1, mut e2) = (0.0, 0.0);
    assert_eq!(unsafe { kn_energy_e1(3, &params, theta.as_ptr(), omega.as_ptr(), &mut e1) }, KnStatus::Ok);
    assert_eq!(unsafe { kn_energy_e2(g, &params, theta.as_ptr(), omega.as_ptr(), &mut e2) }, KnStatus::Ok);
    assert!(e1 > 0.0 && e2 > 0.0);

    let mut traj = ptr::null_mut();
    assert_eq!(
        unsafe { kn_integrate(g, &params, theta.as_ptr(), omega.as_ptr(), 0.01, 1.0, 10, &mut traj) },
        KnStatus::Ok
    );
    let len = unsafe { kn_trajectory_len(traj) };
    assert_eq!(len, 11);
    assert_eq!(unsafe { kn_trajectory_n(traj) }, 3);
    let mut d0 = KnDiagSample::default();
    assert_eq!(unsafe { kn_trajectory_diag(traj, 0, &mut d0) }, KnStatus::Ok);
    assert_eq!(d0.t, 0.0);
    assert!((d0.e1 - e1).abs() < 1e-15 && (d0.e2 - e2).abs() < 1e-15);
    let (mut t, mut th, mut om) = (0.0, [0.0; 3], [0.0; 3]);
    assert_eq!(unsafe { kn_trajectory_state(traj, len - 1, &mut t, th.as_mut_ptr(), om.as_mut_ptr()) }, KnStatus::Ok);
    assert!((t - 1.0).abs() < 1e-12);
    assert_eq!(unsafe { kn_trajectory_diag(traj, len, &mut d0) }, KnStatus::InvalidInput);
    unsafe { kn_trajectory_free(traj) };

    let mut traj = ptr::null_mut();
    assert_eq!(
        unsafe { kn_integrate(g, &params, theta.as_ptr(), omega.as_ptr(), -1.0, 1.0, 10, &mut traj) },
        KnStatus::InvalidInput
    );
    unsafe { kn_graph_free(g) };
}

fn feasible(k: f64) -> Value {
    json!({
        "graph": {"kind": "complete", "n": 5},
        "params": {"m": 1.0 / (k * k), "K": k, "alpha": 1.0 / (k * k),
                   "omega_natural": {"kind": "uniform", "low": -5e-4, "high": 5e-4, "seed": 1}},
        "initial": {"theta": {"kind": "uniform", "low": -0.05, "high": 0.05, "seed": 2},
                    "omega": [0, 0, 0, 0, 0]},
        "thresholds": {"d0": 1.2, "d_inf": 1.0},
        "k_grid": {"k_min": 1.0, "factor": 1.2, "count": 100}
    })
}

#[test]
fn json_entry_points_follow_cli_statuses() {
    let cfg = CString::new(feasible(800.0).to_string()).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { kn_check_json(cfg.as_ptr(), &mut out) }, KnStatus::Ok);
    let report: Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(report["all_hold"], true);

    assert_eq!(unsafe { kn_verify_json(cfg.as_ptr(), &mut out) }, KnStatus::Ok);
    let first = take_string(out);
    assert_eq!(unsafe { kn_verify_json(cfg.as_ptr(), &mut out) }, KnStatus::Ok);
    assert_eq!(take_string(out), first);

    assert_eq!(unsafe { kn_simulate_csv(cfg.as_ptr(), true, &mut out) }, KnStatus::Ok);
    let csv = take_string(out);
    assert!(csv.starts_with("t,d_theta,d_omega,e1,e2,theta_1,"));

    assert_eq!(unsafe { kn_scan_csv(cfg.as_ptr(), &mut out) }, KnStatus::Ok);
    let scan = take_string(out);
    assert!(scan.lines().last().unwrap().split(',').nth(3) == Some("true"));

    let mut heavy = feasible(800.0);
    heavy["params"]["m"] = json!(1.0);
    let heavy = CString::new(heavy.to_string()).unwrap();
    assert_eq!(unsafe { kn_check_json(heavy.as_ptr(), &mut out) }, KnStatus::CheckFailed);
    take_string(out);

    let mut weak = feasible(800.0);
    weak["params"]["K"] = json!(50.0);
    weak["params"]["m"] = json!(1e-4);
    let weak = CString::new(weak.to_string()).unwrap();
    assert_eq!(unsafe { kn_verify_json(weak.as_ptr(), &mut out) }, KnStatus::Vacuous);
    take_string(out);

    let mut short = feasible(800.0);
    short["integration"] = json!({"t_max": 1e-3});
    let short = CString::new(short.to_string()).unwrap();
    out = ptr::null_mut();
    assert_eq!(unsafe { kn_verify_json(short.as_ptr(), &mut out) }, KnStatus::Runtime);
    assert!(out.is_null());
}
