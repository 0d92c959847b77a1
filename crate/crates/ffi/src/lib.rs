//! C ABI over `kuranet`.
//!
//! Graphs and trajectories are opaque heap handles released with their
//! `*_free` function. Every fallible call returns a [`KnStatus`]; on failure
//! [`kn_last_error`] describes the cause for the calling thread. Strings
//! returned through `char **` out-parameters are owned by the caller and
//! released with [`kn_string_free`].
//!
//! Status codes 0 to 4 coincide with the command-line exit codes.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kuranet::cli::{self, Observables};
use kuranet::config::RunConfig;
use kuranet::diagnostics::{energy_e1, energy_e2};
use kuranet::dynamics::phase_rhs;
use kuranet::integrate::{integrate, IntegrationPlan, RunControl, Sample};
use kuranet::{check_assumption_a, generate, Error, GraphSpec, ModelParams, OscState, Trajectory, WeightedGraph};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnStatus {
    Ok = 0,
    /// Malformed input: bad graph, parameters, plan or configuration.
    InvalidInput = 1,
    /// A checked condition does not hold.
    CheckFailed = 2,
    /// The computation failed at run time (non-finite state, horizon too short).
    Runtime = 3,
    /// The instance lies outside the sufficient regime; the report is still produced.
    Vacuous = 4,
    NullPointer = 5,
    InvalidUtf8 = 6,
    Panic = 7,
}

/// Opaque weighted graph.
pub struct KnGraph(WeightedGraph);

/// Opaque sampled trajectory.
pub struct KnTrajectory(Trajectory);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KnGraphConstants {
    pub n: usize,
    pub r: usize,
    pub card_e: usize,
    pub card_ec: usize,
    pub lambda1: f64,
    pub a_u: f64,
    pub a_l: f64,
}

/// Model parameters; `omega_natural` points at `n` values, `n` taken from the graph.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct KnParams {
    pub m: f64,
    pub coupling_k: f64,
    pub alpha: f64,
    pub omega_natural: *const f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KnDiagSample {
    pub t: f64,
    pub d_theta: f64,
    pub d_omega: f64,
    pub e1: f64,
    pub e2: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Message for the most recent failure on this thread, or null.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn kn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

enum Fail {
    Null(&'static str),
    Utf8,
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn status_of(err: &Error) -> KnStatus {
    match cli::exit_code(err) {
        cli::EXIT_CHECK_FAILED => KnStatus::CheckFailed,
        cli::EXIT_RUNTIME => KnStatus::Runtime,
        _ => KnStatus::InvalidInput,
    }
}

/// Runs `f`, converting errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<KnStatus, Fail>) -> KnStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            KnStatus::NullPointer
        }
        Ok(Err(Fail::Utf8)) => {
            set_error("string argument is not valid UTF-8".into());
            KnStatus::InvalidUtf8
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            KnStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &'static str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Utf8)
}

unsafe fn params_from(p: *const KnParams, n: usize) -> Result<ModelParams, Fail> {
    let p = deref(p, "params")?;
    let omega = slice(p.omega_natural, n, "params.omega_natural")?;
    Ok(ModelParams::new(p.m, p.coupling_k, p.alpha, omega.to_vec())?)
}

unsafe fn state_from(theta: *const f64, omega: *const f64, n: usize) -> Result<OscState, Fail> {
    let theta = slice(theta, n, "theta")?;
    let omega = slice(omega, n, "omega")?;
    Ok(OscState::new(theta.to_vec(), omega.to_vec())?)
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).expect("payload has no interior nul");
    put(out, c.into_raw(), "out")
}

/// Builds a graph from a row-major `n × n` weight matrix.
///
/// # Safety
/// `weights` must point at `n * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kn_graph_from_matrix(n: usize, weights: *const f64, out: *mut *mut KnGraph) -> KnStatus {
    guard(|| {
        let len = n.checked_mul(n).ok_or(Error::EmptyGraph)?;
        let w = slice(weights, len, "weights")?;
        let g = WeightedGraph::from_flat(n, w.to_vec())?;
        put(out, Box::into_raw(Box::new(KnGraph(g))), "out")?;
        Ok(KnStatus::Ok)
    })
}

/// Builds a graph from a JSON graph spec such as `{"kind": "ring", "n": 5}`.
///
/// # Safety
/// `spec_json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kn_graph_generate_json(spec_json: *const c_char, out: *mut *mut KnGraph) -> KnStatus {
    guard(|| {
        let spec: GraphSpec = serde_json::from_str(text(spec_json, "spec_json")?).map_err(|e| Error::Config(e.to_string()))?;
        let g = generate(&spec)?;
        put(out, Box::into_raw(Box::new(KnGraph(g))), "out")?;
        Ok(KnStatus::Ok)
    })
}

/// # Safety
/// `graph` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kn_graph_free(graph: *mut KnGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Vertex count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kn_graph_n(graph: *const KnGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.n())
}

/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kn_graph_is_connected(graph: *const KnGraph, out: *mut bool) -> KnStatus {
    guard(|| {
        let g = deref(graph, "graph")?;
        put(out, g.0.is_connected(), "out")?;
        Ok(KnStatus::Ok)
    })
}

/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kn_graph_constants(graph: *const KnGraph, out: *mut KnGraphConstants) -> KnStatus {
    guard(|| {
        let c = deref(graph, "graph")?.0.constants()?;
        let value = KnGraphConstants {
            n: c.n,
            r: c.r,
            card_e: c.card_e,
            card_ec: c.card_ec,
            lambda1: c.lambda1,
            a_u: c.a_u,
            a_l: c.a_l,
        };
        put(out, value, "out")?;
        Ok(KnStatus::Ok)
    })
}

/// Writes `θ̇` and `ω̇` for the given state.
///
/// # Safety
/// All arrays hold `n` doubles, `n` being the graph's vertex count.
#[no_mangle]
pub unsafe extern "C" fn kn_phase_rhs(
    graph: *const KnGraph,
    params: *const KnParams,
    theta: *const f64,
    omega: *const f64,
    dtheta_out: *mut f64,
    domega_out: *mut f64,
) -> KnStatus {
    guard(|| {
        let g = &deref(graph, "graph")?.0;
        let n = g.n();
        let params = params_from(params, n)?;
        let state = state_from(theta, omega, n)?;
        let (dt, dw) = phase_rhs(&state, &params, g)?;
        slice_mut(dtheta_out, n, "dtheta_out")?.copy_from_slice(&dt);
        slice_mut(domega_out, n, "domega_out")?.copy_from_slice(&dw);
        Ok(KnStatus::Ok)
    })
}

/// Phase energy of a state with `n` oscillators.
///
/// # Safety
/// `params.omega_natural`, `theta` and `omega` hold `n` doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn kn_energy_e1(
    n: usize,
    params: *const KnParams,
    theta: *const f64,
    omega: *const f64,
    out: *mut f64,
) -> KnStatus {
    guard(|| {
        let params = params_from(params, n)?;
        let state = state_from(theta, omega, n)?;
        put(out, energy_e1(&state, &params)?, "out")?;
        Ok(KnStatus::Ok)
    })
}

/// Frequency energy, which needs the graph for `ω̇`.
///
/// # Safety
/// As [`kn_phase_rhs`]; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn kn_energy_e2(
    graph: *const KnGraph,
    params: *const KnParams,
    theta: *const f64,
    omega: *const f64,
    out: *mut f64,
) -> KnStatus {
    guard(|| {
        let g = &deref(graph, "graph")?.0;
        let n = g.n();
        let params = params_from(params, n)?;
        let state = state_from(theta, omega, n)?;
        put(out, energy_e2(&state, &params, g)?, "out")?;
        Ok(KnStatus::Ok)
    })
}

/// Integrates from `t = 0` with fixed-step RK4.
///
/// # Safety
/// As [`kn_phase_rhs`] for the arrays; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn kn_integrate(
    graph: *const KnGraph,
    params: *const KnParams,
    theta0: *const f64,
    omega0: *const f64,
    dt: f64,
    t_max: f64,
    sample_every: u64,
    out: *mut *mut KnTrajectory,
) -> KnStatus {
    guard(|| {
        let g = &deref(graph, "graph")?.0;
        let n = g.n();
        let params = params_from(params, n)?;
        let state = state_from(theta0, omega0, n)?;
        let plan = IntegrationPlan::new(dt, t_max, sample_every)?;
        let traj = integrate(&state, &params, g, &plan)?;
        put(out, Box::into_raw(Box::new(KnTrajectory(traj))), "out")?;
        Ok(KnStatus::Ok)
    })
}

/// # Safety
/// `traj` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kn_trajectory_free(traj: *mut KnTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Sample count, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kn_trajectory_len(traj: *const KnTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Oscillator count, or 0 for a null or empty handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kn_trajectory_n(traj: *const KnTrajectory) -> usize {
    traj.as_ref().and_then(|t| t.0.samples.first()).map_or(0, |s| s.state.n())
}

unsafe fn sample_at<'a>(traj: *const KnTrajectory, index: usize) -> Result<&'a Sample, Fail> {
    let t = deref(traj, "traj")?;
    t.0.samples
        .get(index)
        .ok_or_else(|| Fail::Lib(Error::BadOption(format!("sample index {index} out of range 0..{}", t.0.len()))))
}

/// # Safety
/// `traj` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kn_trajectory_diag(traj: *const KnTrajectory, index: usize, out: *mut KnDiagSample) -> KnStatus {
    guard(|| {
        let d = sample_at(traj, index)?.diag;
        put(out, KnDiagSample { t: d.t, d_theta: d.d_theta, d_omega: d.d_omega, e1: d.e1, e2: d.e2 }, "out")?;
        Ok(KnStatus::Ok)
    })
}

/// Copies sample `index` into `theta_out` and `omega_out` (`n` doubles each) and its time into `t_out`.
///
/// # Safety
/// `traj` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn kn_trajectory_state(
    traj: *const KnTrajectory,
    index: usize,
    t_out: *mut f64,
    theta_out: *mut f64,
    omega_out: *mut f64,
) -> KnStatus {
    guard(|| {
        let s = &sample_at(traj, index)?.state;
        let n = s.n();
        slice_mut(theta_out, n, "theta_out")?.copy_from_slice(&s.theta);
        slice_mut(omega_out, n, "omega_out")?.copy_from_slice(&s.omega);
        put(t_out, s.t, "t_out")?;
        Ok(KnStatus::Ok)
    })
}

unsafe fn config_from(config_json: *const c_char) -> Result<RunConfig, Fail> {
    Ok(RunConfig::from_json(text(config_json, "config_json")?)?)
}

/// Assumption report JSON for a run configuration. Returns `CheckFailed` with
/// the report still written when some condition fails.
///
/// # Safety
/// `config_json` must be a nul-terminated string; `report_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kn_check_json(config_json: *const c_char, report_out: *mut *mut c_char) -> KnStatus {
    guard(|| {
        let cfg = config_from(config_json)?;
        let inst = cfg.instance()?;
        let report = check_assumption_a(&inst.state0, &inst.params, &inst.graph, cfg.thresholds.d0, cfg.thresholds.d_inf)?;
        put_string(report_out, serde_json::to_string_pretty(&report).map_err(Error::from)?)?;
        Ok(if report.all_hold { KnStatus::Ok } else { KnStatus::CheckFailed })
    })
}

/// Verification report JSON; the status follows the `verify` command.
///
/// # Safety
/// As [`kn_check_json`].
#[no_mangle]
pub unsafe extern "C" fn kn_verify_json(config_json: *const c_char, report_out: *mut *mut c_char) -> KnStatus {
    guard(|| {
        let cfg = config_from(config_json)?;
        let (report, json) = cli::verify_json(&cfg, &RunControl::default())?;
        put_string(report_out, json)?;
        Ok(match cli::verify_exit_code(&report) {
            cli::EXIT_OK => KnStatus::Ok,
            cli::EXIT_VACUOUS => KnStatus::Vacuous,
            _ => KnStatus::CheckFailed,
        })
    })
}

/// The `simulate` CSV; `full` appends the state columns.
///
/// # Safety
/// As [`kn_check_json`].
#[no_mangle]
pub unsafe extern "C" fn kn_simulate_csv(config_json: *const c_char, full: bool, csv_out: *mut *mut c_char) -> KnStatus {
    guard(|| {
        let cfg = config_from(config_json)?;
        let mode = if full { Observables::Full } else { Observables::Diag };
        put_string(csv_out, cli::simulate_csv(&cfg, mode, &RunControl::default())?.0)?;
        Ok(KnStatus::Ok)
    })
}

/// The `scan` CSV; `CheckFailed` when no grid point qualifies.
///
/// # Safety
/// As [`kn_check_json`].
#[no_mangle]
pub unsafe extern "C" fn kn_scan_csv(config_json: *const c_char, csv_out: *mut *mut c_char) -> KnStatus {
    guard(|| {
        let cfg = config_from(config_json)?;
        let grid = cfg.k_grid.ok_or_else(|| Error::Config("scan needs a k_grid".into()))?;
        let graph = cfg.build_graph()?;
        let n = graph.n();
        let outcome = kuranet::scan_regime(
            &cfg.initial_state(n)?,
            &graph,
            &cfg.omega_natural(n)?,
            cfg.thresholds.d0,
            cfg.thresholds.d_inf,
            &grid,
        )?;
        put_string(csv_out, cli::scan_csv(&outcome.rows))?;
        Ok(if outcome.found.is_some() { KnStatus::Ok } else { KnStatus::CheckFailed })
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
