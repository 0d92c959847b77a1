//! End-to-end verification runs and the randomized inequality driver.
//!
//! [`verify_theorem`] integrates a concrete instance and checks, sample by
//! sample, that
//!
//! * the phase diameter stays below `D∞` after the predicted trapping time,
//! * `ℰ₁` stays below `D₀²/8` and obeys `ℰ̇₁ ≤ √K C₁ − √K ℰ₁`,
//! * `ℰ₂(t) ≤ ℰ₂(t*) e^{−√K (t − t*)}` after the trapping time,
//! * the frequency diameter decays at least as fast as `e^{−√K t / 2}`.
//!
//! When the instance violates the sufficient regime the report is marked
//! vacuous; the checks are still computed.

use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::assumptions::{check_assumption_a, AssumptionReport};
use crate::diagnostics::{fit_decay_rate, pair_sq_sum, EnergyTerms};
use crate::dynamics::{acceleration, ModelParams, OscState};
use crate::error::{Error, Result};
use crate::graph::{generate, GraphSpec, WeightedGraph};
use crate::integrate::{integrate_with, recommended_dt, IntegrationPlan, RunControl, Trajectory};
use crate::rng::{stream_seed, SplitMix64};

/// Horizon past the trapping time, in units of `1/√K`.
pub const HORIZON_E_FOLDS: f64 = 10.0;

/// Target sample count for default plans.
pub const DEFAULT_SAMPLES: u64 = 4000;

/// Energies at or below this are treated as exactly zero by the `ℰ₂` check.
pub const E2_ZERO: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute slack on `D(θ) ≤ D∞`.
    pub phase_abs: f64,
    /// Relative slack on the `ℰ₂` envelope.
    pub e2_rel: f64,
    /// Integration-error allowance `coeff · dt⁴` per unit time on the `ℰ₂` envelope.
    pub e2_dt4_per_time: f64,
    /// Slack `rel · (1 + |ℰ₁|)` on the Grönwall check, before the sampling-error bound.
    pub gronwall_rel: f64,
    /// Safety factor on the estimated finite-difference error of `ℰ̇₁`.
    pub gronwall_sampling_factor: f64,
    /// Required fraction of `√K/2` for the fitted decay rate.
    pub rate_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            phase_abs: 1e-9,
            e2_rel: 1e-6,
            e2_dt4_per_time: 10.0,
            gronwall_rel: 1e-6,
            gronwall_sampling_factor: 2.0,
            rate_fraction: 0.95,
        }
    }
}

/// Per-check tallies. `worst_margin` is the smallest `bound − value` seen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckStats {
    pub checked: usize,
    pub violations: usize,
    pub worst_margin: f64,
    pub first_violation_t: Option<f64>,
}

impl CheckStats {
    fn new() -> Self {
        Self { checked: 0, violations: 0, worst_margin: f64::INFINITY, first_violation_t: None }
    }

    /// Records `value ≤ bound`.
    fn record(&mut self, t: f64, value: f64, bound: f64) {
        self.tally(t, bound - value, value <= bound);
    }

    /// Records `value < bound`.
    fn record_strict(&mut self, t: f64, value: f64, bound: f64) {
        self.tally(t, bound - value, value < bound);
    }

    fn tally(&mut self, t: f64, margin: f64, ok: bool) {
        self.checked += 1;
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
        }
        if !ok {
            self.violations += 1;
            self.first_violation_t.get_or_insert(t);
        }
    }

    fn ok(&self) -> bool {
        self.violations == 0
    }

    fn require(self, name: &'static str) -> Result<Self> {
        if self.checked == 0 {
            return Err(Error::NoQualifyingSamples(name));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub graph: WeightedGraph,
    pub params: ModelParams,
    pub state0: OscState,
    pub plan: IntegrationPlan,
    pub d0: f64,
    pub d_inf: f64,
}

/// Default plan: `dt = min(m/10, 0.1/√K)`, horizon `t* + 10/√K`, about
/// [`DEFAULT_SAMPLES`] samples.
pub fn default_plan(params: &ModelParams, t_star: f64) -> Result<IntegrationPlan> {
    let dt = recommended_dt(params);
    let t_max = required_horizon(params, t_star).max(dt);
    let steps = (t_max / dt).ceil() as u64;
    IntegrationPlan::new(dt, t_max, (steps / DEFAULT_SAMPLES).max(1))
}

pub fn required_horizon(params: &ModelParams, t_star: f64) -> f64 {
    t_star + HORIZON_E_FOLDS / params.sqrt_k()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub assumption: AssumptionReport,
    /// True when the instance lies outside the sufficient regime.
    pub vacuous: bool,
    pub t_star: f64,
    pub dt: f64,
    pub steps: u64,
    pub horizon: f64,
    pub samples: usize,

    pub phase_trap_ok: bool,
    pub phase_trap: CheckStats,
    pub e1_bounded_ok: bool,
    pub e1_bounded: CheckStats,
    pub e1_gronwall_ok: bool,
    pub e1_gronwall: CheckStats,
    pub e2_decay_ok: bool,
    pub e2_decay: CheckStats,
    /// First sample time at or after `t*`, where the `ℰ₂` envelope starts.
    pub e2_reference_t: f64,
    pub e2_reference: f64,
    /// `√(8 ℰ₂(t_ref))`, the prefactor of the frequency-diameter envelope.
    pub decay_constant: f64,

    pub fitted_rate: Option<f64>,
    pub fit_r_squared: Option<f64>,
    pub fit_samples: usize,
    pub rate_threshold: f64,
    pub rate_ok: bool,
    pub fit_note: Option<String>,

    pub tolerances: Tolerances,
}

impl VerificationReport {
    pub fn checks_pass(&self) -> bool {
        self.phase_trap_ok && self.e1_bounded_ok && self.e1_gronwall_ok && self.e2_decay_ok && self.rate_ok
    }

    /// Every check passes and the instance satisfies the assumption.
    pub fn verified(&self) -> bool {
        !self.vacuous && self.checks_pass()
    }
}

pub fn verify_theorem(config: &VerifyConfig) -> Result<VerificationReport> {
    verify_theorem_with(config, &RunControl::default(), Tolerances::default())
        .map(|(report, _)| report)
}

/// Runs the full verification and also returns the trajectory.
pub fn verify_theorem_with(
    config: &VerifyConfig,
    control: &RunControl,
    tol: Tolerances,
) -> Result<(VerificationReport, Trajectory)> {
    let VerifyConfig { graph, params, state0, plan, d0, d_inf } = config;
    let assumption = check_assumption_a(state0, params, graph, *d0, *d_inf)?;
    let t_star = assumption.t_star;
    let required = required_horizon(params, t_star);
    if plan.final_time() < required {
        return Err(Error::HorizonTooShort { t_max: plan.t_max, required });
    }
    let traj = integrate_with(state0, params, graph, plan, control)?;
    let report = evaluate(&traj, params, assumption, *d0, *d_inf, plan, tol)?;
    Ok((report, traj))
}

/// Applies every check to an existing trajectory.
pub fn evaluate(
    traj: &Trajectory,
    params: &ModelParams,
    assumption: AssumptionReport,
    d0: f64,
    d_inf: f64,
    plan: &IntegrationPlan,
    tol: Tolerances,
) -> Result<VerificationReport> {
    let t_star = assumption.t_star;
    let sqrt_k = params.sqrt_k();
    let diags: Vec<_> = traj.diags().copied().collect();

    let mut phase_trap = CheckStats::new();
    for d in diags.iter().filter(|d| d.t >= t_star) {
        phase_trap.record(d.t, d.d_theta, d_inf + tol.phase_abs);
    }
    let phase_trap = phase_trap.require("phase_trap")?;

    let mut e1_bounded = CheckStats::new();
    for d in &diags {
        e1_bounded.record_strict(d.t, d.e1, d0 * d0 / 8.0);
    }

    let e1_gronwall = gronwall_check(traj, params, assumption.c1, tol)?.require("e1_gronwall")?;

    let (e2_reference_t, e2_reference) = diags
        .iter()
        .find(|d| d.t >= t_star)
        .map(|d| (d.t, d.e2))
        .ok_or(Error::NoQualifyingSamples("e2_decay"))?;
    let mut e2_decay = CheckStats::new();
    for d in diags.iter().filter(|d| d.t >= e2_reference_t) {
        let elapsed = d.t - e2_reference_t;
        let bound = if e2_reference > E2_ZERO {
            e2_reference
                * (-sqrt_k * elapsed).exp()
                * (1.0 + tol.e2_rel + tol.e2_dt4_per_time * plan.dt.powi(4) * elapsed)
        } else {
            E2_ZERO
        };
        e2_decay.record(d.t, d.e2, bound);
    }
    let e2_decay = e2_decay.require("e2_decay")?;

    let rate_threshold = sqrt_k / 2.0;
    let (fitted_rate, fit_r_squared, fit_samples, rate_ok, fit_note) = match fit_decay_rate(traj, t_star) {
        Ok(fit) => (
            Some(fit.rate),
            Some(fit.r_squared),
            fit.samples,
            fit.rate >= tol.rate_fraction * rate_threshold,
            None,
        ),
        Err(Error::AlreadyConverged) => {
            (None, None, 0, true, Some("frequency diameter below the numerical floor throughout".into()))
        }
        Err(Error::TooFewSamples { found, needed }) => (
            None,
            None,
            found,
            false,
            Some(format!("only {found} samples above the numerical floor, need {needed}")),
        ),
        Err(e) => return Err(e),
    };

    Ok(VerificationReport {
        vacuous: !assumption.all_hold,
        assumption,
        t_star,
        dt: plan.dt,
        steps: plan.steps(),
        horizon: traj.last().map_or(0.0, |s| s.state.t),
        samples: traj.len(),
        phase_trap_ok: phase_trap.ok(),
        phase_trap,
        e1_bounded_ok: e1_bounded.ok(),
        e1_bounded,
        e1_gronwall_ok: e1_gronwall.ok(),
        e1_gronwall,
        e2_decay_ok: e2_decay.ok(),
        e2_decay,
        e2_reference_t,
        e2_reference,
        decay_constant: (8.0 * e2_reference.max(0.0)).sqrt(),
        fitted_rate,
        fit_r_squared,
        fit_samples,
        rate_threshold,
        rate_ok,
        fit_note,
        tolerances: tol,
    })
}

/// Central-difference check of `ℰ̇₁ ≤ √K C₁ − √K ℰ₁` at every interior sample.
///
/// On a possibly nonuniform stencil `t−h₋, t, t+h₊` the central quotient differs
/// from `ℰ̇₁(t)` by `(h₊−h₋)/2 ℰ₁'' + (h₊³+h₋³)/(6(h₊+h₋)) ℰ₁'''`; both
/// derivatives are estimated from neighboring divided differences. Rounding in
/// the sampled energies adds `2δ/(h₊+h₋)` with `δ = N² ε Σ|terms|`.
pub fn gronwall_check(traj: &Trajectory, params: &ModelParams, c1: f64, tol: Tolerances) -> Result<CheckStats> {
    let sqrt_k = params.sqrt_k();
    let t: Vec<f64> = traj.times().collect();
    let e: Vec<f64> = traj.diags().map(|d| d.e1).collect();
    let n2 = (params.n() * params.n()) as f64;
    let rounding: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| n2 * f64::EPSILON * EnergyTerms::new(&s.state.theta, &s.state.omega, params).magnitude())
        .collect();
    let len = t.len();
    let mut stats = CheckStats::new();
    if len < 3 {
        return Ok(stats);
    }
    let second = |a: usize| -> Option<f64> {
        (a + 2 < len).then(|| 2.0 * divided(&t[a..a + 3], &e[a..a + 3]).abs())
    };
    let third = |a: usize| -> Option<f64> {
        (a + 3 < len).then(|| 6.0 * divided(&t[a..a + 4], &e[a..a + 4]).abs())
    };
    for k in 1..len - 1 {
        let (hm, hp) = (t[k] - t[k - 1], t[k + 1] - t[k]);
        let fd = (e[k + 1] - e[k - 1]) / (hp + hm);
        let m2 = [k.checked_sub(2), Some(k - 1), Some(k)]
            .into_iter()
            .flatten()
            .filter_map(second)
            .fold(0.0, f64::max);
        let m3 = [k.checked_sub(2), Some(k - 1)]
            .into_iter()
            .flatten()
            .filter_map(third)
            .fold(0.0, f64::max);
        let sampling = tol.gronwall_sampling_factor
            * ((hp - hm).abs() / 2.0 * m2 + (hp.powi(3) + hm.powi(3)) / (6.0 * (hp + hm)) * m3)
            + 2.0 * (rounding[k - 1] + rounding[k + 1]) / (hp + hm);
        let slack = tol.gronwall_rel * (1.0 + e[k].abs()) + sampling;
        stats.record(t[k], fd, sqrt_k * c1 - sqrt_k * e[k] + slack);
    }
    Ok(stats)
}

/// Newton divided difference `f[t_0, …, t_k]`.
fn divided(t: &[f64], f: &[f64]) -> f64 {
    let mut c = f.to_vec();
    for level in 1..t.len() {
        for i in (level..t.len()).rev() {
            c[i] = (c[i] - c[i - 1]) / (t[i] - t[i - level]);
        }
    }
    c[t.len() - 1]
}

// ---------------------------------------------------------------------------
// Randomized inequality driver

/// A random instance for the inequality driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaInstance {
    pub trial: u64,
    pub seed: u64,
    pub graph: WeightedGraph,
    pub params: ModelParams,
    pub state: OscState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: u64,
    /// Which inequality failed.
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub instance: LemmaInstance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub trials: u64,
    pub failures: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_counterexample: Option<Counterexample>,
}

/// Relative slack on every inequality in the driver.
pub const LEMMA_REL_SLACK: f64 = 1e-12;

fn leq(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + LEMMA_REL_SLACK * lhs.abs().max(rhs.abs())
}

/// Draws instance `trial` of the stream `seed`: a connected graph on 2..=8
/// vertices with random symmetric weights, entries of `θ`, `ω` in `[−π, π]`,
/// and parameters with `m√K < 1/8`.
pub fn lemma_instance(seed: u64, trial: u64) -> Result<LemmaInstance> {
    let stream = stream_seed(seed, trial);
    let mut rng = SplitMix64::new(stream);
    let n = rng.uniform_int(2, 8) as usize;
    let p = rng.uniform(0.3, 1.0);
    let skeleton = generate(&GraphSpec::erdos_renyi(n, p, rng.next_u64()))?;
    let mut w = skeleton.weights().to_vec();
    for i in 0..n {
        for j in i + 1..n {
            if w[i * n + j] > 0.0 {
                let v = rng.uniform(0.1, 2.0);
                w[i * n + j] = v;
                w[j * n + i] = v;
            }
        }
    }
    let graph = WeightedGraph::from_flat(n, w)?;
    let k = 10f64.powf(rng.uniform(-1.0, 4.0));
    let m = rng.uniform(1e-3, 0.999) * 0.125 / k.sqrt();
    let alpha = rng.uniform(1e-6, std::f64::consts::FRAC_PI_2 - 1e-6);
    let omega_natural = rng.fill_uniform(n, -1.0, 1.0);
    let params = ModelParams::new(m, k, alpha, omega_natural)?;
    let pi = std::f64::consts::PI;
    let state = OscState::new(rng.fill_uniform(n, -pi, pi), rng.fill_uniform(n, -pi, pi))?;
    Ok(LemmaInstance { trial, seed, graph, params, state })
}

/// First failing inequality as `(name, lhs, rhs)` for `lhs ≤ rhs`.
pub type Violation = (&'static str, f64, f64);

/// `Λ₁ Σ_{i,j} Δx² ≤ Σ_E Δx² ≤ Σ_{i,j} Δx²`, with the given `Λ₁`.
pub fn check_equivalence(graph: &WeightedGraph, lambda1: f64, x: &[f64], label: &'static [&'static str; 2]) -> Option<Violation> {
    let all = pair_sq_sum(x);
    let on_edges = graph.edge_quadratic(x);
    if !leq(lambda1 * all, on_edges) {
        return Some((label[0], lambda1 * all, on_edges));
    }
    if !leq(on_edges, all) {
        return Some((label[1], on_edges, all));
    }
    None
}

/// Energy lower bounds `ℰ₁ ≥ ⅛ΣΔθ² + ⅔m²ΣΔω²` and `ℰ₂ ≥ ⅛ΣΔω² + ⅔m²ΣΔω̇²`.
pub fn check_energy_bounds(inst: &LemmaInstance) -> Result<Option<Violation>> {
    let LemmaInstance { graph, params, state, .. } = inst;
    let m2 = params.m * params.m;
    let e1 = EnergyTerms::new(&state.theta, &state.omega, params).value();
    let lower1 = pair_sq_sum(&state.theta) / 8.0 + 2.0 / 3.0 * m2 * pair_sq_sum(&state.omega);
    if !leq(lower1, e1) {
        return Ok(Some(("e1_lower_bound", lower1, e1)));
    }
    let accel = acceleration(state, params, graph)?;
    let e2 = EnergyTerms::new(&state.omega, &accel, params).value();
    let lower2 = pair_sq_sum(&state.omega) / 8.0 + 2.0 / 3.0 * m2 * pair_sq_sum(&accel);
    if !leq(lower2, e2) {
        return Ok(Some(("e2_lower_bound", lower2, e2)));
    }
    Ok(None)
}

/// Every driver inequality on one instance; `lambda1` overrides the graph's `Λ₁`.
pub fn check_instance(inst: &LemmaInstance, lambda1: Option<f64>) -> Result<Option<Violation>> {
    let lambda1 = match lambda1 {
        Some(l) => l,
        None => inst.graph.constants()?.lambda1,
    };
    if let Some(v) = check_equivalence(&inst.graph, lambda1, &inst.state.theta, &["theta_lower", "theta_upper"]) {
        return Ok(Some(v));
    }
    if let Some(v) = check_equivalence(&inst.graph, lambda1, &inst.state.omega, &["omega_lower", "omega_upper"]) {
        return Ok(Some(v));
    }
    check_energy_bounds(inst)
}

/// Runs `trials` independent instances concurrently. Trial `i` depends only
/// on `(seed, i)`, so the summary is independent of scheduling.
pub fn run_lemma_trials(trials: u64, seed: u64) -> Result<LemmaSummary> {
    if trials == 0 {
        return Err(Error::BadOption("trials must be at least 1".into()));
    }
    let failures = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let inst = lemma_instance(seed, trial)?;
            Ok(check_instance(&inst, None)?.map(|(check, lhs, rhs)| Counterexample {
                trial,
                check: check.into(),
                lhs,
                rhs,
                instance: inst,
            }))
        })
        .filter_map(|r: Result<Option<Counterexample>>| r.transpose())
        .collect::<Result<Vec<_>>>()?;
    let first = failures.iter().min_by_key(|c| c.trial).cloned();
    Ok(LemmaSummary { trials, failures: failures.len() as u64, first_counterexample: first })
}

/// As [`run_lemma_trials`], failing with the earliest counterexample.
pub fn check_lemma_inequalities(trials: u64, seed: u64) -> Result<LemmaSummary> {
    let summary = run_lemma_trials(trials, seed)?;
    match summary.first_counterexample {
        Some(c) => Err(Error::CounterexampleFound(Box::new(c))),
        None => Ok(summary),
    }
}
