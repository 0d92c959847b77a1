//! Fixed-step classical Runge–Kutta integration of the `(θ, ω)` system.
//!
//! Step size guidance: `dt ≤ min(m/10, 0.1/√K)` (see [`recommended_dt`]).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DiagSample};
use crate::dynamics::{accel_into, check_dims, ModelParams, OscState};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Steps between wall-clock checks when a deadline is set.
const DEADLINE_STRIDE: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationPlan {
    pub dt: f64,
    pub t_max: f64,
    pub sample_every: u64,
}

impl IntegrationPlan {
    pub fn new(dt: f64, t_max: f64, sample_every: u64) -> Result<Self> {
        let plan = Self { dt, t_max, sample_every };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::BadPlan(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max >= self.dt) {
            return Err(Error::BadPlan(format!("t_max = {} must be at least dt = {}", self.t_max, self.dt)));
        }
        if self.sample_every == 0 {
            return Err(Error::BadPlan("sample_every must be at least 1".into()));
        }
        if self.t_max / self.dt > u64::MAX as f64 / 2.0 {
            return Err(Error::BadPlan("step count overflows".into()));
        }
        Ok(())
    }

    /// `ceil(t_max/dt)`, treating ratios within 1e-9 of an integer as exact.
    pub fn steps(&self) -> u64 {
        let raw = self.t_max / self.dt;
        let nearest = raw.round();
        if (raw - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as u64
        } else {
            raw.ceil() as u64
        }
    }

    /// Time of the last step, `steps · dt`.
    pub fn final_time(&self) -> f64 {
        self.steps() as f64 * self.dt
    }
}

/// Largest step size recommended for the given parameters.
pub fn recommended_dt(params: &ModelParams) -> f64 {
    (params.m / 10.0).min(0.1 / params.sqrt_k())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub state: OscState,
    pub diag: DiagSample,
}

/// Sampled solution, starting at `t = 0` and ending at the final step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.state.t)
    }

    pub fn diags(&self) -> impl Iterator<Item = &DiagSample> + '_ {
        self.samples.iter().map(|s| &s.diag)
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

/// Controls for long runs.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunControl {
    /// Abort with [`Error::BudgetExceeded`] once this instant has passed.
    pub deadline: Option<Instant>,
}

impl RunControl {
    pub fn until(deadline: Instant) -> Self {
        Self { deadline: Some(deadline) }
    }
}

pub fn integrate(
    state0: &OscState,
    params: &ModelParams,
    graph: &WeightedGraph,
    plan: &IntegrationPlan,
) -> Result<Trajectory> {
    integrate_with(state0, params, graph, plan, &RunControl::default())
}

/// RK4 with fixed `dt`, sampling every `plan.sample_every` steps and at the end.
///
/// Step `k` sits at `t = k·dt` exactly (no accumulated time drift), so the
/// output is bit-identical for identical inputs.
pub fn integrate_with(
    state0: &OscState,
    params: &ModelParams,
    graph: &WeightedGraph,
    plan: &IntegrationPlan,
    control: &RunControl,
) -> Result<Trajectory> {
    plan.validate()?;
    state0.validate()?;
    params.validate()?;
    check_dims(state0, params, graph)?;
    if state0.t != 0.0 {
        return Err(Error::BadPlan(format!("initial time must be 0, got {}", state0.t)));
    }

    let n = graph.n();
    let steps = plan.steps();
    let dt = plan.dt;
    let half = 0.5 * dt;
    let sixth = dt / 6.0;

    let mut theta = state0.theta.clone();
    let mut omega = state0.omega.clone();
    let mut th_tmp = vec![0.0; n];
    let mut om_tmp = vec![0.0; n];
    let (mut a1, mut a2, mut a3, mut a4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut w2, mut w3) = (vec![0.0; n], vec![0.0; n]);

    let mut out = Trajectory::default();
    out.samples.reserve((steps / plan.sample_every + 2).min(1 << 20) as usize);
    out.samples.push(make_sample(0.0, &theta, &omega, params, graph));

    for k in 1..=steps {
        // Stage slopes: θ' = ω, ω' = a(θ, ω).
        accel_into(&theta, &omega, params, graph, &mut a1);

        for i in 0..n {
            th_tmp[i] = theta[i] + half * omega[i];
            om_tmp[i] = omega[i] + half * a1[i];
        }
        w2.copy_from_slice(&om_tmp);
        accel_into(&th_tmp, &om_tmp, params, graph, &mut a2);

        for i in 0..n {
            th_tmp[i] = theta[i] + half * w2[i];
            om_tmp[i] = omega[i] + half * a2[i];
        }
        w3.copy_from_slice(&om_tmp);
        accel_into(&th_tmp, &om_tmp, params, graph, &mut a3);

        for i in 0..n {
            th_tmp[i] = theta[i] + dt * w3[i];
            om_tmp[i] = omega[i] + dt * a3[i];
        }
        // om_tmp now holds the stage-4 frequency slope for θ.
        accel_into(&th_tmp, &om_tmp, params, graph, &mut a4);

        let mut finite = true;
        for i in 0..n {
            theta[i] += sixth * (omega[i] + 2.0 * w2[i] + 2.0 * w3[i] + om_tmp[i]);
            omega[i] += sixth * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
            finite &= theta[i].is_finite() && omega[i].is_finite();
        }
        if !finite {
            return Err(Error::NonFiniteState { step: k });
        }

        if k % plan.sample_every == 0 || k == steps {
            out.samples.push(make_sample(k as f64 * dt, &theta, &omega, params, graph));
        }
        if k % DEADLINE_STRIDE == 0 {
            if let Some(deadline) = control.deadline {
                if Instant::now() >= deadline {
                    return Err(Error::BudgetExceeded { completed: k, total: steps });
                }
            }
        }
    }
    Ok(out)
}

fn make_sample(t: f64, theta: &[f64], omega: &[f64], params: &ModelParams, graph: &WeightedGraph) -> Sample {
    let state = OscState { t, theta: theta.to_vec(), omega: omega.to_vec() };
    let diag = diagnostics::sample_diagnostics(&state, params, graph);
    Sample { state, diag }
}
