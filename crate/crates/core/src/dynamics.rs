//! Model parameters, oscillator state and the right-hand sides of
//!
//! ```text
//! m θ̈_i + θ̇_i = Ω_i + (K/N) Σ_l a_il sin(θ_l − θ_i + α)
//! ```
//!
//! together with its time derivative, the frequency system
//!
//! ```text
//! m ω̈_i + ω̇_i = (K/N) Σ_l a_il cos(θ_l − θ_i + α) (ω_l − ω_i).
//! ```
//!
//! Coupling sums run over `l` in ascending order so that results are
//! reproducible bit for bit.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Inertia `m > 0`.
    pub m: f64,
    /// Coupling strength `K > 0`.
    #[serde(rename = "K")]
    pub coupling_k: f64,
    /// Frustration `α ∈ (0, π/2)`.
    pub alpha: f64,
    pub omega_natural: Vec<f64>,
}

impl ModelParams {
    pub fn new(m: f64, coupling_k: f64, alpha: f64, omega_natural: Vec<f64>) -> Result<Self> {
        let p = Self { m, coupling_k, alpha, omega_natural };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(Error::BadParams(format!("inertia m must be positive, got {}", self.m)));
        }
        if !(self.coupling_k.is_finite() && self.coupling_k > 0.0) {
            return Err(Error::BadParams(format!(
                "coupling K must be positive, got {}",
                self.coupling_k
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < FRAC_PI_2) {
            return Err(Error::BadParams(format!(
                "frustration alpha must lie in (0, pi/2), got {}",
                self.alpha
            )));
        }
        if self.omega_natural.is_empty() || self.omega_natural.iter().any(|w| !w.is_finite()) {
            return Err(Error::BadParams("natural frequencies must be finite and nonempty".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.omega_natural.len()
    }

    pub fn sqrt_k(&self) -> f64 {
        self.coupling_k.sqrt()
    }
}

/// Phases (unwrapped, never reduced mod 2π) and frequencies at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscState {
    pub t: f64,
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
}

impl OscState {
    pub fn new(theta: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        let s = Self { t: 0.0, theta, omega };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta.is_empty() {
            return Err(Error::EmptyVector);
        }
        if self.theta.len() != self.omega.len() {
            return Err(Error::DimensionMismatch {
                what: "omega",
                expected: self.theta.len(),
                found: self.omega.len(),
            });
        }
        if !self.is_finite() {
            return Err(Error::BadParams("state entries must be finite".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.theta.iter().chain(&self.omega).all(|x| x.is_finite())
    }
}

pub(crate) fn check_dims(state: &OscState, params: &ModelParams, graph: &WeightedGraph) -> Result<()> {
    let n = graph.n();
    for (what, found) in [
        ("theta", state.theta.len()),
        ("omega", state.omega.len()),
        ("omega_natural", params.omega_natural.len()),
    ] {
        if found != n {
            return Err(Error::DimensionMismatch { what, expected: n, found });
        }
    }
    Ok(())
}

/// Writes `ω̇` for phases `theta` and frequencies `omega` into `out`.
///
/// Slices must all have the graph's length; callers check this.
#[inline]
pub(crate) fn accel_into(
    theta: &[f64],
    omega: &[f64],
    params: &ModelParams,
    graph: &WeightedGraph,
    out: &mut [f64],
) {
    let gain = params.coupling_k / graph.n() as f64;
    let alpha = params.alpha;
    for (i, o) in out.iter_mut().enumerate() {
        let ti = theta[i];
        let mut coupling = 0.0;
        for &(l, a) in graph.neighbors(i) {
            coupling += a * (theta[l] - ti + alpha).sin();
        }
        *o = (params.omega_natural[i] - omega[i] + gain * coupling) / params.m;
    }
}

/// `(θ̇, ω̇)` of the second-order phase system.
pub fn phase_rhs(
    state: &OscState,
    params: &ModelParams,
    graph: &WeightedGraph,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let domega = acceleration(state, params, graph)?;
    Ok((state.omega.clone(), domega))
}

/// `ω̇`, the frequency component of [`phase_rhs`].
pub fn acceleration(state: &OscState, params: &ModelParams, graph: &WeightedGraph) -> Result<Vec<f64>> {
    check_dims(state, params, graph)?;
    let mut out = vec![0.0; graph.n()];
    accel_into(&state.theta, &state.omega, params, graph, &mut out);
    Ok(out)
}

/// `ω̈` from the frequency system after expanding `cos(x + α)`:
///
/// `m ω̈_i + ω̇_i = (K/N) cos α Σ a_il cos(θ_l−θ_i)(ω_l−ω_i) − (K/N) sin α Σ a_il sin(θ_l−θ_i)(ω_l−ω_i)`.
///
/// Diagnostic only; the integrator never calls this.
pub fn frequency_rhs_expanded(
    state: &OscState,
    params: &ModelParams,
    graph: &WeightedGraph,
    accel: &[f64],
) -> Result<Vec<f64>> {
    check_dims(state, params, graph)?;
    check_len("accel", accel.len(), graph.n())?;
    let gain = params.coupling_k / graph.n() as f64;
    let (sa, ca) = params.alpha.sin_cos();
    let (theta, omega) = (&state.theta, &state.omega);
    Ok((0..graph.n())
        .map(|i| {
            let (mut cos_part, mut sin_part) = (0.0, 0.0);
            for &(l, a) in graph.neighbors(i) {
                let (s, c) = (theta[l] - theta[i]).sin_cos();
                let dw = omega[l] - omega[i];
                cos_part += a * c * dw;
                sin_part += a * s * dw;
            }
            (gain * ca * cos_part - gain * sa * sin_part - accel[i]) / params.m
        })
        .collect())
}

/// `ω̈` from the compact frequency system with `cos(θ_l − θ_i + α)`.
pub fn frequency_rhs_compact(
    state: &OscState,
    params: &ModelParams,
    graph: &WeightedGraph,
    accel: &[f64],
) -> Result<Vec<f64>> {
    check_dims(state, params, graph)?;
    check_len("accel", accel.len(), graph.n())?;
    let gain = params.coupling_k / graph.n() as f64;
    let (theta, omega) = (&state.theta, &state.omega);
    Ok((0..graph.n())
        .map(|i| {
            let mut coupling = 0.0;
            for &(l, a) in graph.neighbors(i) {
                coupling += a * (theta[l] - theta[i] + params.alpha).cos() * (omega[l] - omega[i]);
            }
            (gain * coupling - accel[i]) / params.m
        })
        .collect())
}

fn check_len(what: &'static str, found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch { what, expected, found });
    }
    Ok(())
}
