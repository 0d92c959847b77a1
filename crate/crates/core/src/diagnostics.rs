//! Scalars tracked along a run: diameters, the energy functionals, the
//! constant `C₁`, the predicted trapping time and decay-rate fits.
//!
//! Every pair sum ranges over all ordered pairs `(i, j) ∈ {1..N}²`, diagonal
//! included.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::dynamics::{acceleration, accel_into, check_dims, ModelParams, OscState};
use crate::error::{Error, Result};
use crate::graph::{GraphConstants, WeightedGraph};
use crate::integrate::Trajectory;

/// Values at or below this are treated as numerically zero by the decay fit.
pub const DECAY_FLOOR: f64 = 1e-13;

/// Minimum number of qualifying samples for a decay fit.
pub const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagSample {
    pub t: f64,
    pub d_theta: f64,
    pub d_omega: f64,
    pub e1: f64,
    pub e2: f64,
}

/// `max(x) − min(x)`.
pub fn diameter(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyVector);
    }
    Ok(spread(x))
}

fn spread(x: &[f64]) -> f64 {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// `Σ_{i,j} (x_i − x_j)²`.
pub fn pair_sq_sum(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for &xi in x {
        for &xj in x {
            let d = xi - xj;
            s += d * d;
        }
    }
    s
}

/// `Σ_{i,j} (x_i − x_j)(y_i − y_j)`.
pub fn pair_cross_sum(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            s += (x[i] - x[j]) * (y[i] - y[j]);
        }
    }
    s
}

/// `D_Ω = Σ_{i,j} |Ω_i − Ω_j|²`.
pub fn d_omega_nat(omega_natural: &[f64]) -> Result<f64> {
    if omega_natural.is_empty() {
        return Err(Error::EmptyVector);
    }
    Ok(pair_sq_sum(omega_natural))
}

/// The three weighted pair sums making up either energy functional:
/// `2m Σ Δx Δy + (1 − m√K) Σ Δx² + 2m² Σ Δy²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    pub cross: f64,
    pub primary: f64,
    pub secondary: f64,
}

impl EnergyTerms {
    pub fn new(x: &[f64], y: &[f64], params: &ModelParams) -> Self {
        let m = params.m;
        Self {
            cross: 2.0 * m * pair_cross_sum(x, y),
            primary: (1.0 - m * params.sqrt_k()) * pair_sq_sum(x),
            secondary: 2.0 * m * m * pair_sq_sum(y),
        }
    }

    pub fn value(&self) -> f64 {
        self.cross + self.primary + self.secondary
    }

    /// Sum of term magnitudes, the scale of the rounding error in [`value`](Self::value).
    pub fn magnitude(&self) -> f64 {
        self.cross.abs() + self.primary.abs() + self.secondary.abs()
    }
}

/// Phase energy `ℰ₁` in relative phases and frequencies.
pub fn energy_e1(state: &OscState, params: &ModelParams) -> Result<f64> {
    check_pair(state, params)?;
    Ok(EnergyTerms::new(&state.theta, &state.omega, params).value())
}

/// Frequency energy `ℰ₂` in relative frequencies and accelerations, with `ω̇`
/// taken from the model equation.
pub fn energy_e2(state: &OscState, params: &ModelParams, graph: &WeightedGraph) -> Result<f64> {
    let accel = acceleration(state, params, graph)?;
    Ok(EnergyTerms::new(&state.omega, &accel, params).value())
}

fn check_pair(state: &OscState, params: &ModelParams) -> Result<()> {
    let n = params.n();
    for (what, found) in [("theta", state.theta.len()), ("omega", state.omega.len())] {
        if found != n {
            return Err(Error::DimensionMismatch { what, expected: n, found });
        }
    }
    Ok(())
}

/// Diagnostics of one state. Dimensions must already agree.
pub(crate) fn sample_diagnostics(state: &OscState, params: &ModelParams, graph: &WeightedGraph) -> DiagSample {
    debug_assert!(check_dims(state, params, graph).is_ok());
    let mut accel = vec![0.0; graph.n()];
    accel_into(&state.theta, &state.omega, params, graph, &mut accel);
    DiagSample {
        t: state.t,
        d_theta: spread(&state.theta),
        d_omega: spread(&state.omega),
        e1: EnergyTerms::new(&state.theta, &state.omega, params).value(),
        e2: EnergyTerms::new(&state.omega, &accel, params).value(),
    }
}

/// The forcing constant of the phase-energy differential inequality,
///
/// ```text
/// C₁ = [3(1+|Eᶜ|r)D₀ / (K^{3/2} a_l cos α sin D₀) + 12 m / K^{1/2}] D_Ω
///    + 12 N² K^{1/2} a_u² sin²α [(1+|Eᶜ|r)D₀ / (a_l cos α sin D₀) + 4mK].
/// ```
pub fn constant_c1(
    params: &ModelParams,
    gc: &GraphConstants,
    d0: f64,
    n: usize,
    d_omega_nat_value: f64,
) -> Result<f64> {
    if !(d0 > 0.0 && d0 < PI) {
        return Err(Error::BadDomain(format!("D0 must lie in (0, pi), got {d0}")));
    }
    let (m, k) = (params.m, params.coupling_k);
    let (sa, ca) = params.alpha.sin_cos();
    let spread = gc.spread_factor();
    let geometric = spread * d0 / (gc.a_l * ca * d0.sin());
    let forcing = (3.0 * geometric / k.powf(1.5) + 12.0 * m / k.sqrt()) * d_omega_nat_value;
    let frustration = 12.0 * (n * n) as f64 * k.sqrt() * gc.a_u * gc.a_u * sa * sa * (geometric + 4.0 * m * k);
    Ok(forcing + frustration)
}

/// Time after which `ℰ₁ ≤ D∞²/8` is guaranteed:
/// zero when `ℰ₁(0) ≤ D∞²/8`, otherwise `(ℰ₁(0) − D∞²/8) / (√K D∞² / 16)`.
pub fn predicted_t_star(e1_initial: f64, d_inf: f64, coupling_k: f64) -> Result<f64> {
    if !(d_inf > 0.0 && d_inf < FRAC_PI_2) {
        return Err(Error::BadDomain(format!("D_inf must lie in (0, pi/2), got {d_inf}")));
    }
    if !(coupling_k > 0.0 && coupling_k.is_finite()) {
        return Err(Error::BadDomain(format!("K must be positive, got {coupling_k}")));
    }
    let trap = d_inf * d_inf / 8.0;
    if e1_initial <= trap {
        return Ok(0.0);
    }
    Ok((e1_initial - trap) / (coupling_k.sqrt() * d_inf * d_inf / 16.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Negated slope of `ln y` against `t`; positive means decaying.
    pub rate: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares fit of `ln(D(ω))` against `t` over samples with `t ≥ t_from`
/// and `D(ω)` above [`DECAY_FLOOR`].
pub fn fit_decay_rate(trajectory: &Trajectory, t_from: f64) -> Result<DecayFit> {
    let points: Vec<(f64, f64)> = trajectory
        .diags()
        .filter(|d| d.t >= t_from)
        .map(|d| (d.t, d.d_omega))
        .collect();
    fit_log_linear(&points)
}

/// Ordinary least squares of `ln y` on `t` for `(t, y)` points above the floor.
pub fn fit_log_linear(points: &[(f64, f64)]) -> Result<DecayFit> {
    if points.is_empty() {
        return Err(Error::TooFewSamples { found: 0, needed: MIN_FIT_SAMPLES });
    }
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, y)| *y > DECAY_FLOOR)
        .map(|&(t, y)| (t, y.ln()))
        .collect();
    if kept.is_empty() && points.len() >= MIN_FIT_SAMPLES {
        return Err(Error::AlreadyConverged);
    }
    if kept.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples { found: kept.len(), needed: MIN_FIT_SAMPLES });
    }
    let n = kept.len() as f64;
    let t_mean = kept.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = kept.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in &kept {
        let (dt, dy) = (t - t_mean, y - y_mean);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(Error::TooFewSamples { found: 1, needed: MIN_FIT_SAMPLES });
    }
    let slope = sty / stt;
    let ss_res: f64 = kept
        .iter()
        .map(|&(t, y)| {
            let r = y - (y_mean + slope * (t - t_mean));
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(DecayFit { rate: -slope, r_squared, samples: kept.len() })
}
