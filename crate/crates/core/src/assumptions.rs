//! The sufficient regime for exponential frequency synchronization, evaluated
//! clause by clause with numeric margins, and a scan along `m = α = K⁻²`.
//!
//! | id | clause      | inequality                                                                  |
//! |----|-------------|-----------------------------------------------------------------------------|
//! | c1 | energy      | `ℰ₁(0) < D₀²/8`                                                              |
//! | c1 | ordering    | `D∞ < D₀`                                                                    |
//! | c2 | frustration | `sin α < a_l cos α cos D∞ / (12 a_u (1+r|Eᶜ|) sin D∞)`                      |
//! | c2 | inertia     | `m < 1`                                                                     |
//! | c3 | coupling    | `√K > (1+r|Eᶜ|)/(a_l cos α) · max{D₀/sin D₀, 1/cos D∞}`                     |
//! | c4 | inertia     | `m√K < 1/8`                                                                 |
//! | c4 | product     | `mK < a_l/(a_u²(1+r|Eᶜ|) cos α) · min{sin D₀/(36 D₀), cos D∞/24}`           |
//! | c5 | frustration | `K sin α < 1/(8 a_u sin D∞)`                                                |
//! | c6 | forcing     | `C₁ < D∞²/16`                                                               |
//!
//! Strict inequalities are compared exactly; margins are always `rhs − lhs`.
//! `D∞ ∈ (0, π/2)` and `D₀ ∈ (0, π)` are domain preconditions.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{constant_c1, d_omega_nat, energy_e1, predicted_t_star};
use crate::dynamics::{check_dims, ModelParams, OscState};
use crate::error::{Error, Result};
use crate::graph::{WeightedGraph, EC_CONVENTION};

/// Condition groups, in report order.
pub const CONDITION_IDS: [&str; 6] = ["c1", "c2", "c3", "c4", "c5", "c6"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub id: String,
    pub clause: String,
    pub description: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub margin: f64,
}

impl Condition {
    /// Records `lhs < rhs`.
    fn less(id: &str, clause: &str, description: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            id: id.into(),
            clause: clause.into(),
            description: description.into(),
            lhs,
            rhs,
            holds: lhs < rhs,
            margin: rhs - lhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub conditions: Vec<Condition>,
    #[serde(rename = "c1_constant")]
    pub c1: f64,
    pub e1_initial: f64,
    pub t_star: f64,
    pub all_hold: bool,
    pub ec_convention: String,
}

impl AssumptionReport {
    pub fn group(&self, id: &str) -> impl Iterator<Item = &Condition> + '_ {
        let id = id.to_owned();
        self.conditions.iter().filter(move |c| c.id == id)
    }

    pub fn group_holds(&self, id: &str) -> bool {
        self.group(id).all(|c| c.holds)
    }

    /// Smallest margin among the clauses of group `id`.
    pub fn group_margin(&self, id: &str) -> f64 {
        self.group(id).map(|c| c.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn margin_min(&self) -> f64 {
        self.conditions.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn failing(&self) -> impl Iterator<Item = &Condition> + '_ {
        self.conditions.iter().filter(|c| !c.holds)
    }
}

pub fn check_thresholds(d0: f64, d_inf: f64) -> Result<()> {
    if !(d_inf > 0.0 && d_inf < FRAC_PI_2) {
        return Err(Error::BadDomain(format!("D_inf must lie in (0, pi/2), got {d_inf}")));
    }
    if !(d0 > 0.0 && d0 < PI) {
        return Err(Error::BadDomain(format!("D0 must lie in (0, pi), got {d0}")));
    }
    Ok(())
}

/// Evaluates every clause; never short-circuits.
pub fn check_assumption_a(
    state0: &OscState,
    params: &ModelParams,
    graph: &WeightedGraph,
    d0: f64,
    d_inf: f64,
) -> Result<AssumptionReport> {
    check_thresholds(d0, d_inf)?;
    params.validate()?;
    check_dims(state0, params, graph)?;
    let gc = graph.constants()?;

    let (m, k) = (params.m, params.coupling_k);
    let sqrt_k = params.sqrt_k();
    let (sa, ca) = params.alpha.sin_cos();
    let spread = gc.spread_factor();
    let (a_l, a_u) = (gc.a_l, gc.a_u);
    let n = graph.n();

    let e1_initial = energy_e1(state0, params)?;
    let c1 = constant_c1(params, &gc, d0, n, d_omega_nat(&params.omega_natural)?)?;
    let t_star = predicted_t_star(e1_initial, d_inf, k)?;

    let conditions = vec![
        Condition::less("c1", "energy", "E1(0) < D0^2/8", e1_initial, d0 * d0 / 8.0),
        Condition::less("c1", "ordering", "D_inf < D0", d_inf, d0),
        Condition::less(
            "c2",
            "frustration",
            "sin(alpha) < a_l cos(alpha) cos(D_inf) / (12 a_u (1+r|Ec|) sin(D_inf))",
            sa,
            a_l * ca * d_inf.cos() / (12.0 * a_u * spread * d_inf.sin()),
        ),
        Condition::less("c2", "inertia", "m < 1", m, 1.0),
        Condition::less(
            "c3",
            "coupling",
            "(1+r|Ec|)/(a_l cos(alpha)) max{D0/sin(D0), 1/cos(D_inf)} < sqrt(K)",
            spread / (a_l * ca) * (d0 / d0.sin()).max(1.0 / d_inf.cos()),
            sqrt_k,
        ),
        Condition::less("c4", "inertia", "m sqrt(K) < 1/8", m * sqrt_k, 0.125),
        Condition::less(
            "c4",
            "product",
            "m K < a_l/(a_u^2 (1+r|Ec|) cos(alpha)) min{sin(D0)/(36 D0), cos(D_inf)/24}",
            m * k,
            a_l / (a_u * a_u * spread * ca) * (d0.sin() / (36.0 * d0)).min(d_inf.cos() / 24.0),
        ),
        Condition::less(
            "c5",
            "frustration",
            "K sin(alpha) < 1/(8 a_u sin(D_inf))",
            k * sa,
            1.0 / (8.0 * a_u * d_inf.sin()),
        ),
        Condition::less("c6", "forcing", "C1 < D_inf^2/16", c1, d_inf * d_inf / 16.0),
    ];
    let all_hold = conditions.iter().all(|c| c.holds);
    // Consistency with the positivity lemmas, whose hypothesis is c4's first clause.
    debug_assert!(!all_hold || m * sqrt_k < 0.125);

    Ok(AssumptionReport {
        conditions,
        c1,
        e1_initial,
        t_star,
        all_hold,
        ec_convention: EC_CONVENTION.to_owned(),
    })
}

/// Geometric grid `K_j = k_min · factor^j`, `j = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub k_min: f64,
    pub factor: f64,
    pub count: usize,
}

/// Upper bound on grid length.
pub const MAX_GRID_POINTS: usize = 100_000;

impl KGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_min.is_finite() && self.k_min >= 1.0) {
            return Err(Error::BadOption(format!("k_min must be at least 1, got {}", self.k_min)));
        }
        if !(self.factor.is_finite() && self.factor > 1.0) {
            return Err(Error::BadOption(format!("factor must exceed 1, got {}", self.factor)));
        }
        if self.count == 0 || self.count > MAX_GRID_POINTS {
            return Err(Error::BadOption(format!(
                "count must lie in 1..={MAX_GRID_POINTS}, got {}",
                self.count
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.k_min * self.factor.powi(j as i32)).collect()
    }
}

/// A point on the `m = α = K⁻²` curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    #[serde(rename = "K")]
    pub coupling_k: f64,
    pub m: f64,
    pub alpha: f64,
}

impl Regime {
    pub fn on_curve(coupling_k: f64) -> Self {
        let inv_sq = 1.0 / (coupling_k * coupling_k);
        Self { coupling_k, m: inv_sq, alpha: inv_sq }
    }

    pub fn params(&self, omega_natural: Vec<f64>) -> Result<ModelParams> {
        ModelParams::new(self.m, self.coupling_k, self.alpha, omega_natural)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub regime: Regime,
    pub report: AssumptionReport,
}

/// Grid rows up to and including the first satisfying point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOutcome {
    pub rows: Vec<ScanRow>,
    pub found: Option<Regime>,
}

/// Evaluates the grid concurrently and keeps rows up to the first hit in grid order.
pub fn scan_regime(
    state0: &OscState,
    graph: &WeightedGraph,
    omega_natural: &[f64],
    d0: f64,
    d_inf: f64,
    grid: &KGrid,
) -> Result<ScanOutcome> {
    grid.validate()?;
    check_thresholds(d0, d_inf)?;
    let mut rows = grid
        .points()
        .into_par_iter()
        .map(|k| {
            let regime = Regime::on_curve(k);
            let params = regime.params(omega_natural.to_vec())?;
            let report = check_assumption_a(state0, &params, graph, d0, d_inf)?;
            Ok(ScanRow { regime, report })
        })
        .collect::<Result<Vec<_>>>()?;
    let found = rows.iter().position(|r| r.report.all_hold);
    if let Some(idx) = found {
        rows.truncate(idx + 1);
    }
    Ok(ScanOutcome { found: found.map(|i| rows[i].regime), rows })
}

/// First `K` on the grid with `m = α = K⁻²` satisfying every condition.
pub fn suggest_regime(
    state0: &OscState,
    graph: &WeightedGraph,
    omega_natural: &[f64],
    d0: f64,
    d_inf: f64,
    grid: &KGrid,
) -> Result<Regime> {
    let mut outcome = scan_regime(state0, graph, omega_natural, d0, d_inf, grid)?;
    match outcome.found {
        Some(regime) => Ok(regime),
        None => {
            let last = outcome.rows.pop().expect("grid is nonempty");
            Err(Error::NotFound(Box::new(last.report)))
        }
    }
}
