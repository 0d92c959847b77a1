//! JSON run configuration.
//!
//! ```json
//! {
//!   "graph": {"kind": "ring", "n": 5},
//!   "params": {"m": 1e-4, "K": 100.0, "alpha": 1e-4,
//!              "omega_natural": {"kind": "uniform", "low": -5e-4, "high": 5e-4, "seed": 1}},
//!   "initial": {"theta": {"kind": "uniform", "low": -0.05, "high": 0.05, "seed": 2},
//!               "omega": [0, 0, 0, 0, 0]},
//!   "integration": {"dt": 1e-5, "t_max": 1.0, "sample_every": 100},
//!   "thresholds": {"d0": 3.0, "d_inf": 1.0},
//!   "k_grid": {"k_min": 1.0, "factor": 1.1, "count": 200}
//! }
//! ```
//!
//! `m`, `K` and `alpha` may be omitted for `scan`, which sets them along the
//! curve `m = α = K⁻²`. Omitted integration fields default to
//! `dt = min(m/10, 0.1/√K)`, `t_max = t* + 10/√K` and about 4000 samples.
//! Random vectors draw `n` uniforms from a SplitMix64 stream seeded with `seed`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assumptions::{check_assumption_a, KGrid};
use crate::dynamics::{ModelParams, OscState};
use crate::error::{Error, Result};
use crate::experiments::{default_plan, VerifyConfig, DEFAULT_SAMPLES};
use crate::graph::{generate, GraphSpec, WeightedGraph};
use crate::integrate::{recommended_dt, IntegrationPlan};
use crate::rng::SplitMix64;

pub const DEFAULT_D0: f64 = 3.0;
pub const DEFAULT_D_INF: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSpec,
    pub params: ParamsSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub integration: IntegrationSpec,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<KGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub coupling_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub omega_natural: VectorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub theta: VectorSpec,
    pub omega: VectorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Explicit(Vec<f64>),
    Random(RandomVector),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomKind {
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomVector {
    pub kind: RandomKind,
    pub low: f64,
    pub high: f64,
    pub seed: u64,
}

impl VectorSpec {
    pub fn resolve(&self, what: &str, n: usize) -> Result<Vec<f64>> {
        let v = match self {
            VectorSpec::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::Config(format!("{what} has {} entries, graph has {n} vertices", v.len())));
                }
                v.clone()
            }
            VectorSpec::Random(RandomVector { kind: RandomKind::Uniform, low, high, seed }) => {
                if !(low.is_finite() && high.is_finite() && low <= high) {
                    return Err(Error::Config(format!("{what}: need finite low <= high")));
                }
                SplitMix64::new(*seed).fill_uniform(n, *low, *high)
            }
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config(format!("{what} has non-finite entries")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default = "default_d0")]
    pub d0: f64,
    #[serde(default = "default_d_inf")]
    pub d_inf: f64,
}

fn default_d0() -> f64 {
    DEFAULT_D0
}

fn default_d_inf() -> f64 {
    DEFAULT_D_INF
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { d0: DEFAULT_D0, d_inf: DEFAULT_D_INF }
    }
}

/// Graph, parameters and initial state produced from a config.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: WeightedGraph,
    pub params: ModelParams,
    pub state0: OscState,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build_graph(&self) -> Result<WeightedGraph> {
        generate(&self.graph)
    }

    pub fn omega_natural(&self, n: usize) -> Result<Vec<f64>> {
        self.params.omega_natural.resolve("omega_natural", n)
    }

    pub fn initial_state(&self, n: usize) -> Result<OscState> {
        let theta = self.initial.theta.resolve("initial.theta", n)?;
        let omega = self.initial.omega.resolve("initial.omega", n)?;
        OscState::new(theta, omega)
    }

    /// Graph, parameters and initial state; `m`, `K` and `alpha` must be set.
    pub fn instance(&self) -> Result<Instance> {
        let graph = self.build_graph()?;
        let n = graph.n();
        let missing = |name: &str| Error::Config(format!("params.{name} is required"));
        let params = ModelParams::new(
            self.params.m.ok_or_else(|| missing("m"))?,
            self.params.coupling_k.ok_or_else(|| missing("K"))?,
            self.params.alpha.ok_or_else(|| missing("alpha"))?,
            self.omega_natural(n)?,
        )?;
        let state0 = self.initial_state(n)?;
        Ok(Instance { graph, params, state0 })
    }

    /// Integration plan with defaults filled in; `t_star` feeds the default horizon.
    pub fn plan(&self, params: &ModelParams, t_star: f64) -> Result<IntegrationPlan> {
        let spec = self.integration;
        let base = default_plan(params, t_star)?;
        let dt = spec.dt.unwrap_or_else(|| recommended_dt(params));
        let t_max = spec.t_max.unwrap_or(base.t_max.max(dt));
        let sample_every = match spec.sample_every {
            Some(s) => s,
            None => ((t_max / dt).ceil() as u64 / DEFAULT_SAMPLES).max(1),
        };
        IntegrationPlan::new(dt, t_max, sample_every)
    }

    /// Everything `verify` needs. Computes `t*` to fill a default horizon.
    pub fn verify_config(&self) -> Result<VerifyConfig> {
        let Instance { graph, params, state0 } = self.instance()?;
        let Thresholds { d0, d_inf } = self.thresholds;
        let t_star = if self.integration.t_max.is_some() {
            0.0
        } else {
            check_assumption_a(&state0, &params, &graph, d0, d_inf)?.t_star
        };
        let plan = self.plan(&params, t_star)?;
        Ok(VerifyConfig { graph, params, state0, plan, d0, d_inf })
    }
}
