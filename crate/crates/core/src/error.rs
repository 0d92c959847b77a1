use thiserror::Error;

use crate::assumptions::AssumptionReport;
use crate::experiments::Counterexample;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },

    #[error("weight matrix is empty")]
    EmptyGraph,

    /// Indices are 1-based, matching vertex labels `1..=n`.
    #[error("weights are not symmetric: a({i},{j}) != a({j},{i})")]
    AsymmetricWeights { i: usize, j: usize },

    #[error("negative weight at ({i},{j})")]
    NegativeWeight { i: usize, j: usize },

    #[error("self-loop weight at ({i},{i}) must be zero")]
    NonzeroDiagonal { i: usize },

    #[error("non-finite weight at ({i},{j})")]
    NonFiniteWeight { i: usize, j: usize },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("graph has no edges")]
    NoEdges,

    #[error("no connected graph found after {attempts} attempts")]
    ConnectivityUnreachable { attempts: usize },

    #[error("bad option: {0}")]
    BadOption(String),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid model parameters: {0}")]
    BadParams(String),

    #[error("invalid integration plan: {0}")]
    BadPlan(String),

    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: u64 },

    #[error("wall-clock budget exhausted after {completed} of {total} steps")]
    BudgetExceeded { completed: u64, total: u64 },

    #[error("empty vector")]
    EmptyVector,

    #[error("argument out of domain: {0}")]
    BadDomain(String),

    #[error("too few samples for decay fit: {found} qualifying, need {needed}")]
    TooFewSamples { found: usize, needed: usize },

    #[error("every sample is below the numerical floor")]
    AlreadyConverged,

    #[error("no grid point satisfies the assumption")]
    NotFound(Box<AssumptionReport>),

    #[error("horizon too short: t_max = {t_max}, need at least {required}")]
    HorizonTooShort { t_max: f64, required: f64 },

    #[error("no qualifying samples for check `{0}`")]
    NoQualifyingSamples(&'static str),

    #[error("counterexample found in trial {}", .0.trial)]
    CounterexampleFound(Box<Counterexample>),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
