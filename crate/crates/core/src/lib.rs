//! Inertial, frustrated Kuramoto oscillators on symmetric weighted graphs.
//!
//! The crate simulates
//!
//! ```text
//! m θ̈_i + θ̇_i = Ω_i + (K/N) Σ_l a_il sin(θ_l − θ_i + α)
//! ```
//!
//! with a fixed-step RK4 integrator and checks a sufficient parameter regime
//! for exponential frequency synchronization: energy functionals, the
//! trapping time of the phase diameter and the decay of the frequency
//! diameter at rate at least `√K/2`.

pub mod assumptions;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod integrate;
pub mod rng;

pub use assumptions::{check_assumption_a, scan_regime, suggest_regime, AssumptionReport, KGrid, Regime};
pub use diagnostics::{DiagSample, DecayFit};
pub use dynamics::{ModelParams, OscState};
pub use error::{Error, Result};
pub use experiments::{verify_theorem, VerificationReport, VerifyConfig};
pub use graph::{generate, GraphConstants, GraphKind, GraphSpec, WeightedGraph};
pub use integrate::{integrate, IntegrationPlan, Trajectory};
