//! Generation, evaluation and certification of tripartite correlations.
//!
//! The crate has three layers:
//!
//! * [`qstate`] and [`behavior`] provide the raw material: dense n-qubit
//!   states with projective measurements, and the conditional-distribution
//!   type [`behavior::Behavior`] that every other module consumes.
//! * [`games`] and [`strategies`] evaluate the GHZ Bell-plus-consistency
//!   inequality and build the canonical behaviors that saturate it: the
//!   GHZ quantum strategy, the algebraic-maximum nonsignalling box, noisy
//!   families, and the classical (shared-randomness) optimum.
//! * [`inflation`] and [`lpsolve`] decide whether a behavior is compatible
//!   with *any* model built from bipartite resources plus global shared
//!   randomness, by assembling a linear feasibility program over a
//!   replicated ("inflated") experiment and solving it with verifiable
//!   Farkas certificates on the infeasible side.

pub mod behavior;
pub mod error;
pub mod games;
pub mod inflation;
pub mod lpsolve;
pub mod qstate;
pub mod strategies;

pub use behavior::{Behavior, NonsignallingReport, Party};
pub use error::{Error, Result};
pub use games::Ghz3Score;
pub use inflation::{certify, CertifyConfig, FeasibilityOutcome, InflationGraph, Verdict};
pub use qstate::{BinaryObservable, QuantumState};

/// Crate version, surfaced in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
