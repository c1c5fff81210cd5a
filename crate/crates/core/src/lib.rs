//! Exact-arithmetic engine for deriving outcome weights of multiple-channel
//! experiments from operational consistency constraints.
//!
//! The library models an experiment as a triple of initial state, diagonal
//! observable, and payoff map, generates the model transformations that any
//! consistent expectation rule must respect (relabeling, coarsening, phase
//! rotation, channel permutation, channel refinement), and solves the induced
//! linear constraints on channel weights. For states with rational squared
//! magnitudes the unique solution is computed exactly over the rationals; the
//! general case is reached through a continuity limit. Companion modules
//! provide an l^p falsification harness, a decision-theoretic derivation path
//! (zero-sum and additivity rules), and a seeded Monte Carlo simulator with a
//! hidden-variable counterexample.
//!
//! Channel and basis indices are 0-based throughout.

pub mod amplitude;
pub mod decision;
pub mod equivalence;
pub mod error;
pub mod json;
pub mod lp;
pub mod model;
pub mod rational;
pub mod sim;
pub mod solver;
pub mod state;
pub mod testkit;
pub mod value;

pub use amplitude::Amplitude;
pub use error::CoreError;
pub use model::{
    ExperimentalModel, ModelError, MultipleChannelExperiment, PayoffMap, RealizationReport,
    WeightVector,
};
pub use rational::Rat;
pub use solver::{DerivationReport, Method, SolverError};
pub use state::{Isometry, Observable, StateVector};
pub use value::Value;
