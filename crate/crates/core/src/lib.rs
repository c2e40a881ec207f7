//! Parallel metaheuristics and policy-gradient search for PWR core
//! loading-pattern design.
//!
//! The crate bundles a deterministic core surrogate, five optimizers
//! (PPO as a contextual bandit, parallel simulated annealing with the Lam
//! schedule, parallel tabu search, a (μ,λ) evolution strategy, and the PESA
//! ensemble), and the Friedman/Nemenyi harness used to compare them.

pub mod error;
pub mod eval;
pub mod rng;

pub mod problem;
pub mod surrogate;

pub mod es;
pub mod pesa;
pub mod ppo;
pub mod psa;
pub mod tabu;

pub mod harness;
pub mod stats;

pub use error::{Error, Result};
pub use eval::{Bounds, Evaluation, Evaluator, Objective, RunOutcome, RunRecord};
