//! Deterministic stand-in for the core simulator.
//!
//! A decoded core map is turned into the eight figures of merit by a
//! diffusion-flavoured nearest-neighbour power model, then scored with the
//! penalized LCOE objective. The module also hosts the lattice benchmark
//! objectives and the exhaustive oracle used by the tests.

mod benchmark;
mod brute;
mod constraints;
mod core_objective;
mod physics;

pub use benchmark::{benchmark_objective, BenchmarkKind, BenchmarkObjective};
pub use brute::{brute_force, enumerate, BruteForce, BRUTE_FORCE_LIMIT};
pub use constraints::{score_foms, Constraint, ConstraintSection, ConstraintSet, Direction, Fom, DEFAULT_GAMMA};
pub use core_objective::CoreObjective;
pub use physics::{
    evaluate_core, kinf, power_map, power_map_from, FomVector, SurrogateCoefficients,
    LCOE_SENTINEL,
};
