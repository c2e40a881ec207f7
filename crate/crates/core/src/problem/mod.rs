//! Loading-pattern problem instances and the sequential decoder.
//!
//! A decision vector holds one integer per symmetry-reduced core slot. The
//! decoder walks the slots in a fixed order, maps each entry to a fresh fuel
//! type or a burned batch, repairs unavailable or ineligible picks, and
//! expands the reduced map to the full core.

mod catalog;
mod decode;
mod file;
mod instance;
mod layout;
pub mod scenarios;
mod tactics;

pub use catalog::{build_catalog, BurnClass, BurnedAssembly, FuelType};
pub use decode::{Assignment, CoreMap, DecodeTrace};
pub use instance::{Choice, ProblemInstance, Tactics};
pub use layout::{CoreLayout, LocationClass, Slot, Symmetry};
pub use tactics::{check_tactics, Tactic, Violation};
