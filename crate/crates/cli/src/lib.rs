//! Scenario files, batch runs, property suites and coefficient tables for
//! the `recoflow` binary.
//!
//! Exit codes: 0 success, 1 failed property check, 2 parse or input error,
//! 3 invalid scenario, 4 closed form and RK4 disagree.

pub mod commands;
pub mod error;
pub mod scenario;

pub use commands::Format;
pub use error::CliError;
pub use scenario::{Comparison, Component, CyclicSpec, Initial, RateSpec, Scenario, Solver, TimeGrid};
