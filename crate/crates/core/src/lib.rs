//! Zeroth-order stochastic Frank-Wolfe for constrained problems where only
//! noisy function values are available, with first-order baselines, test
//! objectives and rate-verification tooling.

pub mod averaging;
pub mod checks;
pub mod direction;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod lmo;
pub mod metrics;
pub mod oracle;
pub mod point;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use estimators::Estimator;
pub use lmo::{FeasibleSet, SetKind};
pub use oracle::{ExactOracle, Objective, SampleHandle, StochasticOracle};
pub use point::Point;
pub use solvers::{RunTrace, Schedule, SolverOptions};
