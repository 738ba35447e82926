use thiserror::Error;

use crate::solvers::RunTrace;

/// Errors raised by the optimization library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point must have at least one coordinate")]
    EmptyPoint,

    #[error("non-finite coordinate {value} at index {index}")]
    NonFinitePoint { index: usize, value: f64 },

    #[error("step size {0} outside [0, 1]")]
    InvalidStep(f64),

    #[error("averaging weight {0} outside (0, 1]")]
    InvalidAveragingWeight(f64),

    #[error("smoothing parameter {0} must be at least 1e-12")]
    InvalidSmoothing(f64),

    #[error("oracle returned non-finite value {value}{}", coordinate.map(|c| format!(" at coordinate {c}")).unwrap_or_default())]
    NonFiniteOracle { coordinate: Option<usize>, value: f64 },

    #[error("zero direction carries no information")]
    DegenerateDirection,

    #[error("direction list is empty")]
    EmptyDirections,

    #[error("number of directions m = {m} must satisfy 1 <= m <= d = {dim}")]
    InvalidDirectionCount { m: usize, dim: usize },

    #[error("horizon must contain at least one iteration")]
    EmptyHorizon,

    #[error("schedule {schedule} cannot drive estimator {estimator}")]
    ScheduleMismatch { schedule: String, estimator: String },

    #[error("point is outside the feasible set")]
    Infeasible,

    #[error("feasible set parameter invalid: {0}")]
    InvalidSet(String),

    #[error("exponent delta = {0} outside (1/2, 1)")]
    InvalidExponent(f64),

    #[error("sequence parameter invalid: {0}")]
    InvalidSequence(String),

    #[error("rate fit needs positive values, got {value} at t = {t}")]
    NonPositiveValue { t: f64, value: f64 },

    #[error("rate fit window holds {0} points, at least 10 required")]
    WindowTooShort(usize),

    #[error("exact gradient unavailable for this problem")]
    MissingGradient,

    #[error("stochastic gradient unavailable for this problem")]
    MissingStochasticGradient,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset has no observed events")]
    NoEvents,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("run aborted at iteration {iteration}: {cause}")]
    Aborted {
        iteration: u64,
        cause: Box<Error>,
        partial: Box<RunTrace>,
    },
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
