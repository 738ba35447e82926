use std::hash::{DefaultHasher, Hash, Hasher};

use crate::oracle::ExactOracle;
use crate::point::Point;

/// How the duality-gap column was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapKind {
    /// `max_v <grad f(x), x - v>` from the problem's exact gradient.
    Exact,
    /// `<d_t, x_t - v_t>` from the solver's own surrogate: a proxy for
    /// black-box runs.
    Surrogate,
}

/// What the cumulative call counter counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallKind {
    ZerothOrder,
    FirstOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub t: u64,
    pub x_hash: u64,
    /// `f(x_t)`, when an exact oracle is attached.
    pub objective: Option<f64>,
    pub primal_gap: Option<f64>,
    pub duality_gap: f64,
    /// `||grad f(x_t) - d_t||^2`, when the exact gradient is available.
    pub surrogate_error_sq: Option<f64>,
    pub gamma: f64,
    pub oracle_calls: u64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterRecord>,
    pub gap_kind: GapKind,
    pub call_kind: CallKind,
    pub final_point: Point,
    pub argmin_point: Point,
}

impl RunTrace {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    /// `min_t G(x_t)` and the iteration attaining it (first on ties).
    pub fn min_duality_gap(&self) -> (f64, u64) {
        self.records
            .iter()
            .fold((f64::INFINITY, 0), |(best, at), r| if r.duality_gap < best { (r.duality_gap, r.t) } else { (best, at) })
    }

    pub fn total_calls(&self) -> u64 {
        self.records.last().map_or(0, |r| r.oracle_calls)
    }

    pub fn primal_gaps(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.primal_gap).collect()
    }

    pub fn duality_gaps(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.duality_gap).collect()
    }

    pub fn surrogate_errors_sq(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.surrogate_error_sq).collect()
    }

    /// Running minimum of the duality gap.
    pub fn running_min_gap(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.records
            .iter()
            .map(|r| {
                best = best.min(r.duality_gap);
                best
            })
            .collect()
    }
}

/// Metrics-only view of the problem attached to a run.
#[derive(Clone, Copy, Default)]
pub struct Probe<'a> {
    pub exact: Option<&'a dyn ExactOracle>,
    pub f_star: Option<f64>,
}

impl<'a> Probe<'a> {
    pub fn none() -> Self {
        Probe::default()
    }

    pub fn new(exact: &'a dyn ExactOracle, f_star: Option<f64>) -> Self {
        Probe { exact: Some(exact), f_star }
    }
}

pub(crate) fn hash_point(x: &[f64]) -> u64 {
    let mut h = DefaultHasher::new();
    for v in x {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}
