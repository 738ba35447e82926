//! Zeroth-order gradient estimators built from forward differences.
//!
//! * KWSA differences along every canonical basis vector (`d + 1` queries).
//! * RDSA differences along one random direction `z` (2 queries).
//! * I-RDSA averages `m` RDSA terms sharing a single baseline query (`m + 1`).
//!
//! Every query inside one estimate uses the same sample handle, so the
//! stochastic part of `F(.; y)` that does not depend on `x` cancels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{SampleHandle, StochasticOracle};
use crate::point::Point;

/// Smallest smoothing step accepted; below this the difference quotient is
/// dominated by cancellation error.
pub const MIN_SMOOTHING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Estimator {
    Kwsa,
    Rdsa,
    Irdsa { m: usize },
}

impl Estimator {
    /// Oracle queries consumed by one estimate in dimension `dim`.
    pub fn queries_per_step(self, dim: usize) -> u64 {
        match self {
            Estimator::Kwsa => dim as u64 + 1,
            Estimator::Rdsa => 2,
            Estimator::Irdsa { m } => m as u64 + 1,
        }
    }

    pub fn validate(self, dim: usize) -> Result<()> {
        if let Estimator::Irdsa { m } = self {
            if m == 0 || m > dim {
                return Err(Error::InvalidDirectionCount { m, dim });
            }
        }
        Ok(())
    }

    pub fn name(self) -> String {
        match self {
            Estimator::Kwsa => "kwsa".into(),
            Estimator::Rdsa => "rdsa".into(),
            Estimator::Irdsa { m } => format!("irdsa(m={m})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub direction: Point,
    pub szo_calls: u64,
    pub smoothing_used: f64,
}

fn check_smoothing(c: f64) -> Result<()> {
    if c.is_nan() || c < MIN_SMOOTHING || c.is_infinite() {
        return Err(Error::InvalidSmoothing(c));
    }
    Ok(())
}

fn finite(value: f64, coordinate: Option<usize>) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteOracle { coordinate, value })
    }
}

fn finalize(g: Vec<f64>, szo_calls: u64, c: f64) -> Result<GradientEstimate> {
    let direction = Point::new(g).map_err(|e| match e {
        Error::NonFinitePoint { index, value } => Error::NonFiniteOracle { coordinate: Some(index), value },
        other => other,
    })?;
    Ok(GradientEstimate { direction, szo_calls, smoothing_used: c })
}

/// `g_i = [F(x + c e_i; y) - F(x; y)] / c`.
pub fn kwsa_estimate(
    oracle: &dyn StochasticOracle,
    x: &Point,
    c: f64,
    sample: SampleHandle,
) -> Result<GradientEstimate> {
    x.check_dim(oracle.dim())?;
    check_smoothing(c)?;
    let base = finite(oracle.query(x, sample), None)?;
    let mut probe = x.as_slice().to_vec();
    let mut g = Vec::with_capacity(x.dim());
    for i in 0..x.dim() {
        let orig = probe[i];
        probe[i] = orig + c;
        let shifted = finite(oracle.query(&probe, sample), Some(i))?;
        probe[i] = orig;
        g.push((shifted - base) / c);
    }
    finalize(g, x.dim() as u64 + 1, c)
}

fn check_direction(z: &Point, dim: usize) -> Result<()> {
    z.check_dim(dim)?;
    if z.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateDirection);
    }
    Ok(())
}

/// `g = [F(x + c z; y) - F(x; y)] / c * z`.
pub fn rdsa_estimate(
    oracle: &dyn StochasticOracle,
    x: &Point,
    c: f64,
    z: &Point,
    sample: SampleHandle,
) -> Result<GradientEstimate> {
    irdsa_estimate(oracle, x, c, std::slice::from_ref(z), sample)
}

/// `g = (1/m) sum_i [F(x + c z_i; y) - F(x; y)] / c * z_i` with one shared
/// baseline `F(x; y)`.
pub fn irdsa_estimate(
    oracle: &dyn StochasticOracle,
    x: &Point,
    c: f64,
    zs: &[Point],
    sample: SampleHandle,
) -> Result<GradientEstimate> {
    let dim = oracle.dim();
    x.check_dim(dim)?;
    check_smoothing(c)?;
    if zs.is_empty() {
        return Err(Error::EmptyDirections);
    }
    for z in zs {
        check_direction(z, dim)?;
    }
    let base = finite(oracle.query(x, sample), None)?;
    let mut g = vec![0.0; dim];
    let weight = 1.0 / zs.len() as f64;
    for z in zs {
        let shifted = finite(oracle.query(&x.offset(z, c), sample), None)?;
        let slope = (shifted - base) / c * weight;
        g.iter_mut().zip(z.iter()).for_each(|(gi, zi)| *gi += slope * zi);
    }
    finalize(g, zs.len() as u64 + 1, c)
}
