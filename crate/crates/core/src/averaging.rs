//! Exponentially averaged surrogate gradient `d_t = (1 - rho) d_{t-1} + rho g`.

use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateGradient {
    d: Point,
    t: u64,
}

impl SurrogateGradient {
    /// `d_0 = 0`.
    pub fn new(dim: usize) -> Self {
        SurrogateGradient { d: Point::zeros(dim), t: 0 }
    }

    pub fn direction(&self) -> &Point {
        &self.d
    }

    pub fn iteration(&self) -> u64 {
        self.t
    }

    /// Consumes the state and returns the next one.
    pub fn update(self, g: &Point, rho: f64) -> Result<Self> {
        update_surrogate(self, g, rho)
    }
}

pub fn update_surrogate(state: SurrogateGradient, g: &Point, rho: f64) -> Result<SurrogateGradient> {
    g.check_dim(state.d.dim())?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidAveragingWeight(rho));
    }
    let coords = state.d.iter().zip(g.iter()).map(|(d, gi)| (1.0 - rho) * d + rho * gi).collect();
    Ok(SurrogateGradient { d: Point::from_vec_unchecked(coords), t: state.t + 1 })
}
