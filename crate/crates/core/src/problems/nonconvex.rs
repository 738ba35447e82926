use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NoiseModel;
use crate::error::{Error, Result};
use crate::oracle::{ExactOracle, SampleHandle, StochasticOracle};

const ROSEN_A: f64 = 0.5;
const ROSEN_B: f64 = 10.0;

/// Smooth non-convex test functions on `LinfBox(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonConvexKind {
    /// `sum_i 10 (x_{i+1} - x_i^2)^2 + sum_i (0.5 - x_i)^2`.
    Rosenbrock,
    /// Seeded double wells `x^4/4 - a_i x^2/2 + c_i x` with a weak symmetric coupling.
    RandomQuartic,
    /// `-1/2 sum_i cos(3 x_i)`.
    Trigonometric,
}

impl NonConvexKind {
    pub fn name(self) -> &'static str {
        match self {
            NonConvexKind::Rosenbrock => "rosenbrock",
            NonConvexKind::RandomQuartic => "random_quartic",
            NonConvexKind::Trigonometric => "trigonometric",
        }
    }
}

impl FromStr for NonConvexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rosenbrock" => Ok(NonConvexKind::Rosenbrock),
            "random_quartic" => Ok(NonConvexKind::RandomQuartic),
            "trigonometric" => Ok(NonConvexKind::Trigonometric),
            other => Err(Error::UnknownProblem(other.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NonConvex {
    kind: NonConvexKind,
    d: usize,
    /// Quartic well depths `a_i` and tilts `c_i`.
    wells: Vec<(f64, f64)>,
    /// Quartic coupling matrix, zero diagonal.
    coupling: Vec<f64>,
    noise: NoiseModel,
}

impl NonConvex {
    pub fn new(kind: NonConvexKind, d: usize, seed: u64, noise: NoiseModel) -> Result<Self> {
        if d == 0 {
            return Err(Error::EmptyPoint);
        }
        if !(noise.sigma >= 0.0 && noise.sigma.is_finite()) {
            return Err(Error::Config(format!("noise sigma {} must be non-negative", noise.sigma)));
        }
        let (mut wells, mut coupling) = (Vec::new(), Vec::new());
        if kind == NonConvexKind::RandomQuartic {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            wells = (0..d).map(|_| (rng.random_range(0.5..1.0), rng.random_range(-0.1..0.1))).collect();
            coupling = vec![0.0; d * d];
            let s = 0.2 / d as f64;
            for i in 0..d {
                for j in i + 1..d {
                    let v = rng.random_range(-s..s);
                    coupling[i * d + j] = v;
                    coupling[j * d + i] = v;
                }
            }
        }
        Ok(NonConvex { kind, d, wells, coupling, noise })
    }

    pub fn kind(&self) -> NonConvexKind {
        self.kind
    }

    /// Upper bound on the gradient's Lipschitz constant over `LinfBox(1)`.
    pub fn lipschitz_bound(&self) -> f64 {
        match self.kind {
            NonConvexKind::Trigonometric => 4.5,
            NonConvexKind::Rosenbrock => 26.0 * ROSEN_B + 2.0,
            NonConvexKind::RandomQuartic => {
                let row = (0..self.d)
                    .map(|i| self.coupling[i * self.d..(i + 1) * self.d].iter().map(|v| v.abs()).sum::<f64>())
                    .fold(0.0, f64::max);
                3.0 + row
            }
        }
    }

    fn coupled(&self, x: &[f64], i: usize) -> f64 {
        crate::point::dot(&self.coupling[i * self.d..(i + 1) * self.d], x)
    }
}

impl ExactOracle for NonConvex {
    fn value(&self, x: &[f64]) -> f64 {
        match self.kind {
            NonConvexKind::Trigonometric => -0.5 * x.iter().map(|v| (3.0 * v).cos()).sum::<f64>(),
            NonConvexKind::Rosenbrock => {
                let chain: f64 = x.windows(2).map(|w| ROSEN_B * (w[1] - w[0] * w[0]).powi(2)).sum();
                chain + x.iter().map(|v| (ROSEN_A - v).powi(2)).sum::<f64>()
            }
            NonConvexKind::RandomQuartic => (0..self.d)
                .map(|i| {
                    let (a, c) = self.wells[i];
                    let v = x[i];
                    v.powi(4) / 4.0 - a * v * v / 2.0 + c * v + 0.5 * v * self.coupled(x, i)
                })
                .sum(),
        }
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let g = match self.kind {
            NonConvexKind::Trigonometric => x.iter().map(|v| 1.5 * (3.0 * v).sin()).collect(),
            NonConvexKind::Rosenbrock => {
                let mut g: Vec<f64> = x.iter().map(|v| -2.0 * (ROSEN_A - v)).collect();
                for i in 0..self.d.saturating_sub(1) {
                    let r = x[i + 1] - x[i] * x[i];
                    g[i] -= 4.0 * ROSEN_B * x[i] * r;
                    g[i + 1] += 2.0 * ROSEN_B * r;
                }
                g
            }
            NonConvexKind::RandomQuartic => (0..self.d)
                .map(|i| {
                    let (a, c) = self.wells[i];
                    x[i].powi(3) - a * x[i] + c + self.coupled(x, i)
                })
                .collect(),
        };
        Some(g)
    }
}

impl StochasticOracle for NonConvex {
    fn dim(&self) -> usize {
        self.d
    }

    fn query(&self, x: &[f64], sample: SampleHandle) -> f64 {
        self.value(x) + self.noise.value(x, sample)
    }

    fn stochastic_gradient(&self, x: &[f64], sample: SampleHandle) -> Option<Vec<f64>> {
        let mut g = self.gradient(x)?;
        self.noise.add_gradient(x, sample, &mut g);
        Some(g)
    }
}
