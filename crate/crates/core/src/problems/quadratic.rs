use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::NoiseModel;
use crate::error::{Error, Result};
use crate::oracle::{ExactOracle, SampleHandle, StochasticOracle};
use crate::point;

/// Generator parameters for [`Quadratic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadraticSpec {
    pub dim: usize,
    pub seed: u64,
    /// Smallest and largest Hessian eigenvalues (log-spaced in between).
    pub mu: f64,
    pub lipschitz: f64,
    /// Apply a seeded Householder rotation to the eigenbasis.
    pub rotate: bool,
    /// Minimizer; drawn uniformly from `[-0.5, 0.5]^d` when absent.
    pub center: Option<Vec<f64>>,
    pub noise_sigma: f64,
}

impl Default for QuadraticSpec {
    fn default() -> Self {
        QuadraticSpec { dim: 2, seed: 0, mu: 1.0, lipschitz: 1.0, rotate: true, center: None, noise_sigma: 0.0 }
    }
}

/// `f(x) = 1/2 (x - b)^T A (x - b)`, observed with [`NoiseModel`] noise.
#[derive(Debug, Clone)]
pub struct Quadratic {
    a: Vec<f64>,
    b: Vec<f64>,
    d: usize,
    lipschitz: f64,
    noise: NoiseModel,
}

impl Quadratic {
    pub fn new(a: Vec<f64>, b: Vec<f64>, noise: NoiseModel) -> Result<Self> {
        let d = b.len();
        if d == 0 {
            return Err(Error::EmptyPoint);
        }
        if a.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: a.len() });
        }
        let lipschitz = super::max_eigenvalue(&a, d);
        Ok(Quadratic { a, b, d, lipschitz, noise })
    }

    pub fn generate(spec: &QuadraticSpec) -> Result<Self> {
        let d = spec.dim;
        if d == 0 {
            return Err(Error::EmptyPoint);
        }
        if !(spec.mu > 0.0 && spec.lipschitz >= spec.mu && spec.lipschitz.is_finite()) {
            return Err(Error::Config(format!("need 0 < mu <= L, got mu = {}, L = {}", spec.mu, spec.lipschitz)));
        }
        if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
            return Err(Error::Config(format!("noise sigma {} must be non-negative", spec.noise_sigma)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let eig: Vec<f64> = (0..d)
            .map(|i| {
                let s = if d == 1 { 1.0 } else { i as f64 / (d - 1) as f64 };
                spec.lipschitz * (spec.mu / spec.lipschitz).powf(s)
            })
            .collect();
        // Householder Q = I - 2 u u^T / |u|^2 is orthogonal and symmetric
        let u: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let uu = point::dot(&u, &u);
        let q = |i: usize, j: usize| {
            let id = if i == j { 1.0 } else { 0.0 };
            if spec.rotate && d > 1 {
                id - 2.0 * u[i] * u[j] / uu
            } else {
                id
            }
        };
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] = (0..d).map(|k| q(i, k) * eig[k] * q(j, k)).sum();
            }
        }
        let b = match &spec.center {
            Some(c) if c.len() != d => return Err(Error::DimensionMismatch { expected: d, found: c.len() }),
            Some(c) => c.clone(),
            None => (0..d).map(|_| rng.random_range(-0.5..0.5)).collect(),
        };
        let mut quad = Quadratic::new(a, b, NoiseModel { sigma: spec.noise_sigma })?;
        quad.lipschitz = spec.lipschitz;
        Ok(quad)
    }

    pub fn center(&self) -> &[f64] {
        &self.b
    }

    pub fn hessian(&self) -> &[f64] {
        &self.a
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn shifted_product(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let r: Vec<f64> = x.iter().zip(&self.b).map(|(a, b)| a - b).collect();
        let ar = (0..self.d).map(|i| point::dot(&self.a[i * self.d..(i + 1) * self.d], &r)).collect();
        (r, ar)
    }
}

impl StochasticOracle for Quadratic {
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

impl ExactOracle for Quadratic {
    fn value(&self, x: &[f64]) -> f64 {
        let (r, ar) = self.shifted_product(x);
        0.5 * point::dot(&r, &ar)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.shifted_product(x).1)
    }
}
