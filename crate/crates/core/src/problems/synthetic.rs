//! Seeded data generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

const SURVIVAL_SUPPORT: usize = 5;
const SURVIVAL_L1_NORM: f64 = 2.0;
const CENSORING: f64 = 0.15;

/// Parameters of the synthetic sparse regression generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LassoSpec {
    pub n: usize,
    pub dim: usize,
    pub seed: u64,
    /// Non-zeros in the generating weights (capped at `dim`).
    pub support: usize,
    /// L1 norm of the generating weights.
    pub l1_norm: f64,
    /// Standard deviation of the Gaussian label noise.
    pub label_noise: f64,
    /// Standard deviation of the i.i.d. Gaussian features.
    pub feature_std: f64,
}

impl Default for LassoSpec {
    fn default() -> Self {
        LassoSpec { n: 500, dim: 20, seed: 7, support: 5, l1_norm: 2.0, label_noise: 1.0, feature_std: 1.0 }
    }
}

fn sparse_truth(d: usize, support: usize, rng: &mut ChaCha8Rng, l1: f64) -> Vec<f64> {
    let k = support.clamp(1, d);
    let mut w = vec![0.0; d];
    let support = rand::seq::index::sample(rng, d, k);
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..1.5) * if rng.random() { 1.0 } else { -1.0 }).collect();
    let norm: f64 = raw.iter().map(|v| v.abs()).sum();
    for (i, v) in support.iter().zip(raw) {
        w[i] = l1 * v / norm;
    }
    w
}

fn check_shape(n: usize, d: usize) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

/// `X_ij ~ N(0, feature_std^2)`, `y = X w + label_noise N(0, 1)` with a sparse `w`.
/// The defaults put `|w|_1 = 2`, outside the unit L1 ball.
pub fn synthetic_lasso_dataset(spec: &LassoSpec) -> Result<Dataset> {
    let (n, d) = (spec.n, spec.dim);
    check_shape(n, d)?;
    let params = [spec.l1_norm, spec.label_noise, spec.feature_std];
    if params.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
        return Err(Error::Config("lasso generator needs non-negative l1_norm, label_noise and feature_std".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let w = sparse_truth(d, spec.support, &mut rng, spec.l1_norm);
    let features: Vec<f64> = (0..n * d).map(|_| spec.feature_std * rng.sample::<f64, _>(StandardNormal)).collect();
    let targets = (0..n)
        .map(|i| {
            let noise: f64 = rng.sample(StandardNormal);
            crate::point::dot(&features[i * d..(i + 1) * d], &w) + spec.label_noise * noise
        })
        .collect();
    Dataset::new(features, d, targets)
}

/// Proportional-hazards data: `X_ij ~ N(0, 1/d)`, event times
/// `T_i ~ Exp(exp(x_i . w))` for a sparse `w` of L1 norm 2, and each subject
/// censored with probability 0.15 at a uniform fraction of its event time.
pub fn synthetic_survival_dataset(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    check_shape(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = sparse_truth(d, SURVIVAL_SUPPORT, &mut rng, SURVIVAL_L1_NORM);
    let scale = 1.0 / (d as f64).sqrt();
    let features: Vec<f64> = (0..n * d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    let mut events = Vec::with_capacity(n);
    let mut times = Vec::with_capacity(n);
    for i in 0..n {
        let rate = crate::point::dot(&features[i * d..(i + 1) * d], &w).exp();
        let t: f64 = rng.sample(Exp::new(rate).map_err(|e| Error::InvalidDataset(e.to_string()))?);
        let censored = rng.random::<f64>() < CENSORING;
        let observed = if censored { t * rng.random_range(0.05..1.0) } else { t };
        events.push(!censored);
        times.push(observed.max(f64::MIN_POSITIVE));
    }
    Dataset::new(features, d, vec![0.0; n])?.with_survival(events, times)
}
