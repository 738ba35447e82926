//! Random search directions with `E[z z^T] = I` and the seed-splitting scheme
//! shared by every solver run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::point::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DirectionDistribution {
    /// `N(0, I_d)`; `M(mu) = d(d+2)(d+4)`.
    #[default]
    GaussianStandard,
    /// Uniform on the sphere of radius `sqrt(d)`; `M(mu) = d^3`.
    UniformSphereRadiusSqrtD,
}

impl DirectionDistribution {
    /// Sixth moment `E ||z||^6`.
    pub fn sixth_moment(self, dim: usize) -> f64 {
        let d = dim as f64;
        match self {
            DirectionDistribution::GaussianStandard => d * (d + 2.0) * (d + 4.0),
            DirectionDistribution::UniformSphereRadiusSqrtD => d * d * d,
        }
    }
}

/// Independent random streams derived from one root seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Samples = 0,
    Directions = 1,
    Problem = 2,
    Noise = 3,
}

/// Generator for `(root, trial, stream)`. Distinct triples never share state.
pub fn stream_rng(root_seed: u64, trial: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(trial.wrapping_mul(8).wrapping_add(stream as u64));
    rng
}

/// Seeded stream of random directions.
#[derive(Debug, Clone)]
pub struct DirectionSource {
    distribution: DirectionDistribution,
    dim: usize,
    rng: ChaCha8Rng,
}

impl DirectionSource {
    pub fn new(distribution: DirectionDistribution, dim: usize, rng: ChaCha8Rng) -> Self {
        assert!(dim > 0, "dimension must be positive");
        DirectionSource { distribution, dim, rng }
    }

    pub fn from_seed(distribution: DirectionDistribution, dim: usize, seed: u64) -> Self {
        DirectionSource::new(distribution, dim, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn distribution(&self) -> DirectionDistribution {
        self.distribution
    }

    pub fn sample_direction(&mut self) -> Point {
        loop {
            let mut z: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(&mut self.rng)).collect();
            if self.distribution == DirectionDistribution::UniformSphereRadiusSqrtD {
                let n = crate::point::norm(&z);
                if n == 0.0 {
                    continue;
                }
                let scale = (self.dim as f64).sqrt() / n;
                z.iter_mut().for_each(|v| *v *= scale);
            }
            return Point::from_vec_unchecked(z);
        }
    }

    pub fn sample_many(&mut self, m: usize) -> Vec<Point> {
        (0..m).map(|_| self.sample_direction()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn second_moment(src: &mut DirectionSource, draws: usize) -> Vec<Vec<f64>> {
        let d = src.dim();
        let mut acc = vec![vec![0.0; d]; d];
        for _ in 0..draws {
            let z = src.sample_direction();
            for i in 0..d {
                for j in 0..d {
                    acc[i][j] += z[i] * z[j];
                }
            }
        }
        acc.iter().map(|row| row.iter().map(|v| v / draws as f64).collect()).collect()
    }

    #[test]
    fn sphere_directions_have_norm_sqrt_d() {
        let mut src = DirectionSource::from_seed(DirectionDistribution::UniformSphereRadiusSqrtD, 4, 9);
        for _ in 0..100 {
            assert!((src.sample_direction().norm() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_stream_is_reproducible_and_varies() {
        let mut a = DirectionSource::from_seed(DirectionDistribution::GaussianStandard, 2, 5);
        let (z1, z2) = (a.sample_direction(), a.sample_direction());
        assert_ne!(z1, z2);
        let mut b = DirectionSource::from_seed(DirectionDistribution::GaussianStandard, 2, 5);
        assert_eq!(b.sample_direction(), z1);
        assert_eq!(b.sample_direction(), z2);
    }

    #[test]
    fn second_moment_is_identity() {
        let n = 100_000;
        for dist in [DirectionDistribution::GaussianStandard, DirectionDistribution::UniformSphereRadiusSqrtD] {
            let mut src = DirectionSource::from_seed(dist, 3, 21);
            let m = second_moment(&mut src, n);
            let tol = 5.0 / (n as f64).sqrt();
            for (i, row) in m.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((v - target).abs() <= tol.min(0.02), "{dist:?} ({i},{j}) = {v}");
                }
            }
        }
    }

    #[test]
    fn sphere_sixth_moment_is_d_cubed() {
        let d = 5;
        let mut src = DirectionSource::from_seed(DirectionDistribution::UniformSphereRadiusSqrtD, d, 1);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| src.sample_direction().norm().powi(6)).sum::<f64>() / n as f64;
        let target = DirectionDistribution::UniformSphereRadiusSqrtD.sixth_moment(d);
        assert!((mean / target - 1.0).abs() < 0.01, "{mean} vs {target}");
    }

    #[test]
    fn split_streams_are_independent() {
        let mut a = DirectionSource::new(DirectionDistribution::GaussianStandard, 3, stream_rng(7, 0, Stream::Directions));
        let mut b = DirectionSource::new(DirectionDistribution::GaussianStandard, 3, stream_rng(7, 1, Stream::Directions));
        let mut c = DirectionSource::new(DirectionDistribution::GaussianStandard, 3, stream_rng(7, 0, Stream::Samples));
        let za = a.sample_direction();
        assert_ne!(za, b.sample_direction());
        assert_ne!(za, c.sample_direction());
    }
}
