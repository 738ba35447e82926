//! Oracle abstractions: the solver's pay-per-query view of the objective and
//! the exact view reserved for metrics.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Opaque token identifying one draw `y ~ P`.
///
/// Passing the same handle to two queries evaluates both with the same `y`,
/// which is how finite differences share their random sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SampleHandle(u64);

impl SampleHandle {
    pub const fn from_raw(raw: u64) -> Self {
        SampleHandle(raw)
    }

    pub const fn raw(self) -> u64 {
        self.0
    }

    /// Maps the handle to an index in `0..n` (multiply-shift, uniform for
    /// uniform handles).
    pub fn index(self, n: usize) -> usize {
        ((self.0 as u128 * n as u128) >> 64) as usize
    }

    /// The smallest handle with `index(n) == i`; enumerates a finite sample
    /// space exactly.
    pub fn for_index(i: usize, n: usize) -> Self {
        assert!(i < n, "index {i} out of range for {n} samples");
        SampleHandle((((i as u128) << 64).div_ceil(n as u128)) as u64)
    }

    /// A generator seeded by this handle, for oracles that need several
    /// random numbers per sample.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Seeded i.i.d. stream of sample handles.
#[derive(Debug, Clone)]
pub struct SampleSource {
    rng: ChaCha8Rng,
}

impl SampleSource {
    pub fn new(rng: ChaCha8Rng) -> Self {
        SampleSource { rng }
    }

    pub fn from_seed(seed: u64) -> Self {
        SampleSource::new(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_sample(&mut self) -> SampleHandle {
        SampleHandle(self.rng.next_u64())
    }

    pub fn next_uniform(&mut self) -> f64 {
        self.rng.random()
    }
}

/// Stochastic zeroth-order oracle `F(x; y)`.
///
/// Queries must be pure in `(x, sample)`. Solvers evaluate at `x + c z`, which
/// may leave the feasible set, so `query` must be defined on a neighbourhood
/// of the set at least as wide as the largest smoothing step `c_0`.
pub trait StochasticOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn query(&self, x: &[f64], sample: SampleHandle) -> f64;

    /// `∇F(x; y)`, for problems that also expose a first-order oracle.
    /// Only the first-order baselines call this.
    fn stochastic_gradient(&self, _x: &[f64], _sample: SampleHandle) -> Option<Vec<f64>> {
        None
    }
}

/// Exact objective `f(x) = E[F(x; y)]`. Used by metrics only; no zeroth-order
/// solver reads it.
pub trait ExactOracle: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// Both views of a test objective.
pub trait Objective: StochasticOracle + ExactOracle {}

impl<T: StochasticOracle + ExactOracle> Objective for T {}

/// A deterministic objective given by closures; the sample handle is ignored.
pub struct Deterministic<F, G = fn(&[f64]) -> Vec<f64>> {
    dim: usize,
    value: F,
    gradient: Option<G>,
}

impl<F> Deterministic<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    pub fn new(dim: usize, value: F) -> Self {
        Deterministic { dim, value, gradient: None }
    }
}

impl<F, G> Deterministic<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn with_gradient(dim: usize, value: F, gradient: G) -> Self {
        Deterministic { dim, value, gradient: Some(gradient) }
    }
}

impl<F, G> StochasticOracle for Deterministic<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn query(&self, x: &[f64], _sample: SampleHandle) -> f64 {
        (self.value)(x)
    }

    fn stochastic_gradient(&self, x: &[f64], _sample: SampleHandle) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(x))
    }
}

impl<F, G> ExactOracle for Deterministic<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn handle_index_is_in_range_and_roughly_uniform() {
        let mut src = SampleSource::from_seed(3);
        let mut counts = [0usize; 5];
        for _ in 0..50_000 {
            let i = src.next_sample().index(5);
            counts[i] += 1;
        }
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 400.0, "{counts:?}");
        }
        assert_eq!(SampleHandle::from_raw(u64::MAX).index(7), 6);
        assert_eq!(SampleHandle::from_raw(0).index(7), 0);
    }

    #[test]
    fn for_index_round_trips() {
        for n in [1usize, 2, 3, 7, 500, 1 << 20] {
            for i in [0, n / 3, n / 2, n - 1] {
                assert_eq!(SampleHandle::for_index(i, n).index(n), i, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn sample_stream_is_reproducible() {
        let a: Vec<_> = {
            let mut s = SampleSource::from_seed(11);
            (0..8).map(|_| s.next_sample()).collect()
        };
        let b: Vec<_> = {
            let mut s = SampleSource::from_seed(11);
            (0..8).map(|_| s.next_sample()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn deterministic_oracle_ignores_sample() {
        let f = Deterministic::new(2, |x: &[f64]| x[0] + 2.0 * x[1]);
        let x = [1.0, 1.0];
        assert_eq!(f.query(&x, SampleHandle::from_raw(1)), f.query(&x, SampleHandle::from_raw(2)));
        assert_eq!(f.value(&x), 3.0);
        assert!(ExactOracle::gradient(&f, &x).is_none());
    }
}
