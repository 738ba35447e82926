use super::{max_eigenvalue, Dataset};
use crate::error::Result;
use crate::oracle::{ExactOracle, SampleHandle, StochasticOracle};
use crate::point;

/// Least squares `f(w) = 1/2 |y - X w|^2` with per-sample terms
/// `F(w; i) = n/2 (y_i - x_i . w)^2`, so uniform `i` gives `E F = f`.
///
/// The exact oracle works from the Gram matrix and costs `O(d^2)`.
#[derive(Debug, Clone)]
pub struct Lasso {
    x: Vec<f64>,
    y: Vec<f64>,
    n: usize,
    d: usize,
    gram: Vec<f64>,
    xty: Vec<f64>,
    yty: f64,
}

impl Lasso {
    pub fn new(data: &Dataset) -> Result<Self> {
        let (n, d) = (data.n(), data.dim());
        let mut gram = vec![0.0; d * d];
        let mut xty = vec![0.0; d];
        for i in 0..n {
            let row = data.row(i);
            let yi = data.targets()[i];
            for a in 0..d {
                xty[a] += row[a] * yi;
                for b in a..d {
                    gram[a * d + b] += row[a] * row[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                gram[a * d + b] = gram[b * d + a];
            }
        }
        let yty = point::dot(data.targets(), data.targets());
        Ok(Lasso { x: data.features().to_vec(), y: data.targets().to_vec(), n, d, gram, xty, yty })
    }

    /// `lambda_max(X^T X)`.
    pub fn lipschitz(&self) -> f64 {
        max_eigenvalue(&self.gram, self.d)
    }

    fn residual(&self, w: &[f64], i: usize) -> f64 {
        self.y[i] - point::dot(&self.x[i * self.d..(i + 1) * self.d], w)
    }

    fn gram_times(&self, w: &[f64]) -> Vec<f64> {
        (0..self.d).map(|a| point::dot(&self.gram[a * self.d..(a + 1) * self.d], w)).collect()
    }
}

impl StochasticOracle for Lasso {
    fn dim(&self) -> usize {
        self.d
    }

    fn query(&self, w: &[f64], sample: SampleHandle) -> f64 {
        let r = self.residual(w, sample.index(self.n));
        0.5 * self.n as f64 * r * r
    }

    fn stochastic_gradient(&self, w: &[f64], sample: SampleHandle) -> Option<Vec<f64>> {
        let i = sample.index(self.n);
        let scale = -(self.n as f64) * self.residual(w, i);
        Some(self.x[i * self.d..(i + 1) * self.d].iter().map(|v| scale * v).collect())
    }
}

impl ExactOracle for Lasso {
    fn value(&self, w: &[f64]) -> f64 {
        let gw = self.gram_times(w);
        (0.5 * point::dot(w, &gw) - point::dot(w, &self.xty) + 0.5 * self.yty).max(0.0)
    }

    fn gradient(&self, w: &[f64]) -> Option<Vec<f64>> {
        Some(self.gram_times(w).iter().zip(&self.xty).map(|(a, b)| a - b).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::super::{make_lasso, synthetic_lasso_dataset, testutil::assert_gradient_matches, LassoSpec};
    use super::*;
    use crate::lmo::FeasibleSet;
    use crate::oracle::SampleSource;
    use rand::{Rng, SeedableRng};

    fn identity_instance() -> Dataset {
        Dataset::new(vec![1.0, 0.0, 0.0, 1.0], 2, vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn identity_design_value_and_gradient() {
        let lasso = Lasso::new(&identity_instance()).unwrap();
        assert_eq!(lasso.value(&[0.0, 0.0]), 0.5);
        assert_eq!(lasso.gradient(&[0.0, 0.0]).unwrap(), vec![-1.0, 0.0]);
    }

    #[test]
    fn identity_design_optimum() {
        let inst = make_lasso(&identity_instance(), None).unwrap();
        let x = inst.x_star().unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9 && x[1].abs() < 1e-9, "{x:?}");
        assert!(inst.f_star().unwrap().abs() < 1e-10);
        assert!((inst.lipschitz().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finite_sum_identity_on_synthetic_data() {
        let ds = synthetic_lasso_dataset(&LassoSpec::default()).unwrap();
        let lasso = Lasso::new(&ds).unwrap();
        let set = FeasibleSet::l1_ball(20, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let raw: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w = set.project(&raw);
            let mean = (0..500).map(|i| lasso.query(&w, SampleHandle::for_index(i, 500))).sum::<f64>() / 500.0;
            let exact = lasso.value(&w);
            assert!((mean - exact).abs() <= 1e-10 * exact.max(1.0), "{mean} vs {exact}");
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let ds = synthetic_lasso_dataset(&LassoSpec { n: 50, dim: 6, seed: 2, ..LassoSpec::default() }).unwrap();
        let lasso = Lasso::new(&ds).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let w: Vec<f64> = (0..6).map(|_| rng.random_range(-0.5..0.5)).collect();
            assert_gradient_matches(&lasso, &w, 1e-5);
        }
    }

    #[test]
    fn stochastic_gradient_is_unbiased_over_the_sample_space() {
        let ds = synthetic_lasso_dataset(&LassoSpec { n: 40, dim: 3, seed: 9, ..LassoSpec::default() }).unwrap();
        let lasso = Lasso::new(&ds).unwrap();
        let w = [0.2, -0.1, 0.3];
        let mut mean = vec![0.0; 3];
        for i in 0..40 {
            let g = lasso.stochastic_gradient(&w, SampleHandle::for_index(i, 40)).unwrap();
            for (m, v) in mean.iter_mut().zip(g) {
                *m += v / 40.0;
            }
        }
        let exact = lasso.gradient(&w).unwrap();
        assert!(point::dist_sq(&mean, &exact).sqrt() < 1e-10);
        let mut src = SampleSource::from_seed(0);
        assert!(lasso.query(&w, src.next_sample()).is_finite());
    }
}
