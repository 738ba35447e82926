//! Test objectives with both oracle views, plus dataset ingestion.

mod cox;
mod lasso;
mod libsvm;
mod nonconvex;
mod quadratic;
mod reference;
mod synthetic;

use std::sync::Arc;

use rand::Rng;

pub use cox::Cox;
pub use lasso::Lasso;
pub use libsvm::{load_libsvm, parse_libsvm, parse_libsvm_str};
pub use nonconvex::{NonConvex, NonConvexKind};
pub use quadratic::{Quadratic, QuadraticSpec};
pub use reference::{reference_minimum, ReferenceSolution};
pub use synthetic::{synthetic_lasso_dataset, synthetic_survival_dataset, LassoSpec};

use crate::error::{Error, Result};
use crate::lmo::FeasibleSet;
use crate::oracle::{ExactOracle, Objective, SampleHandle, SampleSource, StochasticOracle};
use crate::point::{self, Point};
use crate::solvers::Probe;

/// Right-censored survival annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Survival {
    pub events: Vec<bool>,
    pub times: Vec<f64>,
}

/// Dense design matrix (row-major) with targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n: usize,
    dim: usize,
    targets: Vec<f64>,
    survival: Option<Survival>,
}

impl Dataset {
    pub fn new(features: Vec<f64>, dim: usize, targets: Vec<f64>) -> Result<Self> {
        let n = targets.len();
        if n == 0 || dim == 0 {
            return Err(Error::EmptyDataset);
        }
        if features.len() != n * dim {
            return Err(Error::InvalidDataset(format!(
                "{} feature entries for {n} rows of dimension {dim}",
                features.len()
            )));
        }
        if let Some(i) = features.iter().chain(&targets).position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!("non-finite entry at flat position {i}")));
        }
        Ok(Dataset { features, n, dim, targets, survival: None })
    }

    /// Attaches event indicators and positive event times.
    pub fn with_survival(mut self, events: Vec<bool>, times: Vec<f64>) -> Result<Self> {
        if events.len() != self.n || times.len() != self.n {
            return Err(Error::InvalidDataset("survival fields must have one entry per row".into()));
        }
        if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidDataset(format!("event time {t} must be positive")));
        }
        self.survival = Some(Survival { events, times });
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn survival(&self) -> Option<&Survival> {
        self.survival.as_ref()
    }
}

/// Bounded additive noise `sigma (u0 + <u, x>) / sqrt(1 + |x|^2)` with
/// `u_i ~ U[-sqrt 3, sqrt 3]` drawn from the sample: zero mean, variance
/// exactly `sigma^2` at every `x`, and a gradient that varies with the sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
}

impl NoiseModel {
    fn coefficients(&self, dim: usize, sample: SampleHandle) -> Vec<f64> {
        let mut rng = sample.rng();
        let a = 3f64.sqrt();
        (0..=dim).map(|_| rng.random_range(-a..a)).collect()
    }

    pub fn value(&self, x: &[f64], sample: SampleHandle) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        let u = self.coefficients(x.len(), sample);
        self.sigma * (u[0] + point::dot(&u[1..], x)) / (1.0 + point::dot(x, x)).sqrt()
    }

    /// Bound on the spectral norm of the noise Hessian for every sample and `x`:
    /// with `y = (1, x)` the Hessian of `<u~, y>/|y|` has norm at most
    /// `4 |u~| / |y|^2 <= 4 |u~|`, and `|u~| <= sqrt(3 (d+1))`.
    pub fn hessian_bound(&self, dim: usize) -> f64 {
        4.0 * self.sigma * (3.0 * (dim as f64 + 1.0)).sqrt()
    }

    pub fn add_gradient(&self, x: &[f64], sample: SampleHandle, grad: &mut [f64]) {
        if self.sigma == 0.0 {
            return;
        }
        let u = self.coefficients(x.len(), sample);
        let s = 1.0 + point::dot(x, x);
        let lin = u[0] + point::dot(&u[1..], x);
        let inv = 1.0 / s.sqrt();
        for ((g, ui), xi) in grad.iter_mut().zip(&u[1..]).zip(x) {
            *g += self.sigma * (ui * inv - lin * xi * inv / s);
        }
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite `d x d` matrix.
pub(crate) fn max_eigenvalue(mat: &[f64], d: usize) -> f64 {
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let w: Vec<f64> = (0..d).map(|i| point::dot(&mat[i * d..(i + 1) * d], &v)).collect();
        let nw = point::norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let next = point::dot(&w, &v);
        v = w.into_iter().map(|x| x / nw).collect();
        if (next - lambda).abs() <= 1e-13 * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Second-moment statistics of the stochastic gradient at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentStats {
    /// Monte Carlo `E |grad F(x; y)|^2`.
    pub grad_sq: f64,
    /// Monte Carlo `E |grad F(x; y) - grad f(x)|^2`.
    pub variance: f64,
    pub draws: usize,
}

/// A test objective with its default feasible set and whatever ground truth
/// is available.
#[derive(Clone)]
pub struct ProblemInstance {
    name: String,
    objective: Arc<dyn Objective>,
    set: FeasibleSet,
    f_star: Option<f64>,
    x_star: Option<Point>,
    lipschitz: Option<f64>,
    num_samples: Option<usize>,
}

impl std::fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("set", &self.set)
            .field("f_star", &self.f_star)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

/// How the optimum of a new instance is obtained.
pub(crate) enum Optimum {
    Known(f64, Point),
    Reference,
    Unknown,
}

impl ProblemInstance {
    pub(crate) fn build(
        name: impl Into<String>,
        objective: Arc<dyn Objective>,
        set: FeasibleSet,
        lipschitz: Option<f64>,
        num_samples: Option<usize>,
        optimum: Optimum,
    ) -> Result<Self> {
        if objective.dim() != set.dim() {
            return Err(Error::DimensionMismatch { expected: set.dim(), found: objective.dim() });
        }
        let (f_star, x_star) = match optimum {
            Optimum::Known(f, x) => (Some(f), Some(x)),
            Optimum::Reference => {
                let sol = reference_minimum(objective.as_ref(), &set, lipschitz)?;
                (Some(sol.f_lower), Some(sol.x))
            }
            Optimum::Unknown => (None, None),
        };
        Ok(ProblemInstance { name: name.into(), objective, set, f_star, x_star, lipschitz, num_samples })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn oracle(&self) -> &dyn StochasticOracle {
        self.objective.as_ref()
    }

    pub fn exact(&self) -> &dyn ExactOracle {
        self.objective.as_ref()
    }

    pub fn objective(&self) -> Arc<dyn Objective> {
        Arc::clone(&self.objective)
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    /// Optimal value over the instance's set. For instances without a closed
    /// form this is a certified lower bound `f(x_ref) - G(x_ref)` from a
    /// high-accuracy reference solve.
    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    pub fn x_star(&self) -> Option<&Point> {
        self.x_star.as_ref()
    }

    /// Lipschitz constant of the exact gradient (an upper bound when not tight).
    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    /// Size of the sample space for finite-sum problems.
    pub fn num_samples(&self) -> Option<usize> {
        self.num_samples
    }

    pub fn probe(&self) -> Probe<'_> {
        Probe::new(self.exact(), self.f_star)
    }

    /// Monte Carlo moments of the stochastic gradient at `x`.
    pub fn moment_statistics(&self, x: &[f64], draws: usize, seed: u64) -> Result<MomentStats> {
        let exact = self.exact().gradient(x).ok_or(Error::MissingGradient)?;
        let mut src = SampleSource::from_seed(seed);
        let (mut grad_sq, mut variance) = (0.0, 0.0);
        for _ in 0..draws {
            let g = self.oracle().stochastic_gradient(x, src.next_sample()).ok_or(Error::MissingStochasticGradient)?;
            grad_sq += point::dot(&g, &g);
            variance += point::dist_sq(&g, &exact);
        }
        let n = draws.max(1) as f64;
        Ok(MomentStats { grad_sq: grad_sq / n, variance: variance / n, draws })
    }
}

/// Lasso least squares over `set` (default `L1Ball(1)`).
pub fn make_lasso(dataset: &Dataset, set: Option<FeasibleSet>) -> Result<ProblemInstance> {
    let set = match set {
        Some(s) => s,
        None => FeasibleSet::l1_ball(dataset.dim(), 1.0)?,
    };
    let lasso = Lasso::new(dataset)?;
    let l = lasso.lipschitz();
    let n = dataset.n();
    ProblemInstance::build("lasso", Arc::new(lasso), set, Some(l), Some(n), Optimum::Reference)
}

/// Cox partial likelihood over `set` (default `L1Ball(10)`).
pub fn make_cox(dataset: &Dataset, set: Option<FeasibleSet>) -> Result<ProblemInstance> {
    let set = match set {
        Some(s) => s,
        None => FeasibleSet::l1_ball(dataset.dim(), 10.0)?,
    };
    let cox = Cox::new(dataset)?;
    let l = cox.lipschitz_bound();
    let events = cox.num_events();
    ProblemInstance::build("cox", Arc::new(cox), set, Some(l), Some(events), Optimum::Reference)
}

/// Quadratic `1/2 (x - b)^T A (x - b)` over `set` (default `LinfBox(1)`).
pub fn make_quadratic(spec: &QuadraticSpec, set: Option<FeasibleSet>) -> Result<ProblemInstance> {
    let set = match set {
        Some(s) => s,
        None => FeasibleSet::linf_box(spec.dim, 1.0)?,
    };
    let q = Quadratic::generate(spec)?;
    let l = q.lipschitz();
    let optimum = if set.contains(q.center(), 0.0) {
        Optimum::Known(0.0, Point::new(q.center().to_vec())?)
    } else {
        Optimum::Reference
    };
    ProblemInstance::build("quadratic", Arc::new(q), set, Some(l), None, optimum)
}

/// Smooth non-convex test function on `LinfBox(1)` with additive noise of
/// standard deviation `sigma`.
pub fn make_nonconvex_test(kind: NonConvexKind, dim: usize, seed: u64, sigma: f64) -> Result<ProblemInstance> {
    let set = FeasibleSet::linf_box(dim, 1.0)?;
    let f = NonConvex::new(kind, dim, seed, NoiseModel { sigma })?;
    let l = f.lipschitz_bound();
    ProblemInstance::build(kind.name(), Arc::new(f), set, Some(l), None, Optimum::Unknown)
}
