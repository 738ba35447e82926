use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::direction::DirectionDistribution;
use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::lmo::SetKind;
use crate::problems::NonConvexKind;
use crate::solvers::NonConvexVariant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Lasso,
    Cox,
    Quadratic,
    Nonconvex,
}

/// The objective and its data. Generator fields apply to the kinds noted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    /// Required for synthetic problems; must match the file for libsvm data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Synthetic sample count (lasso, cox).
    #[serde(default = "default_n")]
    pub n: usize,
    /// Seed of the data or coefficient generator.
    #[serde(default = "default_data_seed")]
    pub data_seed: u64,
    /// libsvm file for lasso instead of synthetic data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_noise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_std: Option<f64>,
    /// Quadratic spectrum bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<NonConvexKind>,
    /// Standard deviation of additive oracle noise (quadratic, nonconvex).
    #[serde(default)]
    pub noise_sigma: f64,
}

fn default_n() -> usize {
    500
}

fn default_data_seed() -> u64 {
    7
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Stochastic zeroth-order Frank-Wolfe with averaging.
    #[default]
    ZerothOrder,
    /// Deterministic zeroth-order Frank-Wolfe (KWSA, no averaging).
    Deterministic,
    /// Constant-step I-RDSA variant for non-convex objectives.
    Nonconvex,
    /// First-order momentum Frank-Wolfe.
    FirstOrder,
    /// First-order Frank-Wolfe without averaging.
    Classical,
    /// Projected stochastic gradient.
    Pgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Kwsa,
    #[default]
    Rdsa,
    Irdsa,
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kwsa" => Ok(EstimatorKind::Kwsa),
            "rdsa" => Ok(EstimatorKind::Rdsa),
            "irdsa" => Ok(EstimatorKind::Irdsa),
            other => Err(Error::Config(format!("unknown estimator '{other}' (kwsa, rdsa, irdsa)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub estimator: EstimatorKind,
    /// Directions per step for I-RDSA and the non-convex variant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub variant: NonConvexVariant,
    pub directions: DirectionDistribution,
    /// PGD base step; defaults to `1/L` when `L` is known, else 0.1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta0: Option<f64>,
    /// Multiplier of the deterministic smoothing step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz_factor: Option<f64>,
    /// Replaces the averaging weights by a constant (1 disables averaging).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant_rho: Option<f64>,
    pub record_wall_time: bool,
}

/// Closed interval `[lo, hi]` a fitted slope must fall in.
pub type SlopeRange = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    /// First iteration of every rate fit.
    pub window_start: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assert_primal_slope: Option<SlopeRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assert_dual_slope: Option<SlopeRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assert_mse_slope: Option<SlopeRange>,
    /// Monte Carlo draws for the gradient-moment summary.
    pub moment_draws: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            window_start: 50,
            assert_primal_slope: None,
            assert_dual_slope: None,
            assert_mse_slope: None,
            moment_draws: 2000,
        }
    }
}

/// Declarative description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(rename = "T")]
    pub horizon: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub problem: ProblemConfig,
    /// Feasible set; each problem has a default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetKind>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub report: ReportConfig,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_seed() -> u64 {
    42
}

fn default_trials() -> u64 {
    1
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub estimator: Option<EstimatorKind>,
    pub m: Option<usize>,
    pub horizon: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.as_ref().display())))?;
        let mut config = Self::from_toml(&text)?;
        // relative data paths are resolved against the config file
        if let (Some(p), Some(dir)) = (&config.problem.path, path.as_ref().parent()) {
            if p.is_relative() {
                config.problem.path = Some(dir.join(p));
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.estimator {
            self.solver.estimator = v;
        }
        if let Some(v) = o.m {
            self.solver.m = Some(v);
        }
        if let Some(v) = o.horizon {
            self.horizon = v;
        }
        if let Some(v) = o.trials {
            self.trials = v;
        }
        if let Some(v) = &o.out {
            self.out = Some(v.clone());
        }
    }

    /// The estimator implied by the solver section.
    pub fn estimator(&self) -> Result<Estimator> {
        match (self.solver.estimator, self.solver.m) {
            (EstimatorKind::Kwsa, _) => Ok(Estimator::Kwsa),
            (EstimatorKind::Rdsa, _) => Ok(Estimator::Rdsa),
            (EstimatorKind::Irdsa, Some(m)) => Ok(Estimator::Irdsa { m }),
            (EstimatorKind::Irdsa, None) => Err(Error::Config("estimator irdsa needs m".into())),
        }
    }

    /// Checks everything that can be checked without building the problem;
    /// `dim` is the problem dimension once known.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::EmptyHorizon);
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        match self.solver.algorithm {
            Algorithm::ZerothOrder => self.estimator()?.validate(dim)?,
            Algorithm::Nonconvex => {
                let m = self.solver.m.ok_or_else(|| Error::Config("the nonconvex algorithm needs m".into()))?;
                Estimator::Irdsa { m }.validate(dim)?;
            }
            _ => {}
        }
        if let Some(rho) = self.solver.constant_rho {
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(Error::InvalidAveragingWeight(rho));
            }
        }
        for range in [self.report.assert_primal_slope, self.report.assert_dual_slope, self.report.assert_mse_slope]
            .into_iter()
            .flatten()
        {
            if range.iter().any(|v| v.is_nan()) || range[0] > range[1] {
                return Err(Error::Config(format!("slope range [{}, {}] is empty", range[0], range[1])));
            }
        }
        Ok(())
    }

    /// Whether two configs agree on everything except the problem dimension
    /// and output directory.
    pub fn same_except_dim(&self, other: &ExperimentConfig) -> bool {
        let strip = |c: &ExperimentConfig| {
            let mut c = c.clone();
            c.problem.dim = None;
            c.out = None;
            c
        };
        strip(self) == strip(other)
    }
}
