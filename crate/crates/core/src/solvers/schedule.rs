use serde::{Deserialize, Serialize};

use crate::estimators::Estimator;

/// Step size, averaging weight and smoothing step for one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub gamma: f64,
    pub rho: f64,
    pub c: f64,
}

/// Which `(rho_t, c_t)` exponents the non-convex variant uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NonConvexVariant {
    /// `rho_t ~ (t+8)^{-1/2}`, `c_t ~ (t+8)^{-1/4}`; the dual-gap bound holds for these.
    #[default]
    Guaranteed,
    /// `rho_t ~ (t+8)^{-2/3}`, `c_t ~ (t+8)^{-1/3}`, borrowed from the convex I-RDSA schedule.
    ConvexExponents,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum ScheduleFamily {
    /// Deterministic KWSA: `gamma_t = 2/(t+1)` (clamped to 1), `c_t = L gamma_t / d`
    /// with `L = 1` unless a Lipschitz factor is supplied; no averaging.
    DetKwsa { lipschitz_factor: Option<f64> },
    StochRdsa,
    StochIrdsa { m: usize },
    StochKwsa,
    /// Constant `gamma = T^{-3/4}`.
    NonConvexIrdsa { m: usize, horizon: u64, variant: NonConvexVariant },
    /// First-order momentum Frank-Wolfe: `gamma_t = 2/(t+8)`, `rho_t = 4/(t+8)^{2/3}`.
    FirstOrderMomentum,
    /// Classical Frank-Wolfe: `gamma_t = 2/(t+2)`, no averaging.
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    family: ScheduleFamily,
    dim: usize,
    rho_override: Option<f64>,
}

impl Schedule {
    pub fn new(family: ScheduleFamily, dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Schedule { family, dim, rho_override: None }
    }

    pub fn det_kwsa(dim: usize) -> Self {
        Schedule::new(ScheduleFamily::DetKwsa { lipschitz_factor: None }, dim)
    }

    pub fn stoch_rdsa(dim: usize) -> Self {
        Schedule::new(ScheduleFamily::StochRdsa, dim)
    }

    pub fn stoch_irdsa(dim: usize, m: usize) -> Self {
        Schedule::new(ScheduleFamily::StochIrdsa { m }, dim)
    }

    pub fn stoch_kwsa(dim: usize) -> Self {
        Schedule::new(ScheduleFamily::StochKwsa, dim)
    }

    pub fn nonconvex(dim: usize, m: usize, horizon: u64, variant: NonConvexVariant) -> Self {
        Schedule::new(ScheduleFamily::NonConvexIrdsa { m, horizon, variant }, dim)
    }

    pub fn first_order(dim: usize) -> Self {
        Schedule::new(ScheduleFamily::FirstOrderMomentum, dim)
    }

    pub fn classical(dim: usize) -> Self {
        Schedule::new(ScheduleFamily::Classical, dim)
    }

    /// The stochastic schedule paired with `estimator`.
    pub fn for_estimator(estimator: Estimator, dim: usize) -> Self {
        match estimator {
            Estimator::Kwsa => Schedule::stoch_kwsa(dim),
            Estimator::Rdsa => Schedule::stoch_rdsa(dim),
            Estimator::Irdsa { m } => Schedule::stoch_irdsa(dim, m),
        }
    }

    /// Replaces every `rho_t` by a constant (`1.0` disables averaging).
    pub fn with_constant_rho(mut self, rho: f64) -> Self {
        self.rho_override = Some(rho);
        self
    }

    pub fn family(&self) -> ScheduleFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether this schedule was derived for `estimator`.
    pub fn matches(&self, estimator: Estimator) -> bool {
        matches!(
            (self.family, estimator),
            (ScheduleFamily::StochRdsa, Estimator::Rdsa)
                | (ScheduleFamily::StochKwsa, Estimator::Kwsa)
                | (ScheduleFamily::DetKwsa { .. }, Estimator::Kwsa)
        ) || match (self.family, estimator) {
            (ScheduleFamily::StochIrdsa { m }, Estimator::Irdsa { m: k }) => m == k,
            (ScheduleFamily::NonConvexIrdsa { m, .. }, Estimator::Irdsa { m: k }) => m == k,
            _ => false,
        }
    }

    pub fn at(&self, t: u64) -> StepParams {
        let d = self.dim as f64;
        let s = t as f64 + 8.0;
        let d32 = d.powf(1.5);
        let irdsa = |m: usize, rho_exp: f64, c_exp: f64| {
            let m = m as f64;
            (4.0 / ((1.0 + d / m).cbrt() * s.powf(rho_exp)), 2.0 * m.sqrt() / (d32 * s.powf(c_exp)))
        };
        let (gamma, rho, c) = match self.family {
            ScheduleFamily::DetKwsa { lipschitz_factor } => {
                let gamma = (2.0 / (t as f64 + 1.0)).min(1.0);
                (gamma, 1.0, lipschitz_factor.unwrap_or(1.0) * gamma / d)
            }
            ScheduleFamily::StochRdsa => (2.0 / s, 4.0 / (d.cbrt() * s.powf(2.0 / 3.0)), 2.0 / (d32 * s.cbrt())),
            ScheduleFamily::StochIrdsa { m } => {
                let (rho, c) = irdsa(m, 2.0 / 3.0, 1.0 / 3.0);
                (2.0 / s, rho, c)
            }
            ScheduleFamily::StochKwsa => (2.0 / s, 4.0 / s.powf(2.0 / 3.0), 2.0 / (d.sqrt() * s.cbrt())),
            ScheduleFamily::NonConvexIrdsa { m, horizon, variant } => {
                let gamma = 1.0 / (horizon.max(1) as f64).powf(0.75);
                let (rho, c) = match variant {
                    NonConvexVariant::Guaranteed => irdsa(m, 0.5, 0.25),
                    NonConvexVariant::ConvexExponents => irdsa(m, 2.0 / 3.0, 1.0 / 3.0),
                };
                (gamma, rho, c)
            }
            ScheduleFamily::FirstOrderMomentum => (2.0 / s, 4.0 / s.powf(2.0 / 3.0), 0.0),
            ScheduleFamily::Classical => (2.0 / (t as f64 + 2.0), 1.0, 0.0),
        };
        StepParams { gamma, rho: self.rho_override.unwrap_or(rho).min(1.0), c }
    }
}
