//! Frank-Wolfe loops: deterministic and stochastic zeroth-order variants, the
//! non-convex constant-step variant, and first-order baselines (momentum
//! Frank-Wolfe, projected stochastic gradient).
//!
//! Every loop evaluates iteration `t` in the same order: estimate, average,
//! linear minimization, record metrics at `x_t`, step. Metrics come from the
//! [`Probe`] only; the zeroth-order loops never see exact gradients.

mod schedule;
mod trace;

use std::time::Instant;

pub use schedule::{NonConvexVariant, Schedule, ScheduleFamily, StepParams};
pub use trace::{CallKind, GapKind, IterRecord, Probe, RunTrace};

use crate::averaging::SurrogateGradient;
use crate::direction::{stream_rng, DirectionDistribution, DirectionSource, Stream};
use crate::error::{Error, Result};
use crate::estimators::{irdsa_estimate, kwsa_estimate, rdsa_estimate, Estimator};
use crate::lmo::FeasibleSet;
use crate::oracle::{SampleHandle, SampleSource, StochasticOracle};
use crate::point::{self, fw_step, Point};

/// Per-run settings shared by every solver.
#[derive(Debug, Clone, Default)]
pub struct SolverOptions {
    /// Starting point; defaults to [`FeasibleSet::initial_point`].
    pub x0: Option<Point>,
    /// Trial index, folded into the seed streams.
    pub trial: u64,
    pub directions: DirectionDistribution,
    /// Record elapsed milliseconds; off by default so traces are bit-reproducible.
    pub record_wall_time: bool,
}

const FEASIBILITY_TOL: f64 = 1e-9;

struct Recorder<'a> {
    set: &'a FeasibleSet,
    probe: Probe<'a>,
    started: Instant,
    record_wall_time: bool,
    records: Vec<IterRecord>,
    gap_kind: GapKind,
    best_gap: f64,
    argmin: Option<Point>,
}

impl<'a> Recorder<'a> {
    fn new(set: &'a FeasibleSet, probe: Probe<'a>, opts: &SolverOptions, horizon: u64, x0: &Point) -> Self {
        let gap_kind = match probe.exact.and_then(|e| e.gradient(x0)) {
            Some(_) => GapKind::Exact,
            None => GapKind::Surrogate,
        };
        Recorder {
            set,
            probe,
            started: Instant::now(),
            record_wall_time: opts.record_wall_time,
            records: Vec::with_capacity(horizon as usize),
            gap_kind,
            best_gap: f64::INFINITY,
            argmin: None,
        }
    }

    /// Records iteration `t` at `x` given the direction that drove the step.
    fn record(&mut self, t: u64, x: &Point, driving: &[f64], v: &[f64], gamma: f64, calls: u64) {
        let objective = self.probe.exact.map(|e| e.value(x));
        let primal_gap = objective.zip(self.probe.f_star).map(|(f, fs)| f - fs);
        let grad = match self.gap_kind {
            GapKind::Exact => self.probe.exact.and_then(|e| e.gradient(x)),
            GapKind::Surrogate => None,
        };
        let (duality_gap, surrogate_error_sq) = match &grad {
            Some(g) => {
                let vg = self.set.lmo(g);
                let gap = point::dot(g, x) - point::dot(g, &vg);
                (gap, Some(point::dist_sq(g, driving)))
            }
            None => (point::dot(driving, x) - point::dot(driving, v), None),
        };
        if duality_gap < self.best_gap {
            self.best_gap = duality_gap;
            self.argmin = Some(x.clone());
        }
        let wall_ms = if self.record_wall_time { self.started.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        self.records.push(IterRecord {
            t,
            x_hash: trace::hash_point(x),
            objective,
            primal_gap,
            duality_gap,
            surrogate_error_sq,
            gamma,
            oracle_calls: calls,
            wall_ms,
        });
    }

    fn finish(self, final_point: Point, call_kind: CallKind) -> RunTrace {
        let argmin_point = self.argmin.unwrap_or_else(|| final_point.clone());
        RunTrace { records: self.records, gap_kind: self.gap_kind, call_kind, final_point, argmin_point }
    }
}

fn starting_point(set: &FeasibleSet, opts: &SolverOptions) -> Result<Point> {
    match &opts.x0 {
        Some(x0) => {
            x0.check_dim(set.dim())?;
            if !set.contains(x0, FEASIBILITY_TOL) {
                return Err(Error::Infeasible);
            }
            Ok(x0.clone())
        }
        None => Ok(set.initial_point()),
    }
}

fn check_common(oracle_dim: usize, set: &FeasibleSet, horizon: u64) -> Result<()> {
    if horizon == 0 {
        return Err(Error::EmptyHorizon);
    }
    if oracle_dim != set.dim() {
        return Err(Error::DimensionMismatch { expected: set.dim(), found: oracle_dim });
    }
    Ok(())
}

/// The shared averaged Frank-Wolfe loop. `estimate` returns a gradient
/// estimate at `x_t` and the number of oracle calls it spent.
#[allow(clippy::too_many_arguments)]
fn run_averaged_fw<F>(
    set: &FeasibleSet,
    schedule: &Schedule,
    horizon: u64,
    opts: &SolverOptions,
    probe: Probe<'_>,
    call_kind: CallKind,
    mut estimate: F,
) -> Result<RunTrace>
where
    F: FnMut(&Point, StepParams) -> Result<(Point, u64)>,
{
    let mut x = starting_point(set, opts)?;
    let mut recorder = Recorder::new(set, probe, opts, horizon, &x);
    let mut surrogate = SurrogateGradient::new(set.dim());
    let mut calls = 0u64;
    for t in 0..horizon {
        let params = schedule.at(t);
        let (g, spent) = match estimate(&x, params) {
            Ok(est) => est,
            Err(cause) => {
                return Err(Error::Aborted {
                    iteration: t,
                    cause: Box::new(cause),
                    partial: Box::new(recorder.finish(x, call_kind)),
                })
            }
        };
        calls += spent;
        surrogate = surrogate.update(&g, params.rho)?;
        let v = set.lmo(surrogate.direction());
        recorder.record(t, &x, surrogate.direction(), &v, params.gamma, calls);
        x = fw_step(&x, &v, params.gamma)?;
    }
    Ok(recorder.finish(x, call_kind))
}

/// Deterministic zeroth-order Frank-Wolfe: KWSA on the raw estimate, no
/// averaging, `gamma_t = 2/(t+1)` and `c_t = L gamma_t / d`.
///
/// The oracle is queried with a fixed sample handle, so it must not depend on
/// the sample.
pub fn solve_deterministic_zofw(
    oracle: &dyn StochasticOracle,
    set: &FeasibleSet,
    horizon: u64,
    lipschitz_factor: Option<f64>,
    opts: &SolverOptions,
    probe: Probe<'_>,
) -> Result<RunTrace> {
    check_common(oracle.dim(), set, horizon)?;
    let schedule = Schedule::new(ScheduleFamily::DetKwsa { lipschitz_factor }, set.dim());
    let sample = SampleHandle::from_raw(0);
    run_averaged_fw(set, &schedule, horizon, opts, probe, CallKind::ZerothOrder, |x, p| {
        let est = kwsa_estimate(oracle, x, p.c, sample)?;
        Ok((est.direction, est.szo_calls))
    })
}

/// Stochastic zeroth-order Frank-Wolfe with gradient averaging.
pub fn solve_stochastic_zofw(
    oracle: &dyn StochasticOracle,
    set: &FeasibleSet,
    estimator: Estimator,
    schedule: &Schedule,
    horizon: u64,
    seed: u64,
    opts: &SolverOptions,
    probe: Probe<'_>,
) -> Result<RunTrace> {
    check_common(oracle.dim(), set, horizon)?;
    estimator.validate(set.dim())?;
    if !schedule.matches(estimator) || schedule.dim() != set.dim() {
        return Err(Error::ScheduleMismatch {
            schedule: format!("{:?} (d={})", schedule.family(), schedule.dim()),
            estimator: estimator.name(),
        });
    }
    let mut samples = SampleSource::new(stream_rng(seed, opts.trial, Stream::Samples));
    let mut directions =
        DirectionSource::new(opts.directions, set.dim(), stream_rng(seed, opts.trial, Stream::Directions));
    run_averaged_fw(set, schedule, horizon, opts, probe, CallKind::ZerothOrder, |x, p| {
        let sample = samples.next_sample();
        let est = match estimator {
            Estimator::Kwsa => kwsa_estimate(oracle, x, p.c, sample)?,
            Estimator::Rdsa => rdsa_estimate(oracle, x, p.c, &directions.sample_direction(), sample)?,
            Estimator::Irdsa { m } => irdsa_estimate(oracle, x, p.c, &directions.sample_many(m), sample)?,
        };
        Ok((est.direction, est.szo_calls))
    })
}

/// Non-convex variant: I-RDSA with `m` directions and the constant step
/// `gamma = T^{-3/4}`, so the horizon must be fixed in advance.
#[allow(clippy::too_many_arguments)]
pub fn solve_nonconvex_zofw(
    oracle: &dyn StochasticOracle,
    set: &FeasibleSet,
    m: usize,
    horizon: u64,
    seed: u64,
    variant: NonConvexVariant,
    opts: &SolverOptions,
    probe: Probe<'_>,
) -> Result<RunTrace> {
    let schedule = Schedule::nonconvex(set.dim(), m, horizon, variant);
    solve_stochastic_zofw(oracle, set, Estimator::Irdsa { m }, &schedule, horizon, seed, opts, probe)
}

fn stochastic_gradient(oracle: &dyn StochasticOracle, x: &Point, sample: SampleHandle) -> Result<Point> {
    let g = oracle.stochastic_gradient(x, sample).ok_or(Error::MissingStochasticGradient)?;
    if g.len() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: g.len() });
    }
    Point::new(g).map_err(|e| match e {
        Error::NonFinitePoint { index, value } => Error::NonFiniteOracle { coordinate: Some(index), value },
        other => other,
    })
}

/// First-order stochastic Frank-Wolfe baseline. Use
/// [`Schedule::first_order`] for the momentum variant or
/// [`Schedule::classical`] for plain Frank-Wolfe.
pub fn solve_first_order_sfw(
    oracle: &dyn StochasticOracle,
    set: &FeasibleSet,
    schedule: &Schedule,
    horizon: u64,
    seed: u64,
    opts: &SolverOptions,
    probe: Probe<'_>,
) -> Result<RunTrace> {
    check_common(oracle.dim(), set, horizon)?;
    if !matches!(schedule.family(), ScheduleFamily::FirstOrderMomentum | ScheduleFamily::Classical) {
        return Err(Error::ScheduleMismatch {
            schedule: format!("{:?}", schedule.family()),
            estimator: "first-order".into(),
        });
    }
    let mut samples = SampleSource::new(stream_rng(seed, opts.trial, Stream::Samples));
    run_averaged_fw(set, schedule, horizon, opts, probe, CallKind::FirstOrder, |x, _| {
        Ok((stochastic_gradient(oracle, x, samples.next_sample())?, 1))
    })
}

/// Projected stochastic gradient baseline:
/// `x_{t+1} = P(x_t - eta_t grad F(x_t; y_t))`, `eta_t = eta_0 / sqrt(t+1)`.
pub fn solve_pgd(
    oracle: &dyn StochasticOracle,
    set: &FeasibleSet,
    eta0: f64,
    horizon: u64,
    seed: u64,
    opts: &SolverOptions,
    probe: Probe<'_>,
) -> Result<RunTrace> {
    check_common(oracle.dim(), set, horizon)?;
    if !(eta0 > 0.0 && eta0.is_finite()) {
        return Err(Error::Config(format!("step size eta0 = {eta0} must be positive")));
    }
    let mut samples = SampleSource::new(stream_rng(seed, opts.trial, Stream::Samples));
    let mut x = starting_point(set, opts)?;
    let mut recorder = Recorder::new(set, probe, opts, horizon, &x);
    for t in 0..horizon {
        let eta = eta0 / ((t + 1) as f64).sqrt();
        let g = match stochastic_gradient(oracle, &x, samples.next_sample()) {
            Ok(g) => g,
            Err(cause) => {
                return Err(Error::Aborted {
                    iteration: t,
                    cause: Box::new(cause),
                    partial: Box::new(recorder.finish(x, CallKind::FirstOrder)),
                })
            }
        };
        let v = set.lmo(&g);
        recorder.record(t, &x, &g, &v, eta, t + 1);
        x = set.project(&x.offset(&g, -eta));
    }
    Ok(recorder.finish(x, CallKind::FirstOrder))
}
