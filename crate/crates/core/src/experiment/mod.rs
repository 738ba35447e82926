//! Experiment runner: builds the problem from a config, runs seeded trials in
//! parallel, and writes per-trial CSVs, trial aggregates, a rate report and a
//! gnuplot script.

mod config;
mod output;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use config::{
    Algorithm, EstimatorKind, ExperimentConfig, Overrides, ProblemConfig, ProblemKind, ReportConfig, SlopeRange,
    SolverConfig,
};
pub use output::{format_float, trace_csv};

use crate::error::{Error, Result};
use crate::lmo::FeasibleSet;
use crate::metrics::{fit_loglog, fit_rate, mean_and_stderr, RateFit};
use crate::problems::{
    load_libsvm, make_cox, make_lasso, make_nonconvex_test, make_quadratic, synthetic_lasso_dataset,
    synthetic_survival_dataset, LassoSpec, MomentStats, NonConvexKind, ProblemInstance, QuadraticSpec,
};
use crate::solvers::{
    solve_deterministic_zofw, solve_first_order_sfw, solve_nonconvex_zofw, solve_pgd, solve_stochastic_zofw,
    RunTrace, Schedule, SolverOptions,
};

/// Builds the problem instance described by `config`.
pub fn build_instance(config: &ExperimentConfig) -> Result<ProblemInstance> {
    let p = &config.problem;
    let need_dim = || p.dim.ok_or_else(|| Error::Config(format!("problem kind {:?} needs dim", p.kind)));
    let set_for = |dim: usize| config.set.map(|k| FeasibleSet::new(k, dim)).transpose();
    match p.kind {
        ProblemKind::Lasso => {
            let data = match &p.path {
                Some(path) => {
                    let data = load_libsvm(path)?;
                    if let Some(d) = p.dim {
                        if d != data.dim() {
                            return Err(Error::DimensionMismatch { expected: d, found: data.dim() });
                        }
                    }
                    data
                }
                None => {
                    let base = LassoSpec::default();
                    synthetic_lasso_dataset(&LassoSpec {
                        n: p.n,
                        dim: need_dim()?,
                        seed: p.data_seed,
                        l1_norm: p.l1_norm.unwrap_or(base.l1_norm),
                        label_noise: p.label_noise.unwrap_or(base.label_noise),
                        feature_std: p.feature_std.unwrap_or(base.feature_std),
                        ..base
                    })?
                }
            };
            make_lasso(&data, set_for(data.dim())?)
        }
        ProblemKind::Cox => {
            if p.path.is_some() {
                return Err(Error::Config("libsvm files carry no survival data; cox uses the generator".into()));
            }
            let d = need_dim()?;
            make_cox(&synthetic_survival_dataset(p.n, d, p.data_seed)?, set_for(d)?)
        }
        ProblemKind::Quadratic => {
            let base = QuadraticSpec::default();
            let d = need_dim()?;
            let spec = QuadraticSpec {
                dim: d,
                seed: p.data_seed,
                mu: p.mu.unwrap_or(base.mu),
                lipschitz: p.lipschitz.unwrap_or(base.lipschitz),
                noise_sigma: p.noise_sigma,
                ..base
            };
            make_quadratic(&spec, set_for(d)?)
        }
        ProblemKind::Nonconvex => {
            if config.set.is_some_and(|s| s != crate::lmo::SetKind::LinfBox { radius: 1.0 }) {
                return Err(Error::Config("nonconvex test functions live on linf_box(1)".into()));
            }
            let kind = p.function.unwrap_or(NonConvexKind::Rosenbrock);
            make_nonconvex_test(kind, need_dim()?, p.data_seed, p.noise_sigma)
        }
    }
}

/// A validated config with its problem instance; building can fail but
/// nothing has run yet.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub instance: ProblemInstance,
}

pub fn prepare(config: ExperimentConfig) -> Result<Prepared> {
    if let Some(d) = config.problem.dim {
        config.validate(d)?;
    }
    let instance = build_instance(&config)?;
    config.validate(instance.dim())?;
    Ok(Prepared { config, instance })
}

/// Runs one trial with the configured solver.
pub fn run_trial(prepared: &Prepared, trial: u64) -> Result<RunTrace> {
    let (c, inst) = (&prepared.config, &prepared.instance);
    let s = &c.solver;
    let opts = SolverOptions { x0: None, trial, directions: s.directions, record_wall_time: s.record_wall_time };
    let d = inst.dim();
    let with_rho = |sch: Schedule| match s.constant_rho {
        Some(r) => sch.with_constant_rho(r),
        None => sch,
    };
    match s.algorithm {
        config::Algorithm::ZerothOrder => {
            let est = c.estimator()?;
            let schedule = with_rho(Schedule::for_estimator(est, d));
            solve_stochastic_zofw(inst.oracle(), inst.set(), est, &schedule, c.horizon, c.seed, &opts, inst.probe())
        }
        config::Algorithm::Deterministic => {
            solve_deterministic_zofw(inst.oracle(), inst.set(), c.horizon, s.lipschitz_factor, &opts, inst.probe())
        }
        config::Algorithm::Nonconvex => {
            let m = s.m.ok_or_else(|| Error::Config("the nonconvex algorithm needs m".into()))?;
            solve_nonconvex_zofw(inst.oracle(), inst.set(), m, c.horizon, c.seed, s.variant, &opts, inst.probe())
        }
        config::Algorithm::FirstOrder | config::Algorithm::Classical => {
            let base =
                if s.algorithm == config::Algorithm::FirstOrder { Schedule::first_order(d) } else { Schedule::classical(d) };
            solve_first_order_sfw(inst.oracle(), inst.set(), &with_rho(base), c.horizon, c.seed, &opts, inst.probe())
        }
        config::Algorithm::Pgd => {
            let eta0 = s.eta0.unwrap_or_else(|| inst.lipschitz().map_or(0.1, |l| 1.0 / l));
            solve_pgd(inst.oracle(), inst.set(), eta0, c.horizon, c.seed, &opts, inst.probe())
        }
    }
}

/// Per-iteration trial means and standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub primal_gap: Option<(Vec<f64>, Vec<f64>)>,
    pub duality_gap: (Vec<f64>, Vec<f64>),
    pub szo_calls: Vec<f64>,
    pub wall_ms: Vec<f64>,
    pub surrogate_mse: Option<Vec<f64>>,
}

impl Aggregate {
    pub fn from_traces(traces: &[RunTrace]) -> Result<Self> {
        let primal: Option<Vec<Vec<f64>>> = traces.iter().map(RunTrace::primal_gaps).collect();
        let dual: Vec<Vec<f64>> = traces.iter().map(RunTrace::duality_gaps).collect();
        let calls: Vec<Vec<f64>> =
            traces.iter().map(|t| t.records.iter().map(|r| r.oracle_calls as f64).collect()).collect();
        let wall: Vec<Vec<f64>> = traces.iter().map(|t| t.records.iter().map(|r| r.wall_ms).collect()).collect();
        let mse: Option<Vec<Vec<f64>>> = traces.iter().map(RunTrace::surrogate_errors_sq).collect();
        Ok(Aggregate {
            primal_gap: primal.map(|p| mean_and_stderr(&p)).transpose()?,
            duality_gap: mean_and_stderr(&dual)?,
            szo_calls: mean_and_stderr(&calls)?.0,
            wall_ms: mean_and_stderr(&wall)?.0,
            surrogate_mse: mse.map(|m| mean_and_stderr(&m).map(|r| r.0)).transpose()?,
        })
    }

    pub fn len(&self) -> usize {
        self.duality_gap.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One fitted series; `fit` is `None` with a reason when the fit is impossible.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFit {
    pub metric: &'static str,
    pub fit: std::result::Result<RateFit, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssertionOutcome {
    pub metric: &'static str,
    pub range: SlopeRange,
    pub slope: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub traces: Vec<RunTrace>,
    pub aggregate: Aggregate,
    pub fits: Vec<SeriesFit>,
    pub assertions: Vec<AssertionOutcome>,
    pub moments: Option<MomentStats>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentOutcome {
    /// All configured rate assertions hold.
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn fit(&self, metric: &str) -> Option<&RateFit> {
        self.fits.iter().find(|f| f.metric == metric).and_then(|f| f.fit.as_ref().ok())
    }
}

fn fit_series(metric: &'static str, series: &[f64], start: usize) -> SeriesFit {
    let end = series.len().saturating_sub(1);
    let fit = if start > end {
        Err(format!("window [{start}, {end}] is empty"))
    } else {
        fit_rate(series, start, end).map_err(|e| e.to_string())
    };
    SeriesFit { metric, fit }
}

fn fits_for(aggregate: &Aggregate, traces: &[RunTrace], start: usize) -> Vec<SeriesFit> {
    let mut fits = Vec::new();
    if let Some((mean, _)) = &aggregate.primal_gap {
        fits.push(fit_series("primal_gap", mean, start));
    }
    fits.push(fit_series("duality_gap", &aggregate.duality_gap.0, start));
    let running: Vec<Vec<f64>> = traces.iter().map(RunTrace::running_min_gap).collect();
    if let Ok((mean, _)) = mean_and_stderr(&running) {
        fits.push(fit_series("min_duality_gap", &mean, start));
    }
    if let Some(mse) = &aggregate.surrogate_mse {
        fits.push(fit_series("surrogate_mse", mse, start));
    }
    fits
}

fn check_assertions(report: &ReportConfig, fits: &[SeriesFit]) -> Vec<AssertionOutcome> {
    let wanted = [
        ("primal_gap", report.assert_primal_slope),
        ("duality_gap", report.assert_dual_slope),
        ("surrogate_mse", report.assert_mse_slope),
    ];
    wanted
        .into_iter()
        .filter_map(|(metric, range)| {
            let range = range?;
            let slope = fits.iter().find(|f| f.metric == metric).and_then(|f| f.fit.as_ref().ok()).map(|f| f.slope);
            let passed = slope.is_some_and(|s| s >= range[0] && s <= range[1]);
            Some(AssertionOutcome { metric, range, slope, passed })
        })
        .collect()
}

/// Runs every trial and returns the traces in trial order. A failing trial
/// aborts the experiment; completed traces and the failing trial's partial
/// trace are written to `out` first.
fn run_trials(prepared: &Prepared, out: Option<&Path>) -> Result<Vec<RunTrace>> {
    let results: Vec<Result<RunTrace>> =
        (0..prepared.config.trials).into_par_iter().map(|k| run_trial(prepared, k)).collect();
    if let Some(err) = results.iter().find_map(|r| r.as_ref().err()) {
        if let Some(dir) = out {
            std::fs::create_dir_all(dir)?;
            for (k, r) in results.iter().enumerate() {
                let trace = match r {
                    Ok(t) => t,
                    Err(Error::Aborted { partial, .. }) => partial.as_ref(),
                    Err(_) => continue,
                };
                output::write_trial(dir, k, trace)?;
            }
        }
        return Err(err.clone());
    }
    Ok(results.into_iter().map(|r| r.expect("checked above")).collect())
}

/// Runs an already prepared experiment. Outputs go to `config.out` when set.
pub fn execute(prepared: &Prepared) -> Result<ExperimentOutcome> {
    let config = &prepared.config;
    let out = config.out.clone();
    let traces = run_trials(prepared, out.as_deref())?;
    let aggregate = Aggregate::from_traces(&traces)?;
    let fits = fits_for(&aggregate, &traces, config.report.window_start);
    let assertions = check_assertions(&config.report, &fits);
    let x0 = prepared.instance.set().initial_point();
    let moments = if config.report.moment_draws > 0 {
        prepared.instance.moment_statistics(&x0, config.report.moment_draws, config.seed).ok()
    } else {
        None
    };
    let outcome = ExperimentOutcome { config: config.clone(), traces, aggregate, fits, assertions, moments, out_dir: out };
    if let Some(dir) = &outcome.out_dir {
        output::write_all(dir, &outcome, &prepared.instance)?;
    }
    Ok(outcome)
}

/// Validates, builds and runs `config`.
pub fn run_experiment(config: ExperimentConfig) -> Result<ExperimentOutcome> {
    execute(&prepare(config)?)
}

/// Gap at the final iteration against `d` for a family of configs.
#[derive(Debug, Clone)]
pub struct SweepReport {
    /// `(d, trial-mean final gap, stderr)` in input order.
    pub points: Vec<(usize, f64, f64)>,
    /// `primal_gap`, or `duality_gap` when the optimum is unknown.
    pub metric: &'static str,
    pub fit: Option<RateFit>,
    pub note: Option<String>,
    pub outcomes: Vec<ExperimentOutcome>,
}

/// Config copies of `base` at each dimension, writing into `out/d{dim}`.
pub fn dimension_family(base: &ExperimentConfig, dims: &[usize]) -> Vec<ExperimentConfig> {
    dims.iter()
        .map(|&d| {
            let mut c = base.clone();
            c.problem.dim = Some(d);
            c.out = base.out.as_ref().map(|o| o.join(format!("d{d}")));
            c
        })
        .collect()
}

/// Runs configs that differ only in dimension and fits the final gap against
/// `d`. The combined report goes to `out` when given.
pub fn sweep(configs: &[ExperimentConfig], out: Option<&Path>) -> Result<SweepReport> {
    let prepared = prepare_sweep(configs)?;
    sweep_prepared(&prepared, out)
}

/// Checks that `configs` form a dimension family and builds every instance.
pub fn prepare_sweep(configs: &[ExperimentConfig]) -> Result<Vec<Prepared>> {
    let first = configs.first().ok_or_else(|| Error::Config("sweep needs at least one config".into()))?;
    if let Some(other) = configs.iter().find(|c| !first.same_except_dim(c)) {
        return Err(Error::Config(format!(
            "sweep configs must differ only in problem.dim; '{}' differs from '{}'",
            other.name, first.name
        )));
    }
    if first.problem.path.is_some() {
        return Err(Error::Config("a dimension sweep needs a generated problem, not a data file".into()));
    }
    configs.iter().cloned().map(prepare).collect()
}

/// Runs a family built by [`prepare_sweep`].
pub fn sweep_prepared(prepared: &[Prepared], out: Option<&Path>) -> Result<SweepReport> {
    let outcomes: Vec<ExperimentOutcome> = prepared.iter().map(execute).collect::<Result<_>>()?;
    let metric = if outcomes.iter().all(|o| o.aggregate.primal_gap.is_some()) { "primal_gap" } else { "duality_gap" };
    let points: Vec<(usize, f64, f64)> = prepared
        .iter()
        .zip(&outcomes)
        .map(|(p, o)| {
            let (mean, se) = match (&o.aggregate.primal_gap, metric) {
                (Some(pg), "primal_gap") => pg,
                _ => &o.aggregate.duality_gap,
            };
            (p.instance.dim(), *mean.last().expect("non-empty"), *se.last().expect("non-empty"))
        })
        .collect();
    let mut distinct: Vec<usize> = points.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let (fit, note) = if distinct.len() < 2 {
        (None, Some(format!("insufficient points: {} distinct dimension(s), slope undefined", distinct.len())))
    } else {
        let xs: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        match fit_loglog(&xs, &ys) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(format!("fit failed: {e}"))),
        }
    };
    let report = SweepReport { points, metric, fit, note, outcomes };
    if let Some(dir) = out {
        output::write_sweep(dir, &report)?;
    }
    Ok(report)
}
