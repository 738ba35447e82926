//! The acceptance suite: ten end-to-end checks with fixed instances, seeds
//! and tolerances. Each returns a [`CheckOutcome`]; library errors count as
//! failures and are reported in the detail line.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::direction::{DirectionDistribution, DirectionSource};
use crate::error::{Error, Result};
use crate::estimators::{irdsa_estimate, kwsa_estimate, Estimator};
use crate::experiment::{
    dimension_family, run_experiment, sweep, Algorithm, EstimatorKind, ExperimentConfig, ProblemConfig, ProblemKind,
    ReportConfig, SolverConfig,
};
use crate::lmo::{FeasibleSet, SetKind};
use crate::metrics::{check_sequence_bound, fit_loglog, fit_rate, surrogate_mse_trace};
use crate::oracle::SampleSource;
use crate::point::{self, Point};
use crate::problems::{make_quadratic, NoiseModel, NonConvexKind, QuadraticSpec};
use crate::solvers::{solve_deterministic_zofw, SolverOptions};

pub const ROOT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {:>2} {}: {} ({:.2} s)", self.id, self.name, self.detail, self.seconds)
    }
}

fn timed(id: u8, name: &'static str, budget_s: Option<f64>, body: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    let start = Instant::now();
    let result = body();
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(b) = budget_s {
        if seconds > b {
            passed = false;
            detail.push_str(&format!("; over the {b} s budget"));
        }
    }
    CheckOutcome { id, name, passed, detail, seconds }
}

fn lasso_config(estimator: EstimatorKind, m: Option<usize>) -> ExperimentConfig {
    ExperimentConfig {
        name: format!("lasso-{estimator:?}").to_lowercase(),
        seed: ROOT_SEED,
        trials: 20,
        horizon: 10_000,
        out: None,
        problem: ProblemConfig {
            kind: ProblemKind::Lasso,
            dim: Some(20),
            n: 500,
            data_seed: 7,
            path: None,
            l1_norm: None,
            label_noise: None,
            feature_std: None,
            mu: None,
            lipschitz: None,
            function: None,
            noise_sigma: 0.0,
        },
        set: Some(SetKind::L1Ball { radius: 1.0 }),
        solver: SolverConfig { estimator, m, ..SolverConfig::default() },
        report: ReportConfig { assert_primal_slope: Some([-0.55, -0.20]), moment_draws: 0, ..ReportConfig::default() },
    }
}

fn final_primal(outcome: &crate::experiment::ExperimentOutcome) -> Result<f64> {
    let (mean, _) = outcome.aggregate.primal_gap.as_ref().ok_or(Error::MissingGradient)?;
    Ok(mean[mean.len() - 1])
}

/// Criterion 1: deterministic zeroth-order Frank-Wolfe stays below `Q/(t+2)` with
/// `Q = max{2 (f(x0) - f*), 4 L R^2}` for every `t <= 5000`.
pub fn deterministic_envelope() -> CheckOutcome {
    timed(1, "deterministic envelope", Some(5.0), || {
        let spec = QuadraticSpec { dim: 2, seed: 1, mu: 1.0, lipschitz: 1.0, ..QuadraticSpec::default() };
        let inst = make_quadratic(&spec, None)?;
        let l = inst.lipschitz().ok_or(Error::MissingGradient)?;
        let f_star = inst.f_star().ok_or(Error::MissingGradient)?;
        let r = inst.set().diameter();
        let x0 = inst.set().initial_point();
        let q = (2.0 * (inst.exact().value(&x0) - f_star)).max(4.0 * l * r * r);
        let trace =
            solve_deterministic_zofw(inst.oracle(), inst.set(), 5001, Some(l), &SolverOptions::default(), inst.probe())?;
        let mut worst = (0.0f64, 0u64);
        for rec in &trace.records {
            let ratio = rec.primal_gap.ok_or(Error::MissingGradient)? * (rec.t as f64 + 2.0) / q;
            if ratio > worst.0 {
                worst = (ratio, rec.t);
            }
        }
        let last = trace.records.last().and_then(|r| r.primal_gap).unwrap_or(f64::NAN);
        Ok((
            worst.0 <= 1.0,
            format!(
                "Q = {q:.3}, max gap (t+2)/Q = {:.3e} at t = {}, gap(5000) = {last:.3e}, over {} steps",
                worst.0,
                worst.1,
                trace.horizon()
            ),
        ))
    })
}

/// Criteria 2 and 3: primal-gap slope of RDSA on the synthetic lasso, and the
/// KWSA <= I-RDSA(5) <= RDSA ordering at `T = 10^4` (slack 1.3).
pub fn convex_rate_and_ordering() -> [CheckOutcome; 2] {
    let mut rdsa_final = None;
    let rate = timed(2, "convex rate exponent", Some(60.0), || {
        let out = run_experiment(lasso_config(EstimatorKind::Rdsa, None))?;
        let fit = out.fit("primal_gap").ok_or(Error::WindowTooShort(0))?;
        rdsa_final = Some(final_primal(&out)?);
        Ok((
            out.passed(),
            format!(
                "RDSA primal-gap slope {:+.3} over [{}, {}] (window [-0.55, -0.20], r2 {:.3})",
                fit.slope, fit.window.0, fit.window.1, fit.r_squared
            ),
        ))
    });
    let ordering = timed(3, "estimator ordering", None, || {
        let rdsa = match rdsa_final {
            Some(v) => v,
            None => final_primal(&run_experiment(lasso_config(EstimatorKind::Rdsa, None))?)?,
        };
        let irdsa = final_primal(&run_experiment(lasso_config(EstimatorKind::Irdsa, Some(5)))?)?;
        let kwsa = final_primal(&run_experiment(lasso_config(EstimatorKind::Kwsa, None))?)?;
        let passed = kwsa <= 1.3 * irdsa && irdsa <= 1.3 * rdsa;
        Ok((
            passed,
            format!(
                "final mean gaps KWSA {kwsa:.3e}, I-RDSA(5) {irdsa:.3e}, RDSA {rdsa:.3e}; ratios {:.3} and {:.3} (need <= 1.3)",
                kwsa / irdsa,
                irdsa / rdsa
            ),
        ))
    });
    [rate, ordering]
}

/// Criterion 4: final RDSA gap against `d` on the matched-seed lasso family.
pub fn dimension_dependence() -> CheckOutcome {
    timed(4, "dimension dependence", Some(300.0), || {
        let mut base = lasso_config(EstimatorKind::Rdsa, None);
        base.report.assert_primal_slope = None;
        let report = sweep(&dimension_family(&base, &[10, 40, 160]), None)?;
        let fit = report.fit.ok_or_else(|| Error::Config(report.note.clone().unwrap_or_default()))?;
        let pts: Vec<String> = report.points.iter().map(|(d, g, _)| format!("d={d}: {g:.3e}")).collect();
        Ok((
            (0.1..=0.7).contains(&fit.slope),
            format!("gap-vs-d slope {:+.3} (window [0.1, 0.7]); {}", fit.slope, pts.join(", ")),
        ))
    })
}

fn quadratic_mse_config(constant_rho: Option<f64>) -> ExperimentConfig {
    ExperimentConfig {
        name: "quadratic-mse".into(),
        seed: ROOT_SEED,
        trials: 50,
        horizon: 5000,
        out: None,
        problem: ProblemConfig {
            kind: ProblemKind::Quadratic,
            dim: Some(8),
            data_seed: 3,
            mu: Some(0.5),
            lipschitz: Some(2.0),
            noise_sigma: 1.0,
            ..lasso_config(EstimatorKind::Rdsa, None).problem
        },
        set: None,
        solver: SolverConfig { constant_rho, ..SolverConfig::default() },
        report: ReportConfig { moment_draws: 0, ..ReportConfig::default() },
    }
}

/// Criterion 5: averaged-gradient MSE decay, with the no-averaging control.
pub fn surrogate_mse_decay() -> CheckOutcome {
    timed(5, "surrogate MSE decay", None, || {
        let averaged = surrogate_mse_trace(&run_experiment(quadratic_mse_config(None))?.traces)?;
        let control = surrogate_mse_trace(&run_experiment(quadratic_mse_config(Some(1.0)))?.traces)?;
        let fit = fit_rate(&averaged, 50, 4999)?;
        let tail = fit_rate(&control, 2500, 4999)?;
        let passed = (-0.9..=-0.45).contains(&fit.slope) && tail.slope > -0.1;
        Ok((
            passed,
            format!(
                "MSE slope {:+.3} over [50, 4999] (window [-0.9, -0.45]); rho = 1 control tail slope {:+.3} over [2500, 4999] (need > -0.1)",
                fit.slope, tail.slope
            ),
        ))
    })
}

fn nonconvex_config(horizon: u64) -> ExperimentConfig {
    ExperimentConfig {
        name: format!("rosenbrock-T{horizon}"),
        seed: ROOT_SEED,
        trials: 20,
        horizon,
        out: None,
        problem: ProblemConfig {
            kind: ProblemKind::Nonconvex,
            dim: Some(6),
            function: Some(NonConvexKind::Rosenbrock),
            noise_sigma: 0.1,
            ..lasso_config(EstimatorKind::Rdsa, None).problem
        },
        set: None,
        solver: SolverConfig { algorithm: Algorithm::Nonconvex, estimator: EstimatorKind::Irdsa, m: Some(2), ..SolverConfig::default() },
        report: ReportConfig { moment_draws: 0, ..ReportConfig::default() },
    }
}

/// Criterion 6: trial-mean of `min_t G(x_t)` shrinks from `T = 256` to `T = 4096`.
pub fn nonconvex_dual_gap() -> CheckOutcome {
    timed(6, "non-convex dual gap", Some(120.0), || {
        let horizons = [256u64, 1024, 4096];
        let mut means = Vec::new();
        for t in horizons {
            let out = run_experiment(nonconvex_config(t))?;
            let mins: Vec<f64> = out.traces.iter().map(|tr| tr.min_duality_gap().0).collect();
            means.push(mins.iter().sum::<f64>() / mins.len() as f64);
        }
        let ratio = means[2] / means[0];
        let xs: Vec<f64> = horizons.iter().map(|&t| t as f64).collect();
        let slope = fit_loglog(&xs, &means)?.slope;
        Ok((
            ratio <= 0.7,
            format!(
                "min gap T=256 {:.3e}, T=1024 {:.3e}, T=4096 {:.3e}; ratio {ratio:.3} (assert <= 0.7, nominal <= 0.5: {}); slope vs T {slope:+.3}",
                means[0],
                means[1],
                means[2],
                if ratio <= 0.5 { "met" } else { "missed" }
            ),
        ))
    })
}

/// Criterion 7: KWSA bias halves with `c`, and the RDSA / I-RDSA second moment obeys
/// `E|g|^2 <= 2 (1 + d/m) E|grad F|^2 + (1+m)/(2m) c^2 L^2 M(mu)` within 1.5.
pub fn estimator_statistics() -> CheckOutcome {
    timed(7, "estimator statistics", Some(10.0), || {
        const DRAWS: usize = 100_000;
        let spec = QuadraticSpec { dim: 8, seed: 3, mu: 0.5, lipschitz: 2.0, noise_sigma: 1.0, ..QuadraticSpec::default() };
        let inst = make_quadratic(&spec, None)?;
        let d = inst.dim();
        let x = Point::new(vec![0.3; d])?;
        let grad = inst.exact().gradient(&x).ok_or(Error::MissingGradient)?;

        let bias = |c: f64, seed: u64| -> Result<f64> {
            let mut src = SampleSource::from_seed(seed);
            let mut mean = vec![0.0; d];
            for _ in 0..DRAWS {
                let g = kwsa_estimate(inst.oracle(), &x, c, src.next_sample())?.direction;
                for (m, v) in mean.iter_mut().zip(g.iter()) {
                    *m += v / DRAWS as f64;
                }
            }
            Ok(point::dist_sq(&mean, &grad).sqrt())
        };
        let (b1, b2) = (bias(0.5, 1)?, bias(0.25, 2)?);
        let halving = b1 / b2;
        let halving_ok = (1.8..=2.2).contains(&halving);

        let per_sample_l = inst.lipschitz().ok_or(Error::MissingGradient)? + NoiseModel { sigma: 1.0 }.hessian_bound(d);
        let dist = DirectionDistribution::UniformSphereRadiusSqrtD;
        let c = 0.01;
        let mut src = SampleSource::from_seed(3);
        let mut grad_sq = 0.0;
        for _ in 0..DRAWS {
            let g = inst.oracle().stochastic_gradient(&x, src.next_sample()).ok_or(Error::MissingStochasticGradient)?;
            grad_sq += point::dot(&g, &g) / DRAWS as f64;
        }
        let mut ratios = Vec::new();
        for (m, seed) in [(1usize, 4u64), (4, 5)] {
            let est = Estimator::Irdsa { m };
            est.validate(d)?;
            let mut dirs = DirectionSource::from_seed(dist, d, seed);
            let mut samples = SampleSource::from_seed(seed + 100);
            let mut second = 0.0;
            for _ in 0..DRAWS {
                let g = irdsa_estimate(inst.oracle(), &x, c, &dirs.sample_many(m), samples.next_sample())?.direction;
                second += point::dot(&g, &g) / DRAWS as f64;
            }
            let mf = m as f64;
            let bound = 2.0 * (1.0 + d as f64 / mf) * grad_sq
                + (1.0 + mf) / (2.0 * mf) * c * c * per_sample_l * per_sample_l * dist.sixth_moment(d);
            ratios.push((m, second / bound));
        }
        let moment_ok = ratios.iter().all(|(_, r)| *r <= 1.5);
        let shown: Vec<String> = ratios.iter().map(|(m, r)| format!("m={m}: {r:.3}")).collect();
        Ok((
            halving_ok && moment_ok,
            format!(
                "KWSA bias {b1:.4} at c=0.5, {b2:.4} at c=0.25, ratio {halving:.3} (need 2 +- 10%); second moment / bound {} (need <= 1.5)",
                shown.join(", ")
            ),
        ))
    })
}

fn all_sets(d: usize) -> Result<Vec<FeasibleSet>> {
    Ok(vec![
        FeasibleSet::l1_ball(d, 1.5)?,
        FeasibleSet::l2_ball(d, 0.7)?,
        FeasibleSet::linf_box(d, 2.0)?,
        FeasibleSet::simplex(d)?,
    ])
}

/// Maps the unit square onto a planar set: polar coordinates for the disc,
/// a rotated square for the L1 ball, the segment `(s, 1 - s)` for the simplex.
fn planar_chart(kind: SetKind, a: f64, b: f64) -> [f64; 2] {
    match kind {
        SetKind::LinfBox { radius } => [radius * (2.0 * a - 1.0), radius * (2.0 * b - 1.0)],
        SetKind::L1Ball { radius } => {
            let (u, v) = (2.0 * a - 1.0, 2.0 * b - 1.0);
            [radius * (u + v) / 2.0, radius * (u - v) / 2.0]
        }
        SetKind::L2Ball { radius } => {
            let theta = std::f64::consts::TAU * b;
            [radius * a * theta.cos(), radius * a * theta.sin()]
        }
        SetKind::Simplex => [a, 1.0 - a],
    }
}

/// Nearest point of a planar set to `y` by coarse-to-fine grid search over
/// the chart parameters.
fn grid_projection(set: &FeasibleSet, y: &[f64]) -> [f64; 2] {
    let kind = set.kind();
    let dist = |a: f64, b: f64| {
        let p = planar_chart(kind, a, b);
        (p[0] - y[0]).powi(2) + (p[1] - y[1]).powi(2)
    };
    let (mut lo, mut hi) = ([0.0f64, 0.0f64], [1.0f64, 1.0f64]);
    let mut best = [0.0, 0.0];
    while hi[0] - lo[0] > 1e-10 || hi[1] - lo[1] > 1e-10 {
        let step = [(hi[0] - lo[0]) / 100.0, (hi[1] - lo[1]) / 100.0];
        let mut best_d = f64::INFINITY;
        for i in 0..=100 {
            for j in 0..=100 {
                let (a, b) = (lo[0] + i as f64 * step[0], lo[1] + j as f64 * step[1]);
                let dv = dist(a, b);
                if dv < best_d {
                    best_d = dv;
                    best = [a, b];
                }
            }
        }
        for k in 0..2 {
            lo[k] = (best[k] - 3.0 * step[k]).max(0.0);
            hi[k] = (best[k] + 3.0 * step[k]).min(1.0);
        }
    }
    planar_chart(kind, best[0], best[1])
}

/// Criterion 8: LMO against vertex enumeration (d <= 4) and sphere sampling, and
/// projection against a planar grid oracle.
pub fn oracle_equivalence() -> CheckOutcome {
    timed(8, "LMO / projection oracles", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(ROOT_SEED);
        let mut lmo_checks = 0usize;
        let mut worst_lmo = 0.0f64;
        for d in 1..=4 {
            for set in all_sets(d)? {
                let sphere = if set.vertices().is_none() {
                    let mut src = DirectionSource::from_seed(DirectionDistribution::GaussianStandard, d, 7);
                    let SetKind::L2Ball { radius } = set.kind() else { unreachable!() };
                    (0..20_000)
                        .map(|_| {
                            let z = src.sample_direction();
                            z.iter().map(|v| v * radius / z.norm()).collect::<Vec<f64>>()
                        })
                        .collect()
                } else {
                    Vec::new()
                };
                for _ in 0..1000 {
                    let g: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let v = set.lmo(&g);
                    let value = point::dot(&g, &v);
                    if !set.contains(&v, 1e-12) {
                        return Ok((false, format!("lmo output outside {}", set.kind())));
                    }
                    match set.vertices() {
                        Some(vs) => {
                            let best = vs.iter().map(|u| point::dot(&g, u)).fold(f64::INFINITY, f64::min);
                            let first = vs.iter().find(|u| point::dot(&g, u) == best).expect("non-empty");
                            worst_lmo = worst_lmo.max((value - best).abs());
                            if (value - best).abs() > 1e-12 || !vs.contains(&v) {
                                return Ok((false, format!("{} d={d}: lmo {v:?} vs enumeration {first:?}", set.kind())));
                            }
                        }
                        None => {
                            let sampled = sphere.iter().map(|u| point::dot(&g, u)).fold(f64::INFINITY, f64::min);
                            if value > sampled + 1e-12 {
                                return Ok((false, format!("l2 lmo beaten by a sampled boundary point, d={d}")));
                            }
                        }
                    }
                    lmo_checks += 1;
                }
            }
        }
        let mut worst_proj = 0.0f64;
        let mut proj_checks = 0usize;
        for set in all_sets(2)? {
            for _ in 0..50 {
                let y = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
                let p = set.project(&y);
                let grid = grid_projection(&set, &y);
                worst_proj = worst_proj.max(point::dist_sq(&p, &grid).sqrt());
                proj_checks += 1;
            }
        }
        Ok((
            worst_proj <= 1e-3,
            format!(
                "{lmo_checks} lmo calls matched (max value error {worst_lmo:.1e}); {proj_checks} projections within {worst_proj:.1e} of the grid oracle"
            ),
        ))
    })
}

/// Criterion 9: the averaging sequence bound over a parameter grid.
pub fn sequence_bound_grid() -> CheckOutcome {
    timed(9, "sequence bound", None, || {
        let mut failures = Vec::new();
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for delta in [0.55, 2.0 / 3.0, 0.9] {
            for a1 in [0.5, 1.0] {
                for a2 in [0.1, 1.0, 10.0] {
                    for z0 in [0.0, 1.0] {
                        let r = check_sequence_bound(a1, a2, delta, z0, 10_000)?;
                        worst = worst.max(r.max_ratio);
                        count += 1;
                        if !r.passed {
                            failures.push(format!(
                                "(a1={a1}, a2={a2}, delta={delta:.3}, z0={z0}): ratio {:.3} at k={}",
                                r.max_ratio, r.worst_k
                            ));
                        }
                    }
                }
            }
        }
        let detail = if failures.is_empty() {
            format!("{count} parameter sets, max ratio {worst:.3}")
        } else {
            format!("{} of {count} parameter sets exceed the bound: {}", failures.len(), failures.join("; "))
        };
        Ok((failures.is_empty(), detail))
    })
}

fn scratch_dir(tag: &str) -> std::path::PathBuf {
    let nanos = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_nanos());
    std::env::temp_dir().join(format!("zofw-{tag}-{}-{nanos}", std::process::id()))
}

fn dir_bytes(dir: &std::path::Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        files.push((entry.file_name().to_string_lossy().into_owned(), std::fs::read(entry.path())?));
    }
    files.sort();
    Ok(files)
}

/// Criterion 10: two runs of one config produce byte-identical files.
pub fn reproducibility() -> CheckOutcome {
    timed(10, "reproducibility", None, || {
        let mut config = lasso_config(EstimatorKind::Irdsa, Some(5));
        config.horizon = 2000;
        config.trials = 4;
        config.report.moment_draws = 500;
        let (a, b) = (scratch_dir("a"), scratch_dir("b"));
        let run = |dir: &std::path::Path| -> Result<Vec<(String, Vec<u8>)>> {
            let mut c = config.clone();
            c.out = Some(dir.to_path_buf());
            run_experiment(c)?;
            dir_bytes(dir)
        };
        let result = run(&a).and_then(|fa| Ok((fa, run(&b)?)));
        let _ = std::fs::remove_dir_all(&a);
        let _ = std::fs::remove_dir_all(&b);
        let (fa, fb) = result?;
        let csvs = fa.iter().filter(|(n, _)| n.ends_with(".csv")).count();
        // config.toml records the output path, so compare everything else
        let strip = |v: Vec<(String, Vec<u8>)>| v.into_iter().filter(|(n, _)| n != "config.toml").collect::<Vec<_>>();
        let identical = strip(fa.clone()) == strip(fb);
        let bytes: usize = fa.iter().map(|(_, b)| b.len()).sum();
        Ok((identical && csvs == 5, format!("{} files ({csvs} CSVs, {bytes} bytes) identical across two runs: {identical}", fa.len())))
    })
}

/// Every criterion in order.
pub fn run_all() -> Vec<CheckOutcome> {
    let mut out = vec![deterministic_envelope()];
    out.extend(convex_rate_and_ordering());
    out.push(dimension_dependence());
    out.push(surrogate_mse_decay());
    out.push(nonconvex_dual_gap());
    out.push(estimator_statistics());
    out.push(oracle_equivalence());
    out.push(sequence_bound_grid());
    out.push(reproducibility());
    out
}
