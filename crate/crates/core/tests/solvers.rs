use proptest::prelude::*;
use zofw::metrics::{mean_and_stderr, primal_recursion_slack};
use zofw::oracle::{Deterministic, SampleHandle};
use zofw::problems::{make_quadratic, synthetic_lasso_dataset, make_lasso, LassoSpec, QuadraticSpec};
use zofw::solvers::{
    solve_deterministic_zofw, solve_first_order_sfw, solve_nonconvex_zofw, solve_pgd, solve_stochastic_zofw,
    NonConvexVariant, Probe,
};
use zofw::{Error, Estimator, ExactOracle, FeasibleSet, Point, RunTrace, Schedule, SolverOptions, StochasticOracle};

fn centered_quadratic(center: Vec<f64>) -> Deterministic<impl Fn(&[f64]) -> f64 + Send + Sync, impl Fn(&[f64]) -> Vec<f64> + Send + Sync> {
    let c2 = center.clone();
    Deterministic::with_gradient(
        center.len(),
        move |x: &[f64]| 0.5 * x.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum::<f64>(),
        move |x: &[f64]| x.iter().zip(&c2).map(|(a, b)| a - b).collect(),
    )
}

fn opts(trial: u64) -> SolverOptions {
    SolverOptions { trial, ..SolverOptions::default() }
}

#[test]
fn deterministic_solver_reaches_interior_minimizer() {
    let f = centered_quadratic(vec![0.3, -0.2]);
    let set = FeasibleSet::linf_box(2, 1.0).unwrap();
    let trace = solve_deterministic_zofw(&f, &set, 500, Some(1.0), &opts(0), Probe::new(&f, Some(0.0))).unwrap();
    let last = trace.records.last().unwrap().primal_gap.unwrap();
    assert!(last <= 1e-2, "{last}");
    // envelope Q/(t+2) with Q = max(2 f(x0), 4 L R^2)
    let r = set.diameter();
    let q = (2.0 * f.value(&set.initial_point())).max(4.0 * r * r);
    for rec in &trace.records {
        assert!(rec.primal_gap.unwrap() <= q / (rec.t as f64 + 2.0));
    }
}

#[test]
fn linear_objective_moves_straight_to_the_optimal_vertex() {
    let a = [1.0, -2.0, 0.5];
    let f = Deterministic::with_gradient(3, move |x: &[f64]| a.iter().zip(x).map(|(p, q)| p * q).sum(), move |_: &[f64]| a.to_vec());
    let set = FeasibleSet::l1_ball(3, 1.0).unwrap();
    let vertex = set.lmo(&a);
    let trace = solve_deterministic_zofw(&f, &set, 2, None, &opts(0), Probe::new(&f, Some(-2.0))).unwrap();
    let x1 = &trace.records[1];
    let x2 = &trace.final_point;
    // x_2 = (1 - gamma) x_1 + gamma v with gamma_1 = 1, so x_2 is the vertex itself
    assert_eq!(x2.as_slice(), vertex.as_slice());
    assert!(trace.records[0].duality_gap >= x1.duality_gap);
    assert_eq!(f.value(x2), -2.0);
}

#[test]
fn empty_horizon_is_rejected_everywhere() {
    let f = centered_quadratic(vec![0.0, 0.0]);
    let set = FeasibleSet::linf_box(2, 1.0).unwrap();
    let o = opts(0);
    let p = Probe::none();
    assert_eq!(solve_deterministic_zofw(&f, &set, 0, None, &o, p).unwrap_err(), Error::EmptyHorizon);
    let s = Schedule::stoch_rdsa(2);
    assert_eq!(solve_stochastic_zofw(&f, &set, Estimator::Rdsa, &s, 0, 1, &o, p).unwrap_err(), Error::EmptyHorizon);
    assert_eq!(
        solve_first_order_sfw(&f, &set, &Schedule::first_order(2), 0, 1, &o, p).unwrap_err(),
        Error::EmptyHorizon
    );
    assert_eq!(solve_pgd(&f, &set, 0.1, 0, 1, &o, p).unwrap_err(), Error::EmptyHorizon);
}

#[test]
fn call_accounting_is_exact() {
    let f = centered_quadratic(vec![0.1; 6]);
    let set = FeasibleSet::l2_ball(6, 1.0).unwrap();
    for (est, per) in [(Estimator::Kwsa, 7), (Estimator::Rdsa, 2), (Estimator::Irdsa { m: 3 }, 4)] {
        let s = Schedule::for_estimator(est, 6);
        let trace = solve_stochastic_zofw(&f, &set, est, &s, 50, 3, &opts(0), Probe::none()).unwrap();
        assert_eq!(trace.total_calls(), per * 50, "{}", est.name());
        for (k, r) in trace.records.iter().enumerate() {
            assert_eq!(r.oracle_calls, per * (k as u64 + 1));
        }
    }
}

#[test]
fn schedule_must_match_the_estimator() {
    let f = centered_quadratic(vec![0.0; 4]);
    let set = FeasibleSet::simplex(4).unwrap();
    let err = solve_stochastic_zofw(&f, &set, Estimator::Kwsa, &Schedule::stoch_rdsa(4), 5, 0, &opts(0), Probe::none());
    assert!(matches!(err, Err(Error::ScheduleMismatch { .. })));
    let err = solve_stochastic_zofw(&f, &set, Estimator::Irdsa { m: 5 }, &Schedule::stoch_irdsa(4, 5), 5, 0, &opts(0), Probe::none());
    assert_eq!(err.unwrap_err(), Error::InvalidDirectionCount { m: 5, dim: 4 });
}

#[test]
fn nonconvex_step_is_constant() {
    let f = centered_quadratic(vec![0.0; 3]);
    let set = FeasibleSet::linf_box(3, 1.0).unwrap();
    let trace =
        solve_nonconvex_zofw(&f, &set, 1, 16, 0, NonConvexVariant::Guaranteed, &opts(0), Probe::new(&f, None)).unwrap();
    assert!(trace.records.iter().all(|r| r.gamma == 0.125));
    assert!(trace.records.iter().all(|r| r.primal_gap.is_none()));
}

fn mean_min_gap(f: &dyn zofw::Objective, set: &FeasibleSet, m: usize, horizon: u64) -> f64 {
    let mins: Vec<f64> = (0..20)
        .map(|k| {
            solve_nonconvex_zofw(f, set, m, horizon, 42, NonConvexVariant::Guaranteed, &opts(k), Probe::new(f, None))
                .unwrap()
                .min_duality_gap()
                .0
        })
        .collect();
    mins.iter().sum::<f64>() / 20.0
}

#[test]
fn longer_nonconvex_runs_do_not_worsen_the_min_gap() {
    let spec = QuadraticSpec { dim: 6, seed: 5, mu: 0.5, lipschitz: 2.0, noise_sigma: 0.1, ..QuadraticSpec::default() };
    let inst = make_quadratic(&spec, None).unwrap();
    let short = mean_min_gap(inst.objective().as_ref(), inst.set(), 1, 256);
    let long = mean_min_gap(inst.objective().as_ref(), inst.set(), 1, 4096);
    assert!(long <= short, "{long} vs {short}");
}

#[test]
fn first_order_without_averaging_tracks_the_exact_gradient() {
    let spec = QuadraticSpec { dim: 5, seed: 2, ..QuadraticSpec::default() };
    let inst = make_quadratic(&spec, Some(FeasibleSet::simplex(5).unwrap())).unwrap();
    let s = Schedule::first_order(5).with_constant_rho(1.0);
    let trace = solve_first_order_sfw(inst.oracle(), inst.set(), &s, 200, 0, &opts(0), inst.probe()).unwrap();
    assert!(trace.records.iter().all(|r| r.surrogate_error_sq.unwrap() < 1e-24));
}

#[test]
fn classical_frank_wolfe_meets_its_bound_on_the_simplex() {
    let spec = QuadraticSpec { dim: 6, seed: 4, mu: 0.5, lipschitz: 3.0, ..QuadraticSpec::default() };
    let inst = make_quadratic(&spec, Some(FeasibleSet::simplex(6).unwrap())).unwrap();
    let trace =
        solve_first_order_sfw(inst.oracle(), inst.set(), &Schedule::classical(6), 1000, 0, &opts(0), inst.probe()).unwrap();
    let (l, r) = (inst.lipschitz().unwrap(), inst.set().diameter());
    let last = trace.records.last().unwrap();
    assert!(last.primal_gap.unwrap() <= 8.0 * l * r * r / 1002.0);
}

#[test]
fn small_step_pgd_descends_monotonically() {
    let f = centered_quadratic(vec![0.2, -0.4, 0.1]);
    let set = FeasibleSet::l2_ball(3, 2.0).unwrap();
    let trace = solve_pgd(&f, &set, 0.5, 300, 0, &opts(0), Probe::new(&f, Some(0.0))).unwrap();
    let values: Vec<f64> = trace.records.iter().map(|r| r.objective.unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    assert!(*values.last().unwrap() < 1e-3 * values[0]);
}

#[test]
fn kwsa_with_shrinking_smoothing_drives_the_surrogate_error_to_zero() {
    let f = centered_quadratic(vec![0.3, 0.1, -0.2, 0.0]);
    let set = FeasibleSet::linf_box(4, 1.0).unwrap();
    let trace = solve_stochastic_zofw(&f, &set, Estimator::Kwsa, &Schedule::stoch_kwsa(4), 3000, 0, &opts(0), Probe::new(&f, Some(0.0)))
        .unwrap();
    let errs = trace.surrogate_errors_sq().unwrap();
    // bias and averaging lag both vanish; the lag decays like t^(-2/3)
    assert!(errs[2999] < 0.05 * errs[10], "{} vs {}", errs[2999], errs[10]);
    let s = zofw::metrics::fit_rate(&errs, 50, 2999).unwrap().slope; assert!(s < -0.4, "{s}");
}

fn lasso_traces(est: Option<Estimator>, horizon: u64, trials: u64) -> Vec<RunTrace> {
    let data = synthetic_lasso_dataset(&LassoSpec::default()).unwrap();
    let inst = make_lasso(&data, None).unwrap();
    (0..trials)
        .map(|k| match est {
            Some(e) => solve_stochastic_zofw(
                inst.oracle(),
                inst.set(),
                e,
                &Schedule::for_estimator(e, 20),
                horizon,
                42,
                &opts(k),
                inst.probe(),
            )
            .unwrap(),
            None => solve_first_order_sfw(inst.oracle(), inst.set(), &Schedule::first_order(20), horizon, 42, &opts(k), inst.probe())
                .unwrap(),
        })
        .collect()
}

fn mean_primal(traces: &[RunTrace]) -> Vec<f64> {
    let gaps: Vec<Vec<f64>> = traces.iter().map(|t| t.primal_gaps().unwrap()).collect();
    mean_and_stderr(&gaps).unwrap().0
}

#[test]
fn rdsa_lasso_gap_shrinks_tenfold_horizon_by_at_least_1_7() {
    let mean = mean_primal(&lasso_traces(Some(Estimator::Rdsa), 10_000, 20));
    assert!(mean[999] / mean[9999] >= 1.7, "{} -> {}", mean[999], mean[9999]);
}

#[test]
fn zeroth_order_lasso_stays_within_ten_of_first_order() {
    let zo = mean_primal(&lasso_traces(Some(Estimator::Rdsa), 10_000, 20));
    let fo = mean_primal(&lasso_traces(None, 10_000, 20));
    assert!(zo[9999] <= 10.0 * fo[9999], "{} vs {}", zo[9999], fo[9999]);
}

#[test]
fn traces_are_reproducible_per_trial() {
    let a = lasso_traces(Some(Estimator::Irdsa { m: 3 }), 300, 2);
    let b = lasso_traces(Some(Estimator::Irdsa { m: 3 }), 300, 2);
    assert_eq!(a, b);
    assert_ne!(a[0].records, a[1].records);
}

/// `-x_0`, undefined once `x_0` exceeds 0.5.
struct Cliff;

impl StochasticOracle for Cliff {
    fn dim(&self) -> usize {
        2
    }

    fn query(&self, x: &[f64], _: SampleHandle) -> f64 {
        if x[0] > 0.5 {
            f64::NAN
        } else {
            -x[0]
        }
    }
}

#[test]
fn oracle_failure_aborts_with_the_partial_trace() {
    let set = FeasibleSet::linf_box(2, 1.0).unwrap();
    let err = solve_stochastic_zofw(&Cliff, &set, Estimator::Kwsa, &Schedule::stoch_kwsa(2), 100, 0, &opts(0), Probe::none())
        .unwrap_err();
    match err {
        Error::Aborted { iteration, cause, partial } => {
            assert!(matches!(*cause, Error::NonFiniteOracle { .. }));
            assert_eq!(partial.horizon() as u64, iteration);
            assert!(iteration > 0);
        }
        other => panic!("expected an abort, got {other:?}"),
    }
}

fn set_strategy() -> impl Strategy<Value = (usize, u8, f64)> {
    (1usize..6, 0u8..4, 0.5f64..3.0)
}

fn make_set(d: usize, kind: u8, r: f64) -> FeasibleSet {
    match kind {
        0 => FeasibleSet::l1_ball(d, r),
        1 => FeasibleSet::l2_ball(d, r),
        2 => FeasibleSet::linf_box(d, r),
        _ => FeasibleSet::simplex(d),
    }
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stochastic_traces_satisfy_the_convex_invariants(
        (d, kind, r) in set_strategy(),
        seed in 0u64..1000,
        est_pick in 0u8..3,
        sigma in prop_oneof![Just(0.0), Just(0.3)],
    ) {
        let set = make_set(d, kind, r);
        let spec = QuadraticSpec { dim: d, seed, mu: 0.5, lipschitz: 2.0, noise_sigma: sigma, ..QuadraticSpec::default() };
        let inst = make_quadratic(&spec, Some(set)).unwrap();
        let est = match est_pick {
            0 => Estimator::Kwsa,
            1 => Estimator::Rdsa,
            _ => Estimator::Irdsa { m: d.div_ceil(2) },
        };
        let horizon = 150;
        let trace = solve_stochastic_zofw(
            inst.oracle(), inst.set(), est, &Schedule::for_estimator(est, d), horizon, seed, &opts(0), inst.probe(),
        ).unwrap();
        prop_assert_eq!(trace.horizon(), horizon as usize);
        prop_assert!(set.contains(&trace.final_point, 1e-9));
        prop_assert!(set.contains(&trace.argmin_point, 1e-9));
        let per = est.queries_per_step(d);
        for (k, rec) in trace.records.iter().enumerate() {
            prop_assert_eq!(rec.t, k as u64);
            prop_assert_eq!(rec.oracle_calls, per * (k as u64 + 1));
            prop_assert!(rec.duality_gap >= 0.0);
            let pg = rec.primal_gap.unwrap();
            // f* is a certified lower bound, so the gap may sit a hair above G
            prop_assert!(pg <= rec.duality_gap + 1e-8, "primal {} > dual {}", pg, rec.duality_gap);
            prop_assert!(rec.gamma > 0.0 && rec.gamma <= 1.0);
        }
        let slack = primal_recursion_slack(&trace, inst.lipschitz().unwrap(), set.diameter()).unwrap();
        prop_assert!(slack.iter().all(|s| *s >= -1e-9), "min slack {}", slack.iter().cloned().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn first_order_and_pgd_iterates_stay_feasible((d, kind, r) in set_strategy(), seed in 0u64..1000) {
        let set = make_set(d, kind, r);
        let spec = QuadraticSpec { dim: d, seed, noise_sigma: 0.5, ..QuadraticSpec::default() };
        let inst = make_quadratic(&spec, Some(set)).unwrap();
        let fo = solve_first_order_sfw(inst.oracle(), &set, &Schedule::first_order(d), 100, seed, &opts(1), inst.probe()).unwrap();
        let pgd = solve_pgd(inst.oracle(), &set, 0.5, 100, seed, &opts(1), inst.probe()).unwrap();
        for t in [&fo, &pgd] {
            prop_assert!(set.contains(&t.final_point, 1e-9));
            prop_assert!(t.records.iter().all(|r| r.duality_gap >= 0.0));
        }
        prop_assert_eq!(fo.total_calls(), 100);
    }

    #[test]
    fn argmin_point_attains_the_min_gap(seed in 0u64..500) {
        let set = FeasibleSet::linf_box(3, 1.0).unwrap();
        let spec = QuadraticSpec { dim: 3, seed, noise_sigma: 0.2, ..QuadraticSpec::default() };
        let inst = make_quadratic(&spec, Some(set)).unwrap();
        let trace = solve_nonconvex_zofw(inst.oracle(), &set, 2, 64, seed, NonConvexVariant::ConvexExponents, &opts(0), inst.probe()).unwrap();
        let (g, _) = trace.min_duality_gap();
        let grad = inst.exact().gradient(&trace.argmin_point).unwrap();
        let at = zofw::metrics::duality_gap(&grad, &Point::new(trace.argmin_point.to_vec()).unwrap(), &set).unwrap();
        prop_assert!((at - g).abs() <= 1e-12 * g.max(1.0));
    }
}
