//! Evaluation quantities over points and traces: Frank-Wolfe duality gap,
//! log-log rate fits, trial aggregation, the surrogate-gradient MSE series,
//! the per-iteration primal-gap recursion and a numeric check of the
//! sequence bound used for averaged gradient errors.

use crate::error::{Error, Result};
use crate::lmo::FeasibleSet;
use crate::point::{self, Point};
use crate::solvers::RunTrace;

const MEMBERSHIP_TOL: f64 = 1e-9;
pub const MIN_FIT_POINTS: usize = 10;

/// `G(x) = <g, x> - <g, lmo(g)>` for the exact gradient `g` at a feasible `x`.
pub fn duality_gap(gradient: &[f64], x: &Point, set: &FeasibleSet) -> Result<f64> {
    x.check_dim(set.dim())?;
    if gradient.len() != set.dim() {
        return Err(Error::DimensionMismatch { expected: set.dim(), found: gradient.len() });
    }
    if !set.contains(x, MEMBERSHIP_TOL) {
        return Err(Error::Infeasible);
    }
    let v = set.lmo(gradient);
    Ok((point::dot(gradient, x) - point::dot(gradient, &v)).max(0.0))
}

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Range of the abscissa covered by the fit.
    pub window: (f64, f64),
}

fn least_squares(lx: &[f64], ly: &[f64]) -> (f64, f64, f64) {
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
    (slope, intercept, r_squared)
}

/// Fits `log y = intercept + slope log x` over arbitrary positive pairs
/// (at least two).
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidSequence(format!("{} abscissae for {} values", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidSequence("a log-log fit needs at least two points".into()));
    }
    for (&x, &y) in xs.iter().zip(ys) {
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::NonPositiveValue { t: x, value: y });
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidSequence(format!("abscissa {x} must be positive")));
        }
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (slope, intercept, r_squared) = least_squares(&lx, &ly);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RateFit { slope, intercept, r_squared, window: (lo, hi) })
}

/// Fits `series[t]` against `t` for `t` in `t_min..=t_max`.
pub fn fit_rate(series: &[f64], t_min: usize, t_max: usize) -> Result<RateFit> {
    if t_min == 0 || t_max < t_min {
        return Err(Error::InvalidSequence(format!("window [{t_min}, {t_max}] must satisfy 1 <= t_min <= t_max")));
    }
    if t_max >= series.len() {
        return Err(Error::InvalidSequence(format!("window end {t_max} beyond series of length {}", series.len())));
    }
    let count = t_max - t_min + 1;
    if count < MIN_FIT_POINTS {
        return Err(Error::WindowTooShort(count));
    }
    let ts: Vec<f64> = (t_min..=t_max).map(|t| t as f64).collect();
    fit_loglog(&ts, &series[t_min..=t_max])
}

/// Arithmetic mean and standard error across trials, per index.
pub fn mean_and_stderr(trials: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let first = trials.first().ok_or_else(|| Error::InvalidSequence("no trials to aggregate".into()))?;
    if trials.iter().any(|t| t.len() != first.len()) {
        return Err(Error::InvalidSequence("trials have different lengths".into()));
    }
    let r = trials.len() as f64;
    let mut mean = vec![0.0; first.len()];
    let mut stderr = vec![0.0; first.len()];
    for i in 0..first.len() {
        let m = trials.iter().map(|t| t[i]).sum::<f64>() / r;
        mean[i] = m;
        if trials.len() > 1 {
            let var = trials.iter().map(|t| (t[i] - m).powi(2)).sum::<f64>() / (r - 1.0);
            stderr[i] = (var / r).sqrt();
        }
    }
    Ok((mean, stderr))
}

/// Minimum number of trials for a surrogate-MSE series.
pub const MIN_MSE_TRIALS: usize = 20;

/// Trial mean of `|grad f(x_t) - d_t|^2` per iteration.
pub fn surrogate_mse_trace(traces: &[RunTrace]) -> Result<Vec<f64>> {
    if traces.len() < MIN_MSE_TRIALS {
        return Err(Error::InvalidSequence(format!(
            "{} trials given, at least {MIN_MSE_TRIALS} required",
            traces.len()
        )));
    }
    let series = traces
        .iter()
        .map(|t| t.surrogate_errors_sq().ok_or(Error::MissingGradient))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_and_stderr(&series)?.0)
}

/// Slack of the one-step primal recursion
/// `h_{t+1} <= (1 - g_t) h_t + g_t R |grad f(x_t) - d_t| + L g_t^2 R^2 / 2`
/// at every recorded step, where `g_t` is the step applied at iteration `t`
/// and `R` the set diameter. Negative entries are violations.
pub fn primal_recursion_slack(trace: &RunTrace, lipschitz: f64, diameter: f64) -> Result<Vec<f64>> {
    let gaps = trace
        .primal_gaps()
        .ok_or_else(|| Error::InvalidSequence("trace carries no primal gaps".into()))?;
    let errors = trace.surrogate_errors_sq().ok_or(Error::MissingGradient)?;
    Ok((0..gaps.len().saturating_sub(1))
        .map(|t| {
            let g = trace.records[t].gamma;
            let bound = (1.0 - g) * gaps[t] + g * diameter * errors[t].sqrt() + 0.5 * lipschitz * g * g * diameter * diameter;
            bound - gaps[t + 1]
        })
        .collect())
}

/// Result of [`check_sequence_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceCheck {
    pub passed: bool,
    /// Largest `z(k+1) / bound(k)` over the horizon.
    pub max_ratio: f64,
    /// Iteration attaining `max_ratio`.
    pub worst_k: u64,
}

/// Runs the equality recursion
/// `z(k+1) = (1 - a1/(k+1)^delta)_+ z(k) + a2/(k+1)^{2 delta}` for
/// `k = 0..=k_max` and compares each term with the closed-form bound
/// `exp(-a1 delta (k+1)^{1-delta} / (4 (1-delta))) (z0 + a2/(2 delta - 1))
///  + a2 2^delta / (a1 (k+1)^delta)`.
pub fn check_sequence_bound(a1: f64, a2: f64, delta: f64, z0: f64, k_max: u64) -> Result<SequenceCheck> {
    if !(delta > 0.5 && delta < 1.0) {
        return Err(Error::InvalidExponent(delta));
    }
    if !(a1 > 0.0 && a1.is_finite()) {
        return Err(Error::InvalidSequence(format!("a1 = {a1} must be positive")));
    }
    if !(a2 >= 0.0 && a2.is_finite()) {
        return Err(Error::InvalidSequence(format!("a2 = {a2} must be non-negative")));
    }
    if !(z0 >= 0.0 && z0.is_finite()) {
        return Err(Error::InvalidSequence(format!("z0 = {z0} must be non-negative")));
    }
    let k0 = 1.0f64;
    let head = z0 + a2 / (k0.powf(delta) * (2.0 * delta - 1.0));
    let mut z = z0;
    let mut worst = SequenceCheck { passed: true, max_ratio: 0.0, worst_k: 0 };
    for k in 0..=k_max {
        let kp = k as f64 + 1.0;
        let contraction = (1.0 - a1 / kp.powf(delta)).max(0.0);
        z = contraction * z + a2 / kp.powf(2.0 * delta);
        let s = k as f64 + k0;
        let bound = (-a1 * delta * s.powf(1.0 - delta) / (4.0 * (1.0 - delta))).exp() * head
            + a2 * 2f64.powf(delta) / (a1 * s.powf(delta));
        let ratio = if z == 0.0 { 0.0 } else { z / bound };
        if ratio > worst.max_ratio {
            worst.max_ratio = ratio;
            worst.worst_k = k;
        }
    }
    worst.passed = worst.max_ratio <= 1.0;
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duality_gap_examples() {
        let set = FeasibleSet::linf_box(2, 1.0).unwrap();
        let x = Point::new(vec![0.5, -0.5]).unwrap();
        assert!((duality_gap(&[0.5, -0.5], &x, &set).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(duality_gap(&[0.0, 0.0], &x, &set).unwrap(), 0.0);
        let outside = Point::new(vec![1.5, 0.0]).unwrap();
        assert_eq!(duality_gap(&[1.0, 0.0], &outside, &set), Err(Error::Infeasible));
        assert!(matches!(duality_gap(&[1.0], &x, &set), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn exact_power_laws() {
        let s: Vec<f64> = (0..200).map(|t| if t == 0 { 0.0 } else { (t as f64).powf(-1.0 / 3.0) }).collect();
        let fit = fit_rate(&s, 1, 199).unwrap();
        assert!((fit.slope + 1.0 / 3.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.window, (1.0, 199.0));

        let s: Vec<f64> = (0..100).map(|t| 5.0 * (t.max(1) as f64).powf(-0.25)).collect();
        let fit = fit_rate(&s, 10, 99).unwrap();
        assert!((fit.slope + 0.25).abs() < 1e-12);
        assert!((fit.intercept - 5f64.ln()).abs() < 1e-12);

        let fit = fit_rate(&[3.0; 40], 5, 39).unwrap();
        assert_eq!(fit.slope, 0.0);
    }

    #[test]
    fn fit_errors() {
        let mut s = vec![1.0; 30];
        s[12] = 0.0;
        assert_eq!(fit_rate(&s, 1, 29), Err(Error::NonPositiveValue { t: 12.0, value: 0.0 }));
        assert_eq!(fit_rate(&[1.0; 30], 1, 5), Err(Error::WindowTooShort(5)));
        assert!(fit_rate(&[1.0; 30], 0, 20).is_err());
        assert!(fit_rate(&[1.0; 30], 5, 30).is_err());
        assert!(fit_loglog(&[1.0], &[1.0]).is_err());
        assert!((fit_loglog(&[10.0, 40.0], &[1.0, 2.0]).unwrap().slope - 0.5).abs() < 1e-12);
    }

    #[test]
    fn aggregation() {
        let (m, se) = mean_and_stderr(&[vec![1.0, 2.0], vec![3.0, 2.0]]).unwrap();
        assert_eq!(m, vec![2.0, 2.0]);
        assert!((se[0] - 1.0).abs() < 1e-15);
        assert_eq!(se[1], 0.0);
        assert!(mean_and_stderr(&[vec![1.0], vec![]]).is_err());
        assert!(mean_and_stderr(&[]).is_err());
    }

    #[test]
    fn sequence_bound_examples() {
        let c = check_sequence_bound(1.0, 1.0, 2.0 / 3.0, 1.0, 10_000).unwrap();
        assert!(c.passed && c.max_ratio <= 1.0, "{c:?}");
        let zero = check_sequence_bound(3.0, 0.0, 0.75, 0.0, 1000).unwrap();
        assert!(zero.passed);
        assert_eq!(zero.max_ratio, 0.0);
        // a1 = 5 makes the contraction factor negative at k = 0; it is clamped
        let clamped = check_sequence_bound(5.0, 0.0, 0.6, 1.0, 1000).unwrap();
        assert!(clamped.passed);
        assert_eq!(check_sequence_bound(1.0, 1.0, 0.5, 0.0, 10), Err(Error::InvalidExponent(0.5)));
        assert_eq!(check_sequence_bound(1.0, 1.0, 1.0, 0.0, 10), Err(Error::InvalidExponent(1.0)));
        assert!(check_sequence_bound(0.0, 1.0, 0.7, 0.0, 10).is_err());
    }

    #[test]
    fn sequence_bound_can_fail_outside_its_regime() {
        // large initial value with a weak contraction at delta near 1
        let c = check_sequence_bound(0.5, 0.01, 0.9, 10.0, 10_000).unwrap();
        assert!(!c.passed && c.max_ratio > 1.0, "{c:?}");
    }

    proptest! {
        #[test]
        fn loglog_recovers_slope(slope in -2.0f64..2.0, scale in 0.01f64..100.0) {
            let s: Vec<f64> = (0..60).map(|t| scale * (t.max(1) as f64).powf(slope)).collect();
            let fit = fit_rate(&s, 1, 59).unwrap();
            prop_assert!((fit.slope - slope).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&fit.r_squared));
        }

        #[test]
        fn duality_gap_is_nonnegative_on_feasible_points(
            g in proptest::collection::vec(-10.0f64..10.0, 3),
            raw in proptest::collection::vec(-3.0f64..3.0, 3),
        ) {
            for set in [
                FeasibleSet::l1_ball(3, 1.5).unwrap(),
                FeasibleSet::l2_ball(3, 1.0).unwrap(),
                FeasibleSet::linf_box(3, 0.5).unwrap(),
                FeasibleSet::simplex(3).unwrap(),
            ] {
                let x = set.project(&raw);
                prop_assert!(duality_gap(&g, &x, &set).unwrap() >= 0.0);
            }
        }
    }
}
