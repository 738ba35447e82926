//! High-accuracy reference optimum for instances without a closed form:
//! accelerated projected gradient with backtracking and function restarts,
//! stopped on a certified Frank-Wolfe duality gap.

use crate::error::{Error, Result};
use crate::lmo::FeasibleSet;
use crate::oracle::ExactOracle;
use crate::point::{self, Point};

const GAP_TOL: f64 = 1e-12;
const MAX_ITER: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub x: Point,
    /// `f(x)`.
    pub f_value: f64,
    /// Duality gap at `x`; bounds `f(x) - f*` for convex `f`.
    pub gap: f64,
    /// Certified lower bound `f(x) - gap` on the optimal value.
    pub f_lower: f64,
    pub iterations: usize,
}

fn fw_gap(set: &FeasibleSet, g: &[f64], x: &[f64]) -> f64 {
    let v = set.lmo(g);
    (point::dot(g, x) - point::dot(g, &v)).max(0.0)
}

/// Minimizes a smooth convex `f` over `set`. `lipschitz` seeds the step
/// search; backtracking corrects a poor guess.
pub fn reference_minimum(f: &dyn ExactOracle, set: &FeasibleSet, lipschitz: Option<f64>) -> Result<ReferenceSolution> {
    let grad = |x: &[f64]| f.gradient(x).ok_or(Error::MissingGradient);
    let mut l = lipschitz.filter(|l| *l > 0.0 && l.is_finite()).unwrap_or(1.0);
    let mut x = set.initial_point();
    let mut fx = f.value(&x);
    let mut y = x.clone();
    let mut momentum = 1.0f64;
    let mut gap = fw_gap(set, &grad(&x)?, &x);
    let mut iterations = 0;
    while iterations < MAX_ITER && gap > GAP_TOL * fx.abs().max(1.0) {
        iterations += 1;
        let gy = grad(&y)?;
        let fy = f.value(&y);
        let (z, fz) = loop {
            let z = set.project(&y.offset(&gy, -1.0 / l));
            let diff: Vec<f64> = z.iter().zip(y.iter()).map(|(a, b)| a - b).collect();
            let fz = f.value(&z);
            let model = fy + point::dot(&gy, &diff) + 0.5 * l * point::dot(&diff, &diff);
            if fz <= model + 1e-14 * fy.abs().max(1.0) || l > 1e300 {
                break (z, fz);
            }
            l *= 2.0;
        };
        if fz > fx {
            // restart the momentum from the last accepted point
            momentum = 1.0;
            y = x.clone();
            continue;
        }
        let next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / next;
        let extrapolated: Vec<f64> = z.iter().zip(x.iter()).map(|(a, b)| a + beta * (a - b)).collect();
        y = set.project(&extrapolated);
        x = z;
        fx = fz;
        momentum = next;
        if iterations % 10 == 0 {
            gap = fw_gap(set, &grad(&x)?, &x);
        }
    }
    gap = fw_gap(set, &grad(&x)?, &x);
    Ok(ReferenceSolution { f_lower: fx - gap, x, f_value: fx, gap, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Deterministic;

    #[test]
    fn quadratic_over_simplex_has_tiny_gap() {
        let b = [0.9, 0.6, -0.4];
        let f = Deterministic::with_gradient(
            3,
            move |x: &[f64]| 0.5 * point::dist_sq(x, &b),
            move |x: &[f64]| x.iter().zip(&b).map(|(a, c)| a - c).collect(),
        );
        let set = FeasibleSet::simplex(3).unwrap();
        let sol = reference_minimum(&f, &set, Some(1.0)).unwrap();
        assert!(sol.gap <= 1e-8);
        // projection of b onto the simplex is (0.65, 0.35, 0)
        assert!(point::dist_sq(&sol.x, &[0.65, 0.35, 0.0]).sqrt() < 1e-7, "{:?}", sol.x);
        assert!(sol.f_lower <= sol.f_value);
    }

    #[test]
    fn recovers_interior_minimizer() {
        let f = Deterministic::with_gradient(
            2,
            |x: &[f64]| (x[0] - 0.3).powi(2) + 4.0 * (x[1] + 0.2).powi(2),
            |x: &[f64]| vec![2.0 * (x[0] - 0.3), 8.0 * (x[1] + 0.2)],
        );
        let set = FeasibleSet::linf_box(2, 1.0).unwrap();
        let sol = reference_minimum(&f, &set, None).unwrap();
        assert!(sol.f_value < 1e-12);
        assert!((sol.x[0] - 0.3).abs() < 1e-6 && (sol.x[1] + 0.2).abs() < 1e-6);
    }

    #[test]
    fn missing_gradient_is_an_error() {
        let f = Deterministic::new(2, |x: &[f64]| x[0]);
        let set = FeasibleSet::l1_ball(2, 1.0).unwrap();
        assert_eq!(reference_minimum(&f, &set, None), Err(Error::MissingGradient));
    }
}
