//! Feasible sets: linear-minimization oracles, membership, diameters and
//! Euclidean projections (the latter only for projected-gradient baselines).
//!
//! Ties in every oracle go to the lowest index, and `sign(0)` is taken as `+1`,
//! so `lmo(0)` returns a fixed vertex instead of failing.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{self, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SetKind {
    L1Ball { radius: f64 },
    L2Ball { radius: f64 },
    LinfBox { radius: f64 },
    /// The unit simplex `{x >= 0, sum x = 1}`.
    Simplex,
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetKind::L1Ball { radius } => write!(f, "l1_ball(r={radius})"),
            SetKind::L2Ball { radius } => write!(f, "l2_ball(r={radius})"),
            SetKind::LinfBox { radius } => write!(f, "linf_box(r={radius})"),
            SetKind::Simplex => write!(f, "simplex"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleSet {
    kind: SetKind,
    dim: usize,
}

fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

impl FeasibleSet {
    pub fn new(kind: SetKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSet("dimension must be positive".into()));
        }
        match kind {
            SetKind::L1Ball { radius } | SetKind::L2Ball { radius } | SetKind::LinfBox { radius }
                if !(radius > 0.0 && radius.is_finite()) =>
            {
                Err(Error::InvalidSet(format!("radius {radius} must be positive and finite")))
            }
            _ => Ok(FeasibleSet { kind, dim }),
        }
    }

    pub fn l1_ball(dim: usize, radius: f64) -> Result<Self> {
        FeasibleSet::new(SetKind::L1Ball { radius }, dim)
    }

    pub fn l2_ball(dim: usize, radius: f64) -> Result<Self> {
        FeasibleSet::new(SetKind::L2Ball { radius }, dim)
    }

    pub fn linf_box(dim: usize, radius: f64) -> Result<Self> {
        FeasibleSet::new(SetKind::LinfBox { radius }, dim)
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        FeasibleSet::new(SetKind::Simplex, dim)
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Diameter `R = max ||x - y||` over the set.
    pub fn diameter(&self) -> f64 {
        match self.kind {
            SetKind::L1Ball { radius } | SetKind::L2Ball { radius } => 2.0 * radius,
            SetKind::LinfBox { radius } => 2.0 * radius * (self.dim as f64).sqrt(),
            SetKind::Simplex if self.dim == 1 => 0.0,
            SetKind::Simplex => std::f64::consts::SQRT_2,
        }
    }

    /// `argmin_{v in C} <v, g>`, always an extreme point.
    pub fn lmo(&self, g: &[f64]) -> Point {
        assert_eq!(g.len(), self.dim, "lmo direction has wrong dimension");
        let d = self.dim;
        match self.kind {
            SetKind::L1Ball { radius } => {
                let mut best = 0;
                for i in 1..d {
                    if g[i].abs() > g[best].abs() {
                        best = i;
                    }
                }
                Point::basis(d, best, -radius * sign(g[best]))
            }
            SetKind::L2Ball { radius } => {
                let n = point::norm(g);
                if n == 0.0 {
                    return Point::basis(d, 0, -radius);
                }
                let v: Vec<f64> = g.iter().map(|gi| -radius * gi / n).collect();
                Point::from_vec_unchecked(v)
            }
            SetKind::LinfBox { radius } => {
                Point::from_vec_unchecked(g.iter().map(|&gi| -radius * sign(gi)).collect())
            }
            SetKind::Simplex => {
                let mut best = 0;
                for i in 1..d {
                    if g[i] < g[best] {
                        best = i;
                    }
                }
                Point::basis(d, best, 1.0)
            }
        }
    }

    /// Deterministic starting vertex: the oracle answer for the all-ones vector.
    pub fn initial_point(&self) -> Point {
        self.lmo(&vec![1.0; self.dim])
    }

    /// Whether `x` satisfies every defining constraint up to slack `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self.kind {
            SetKind::L1Ball { radius } => x.iter().map(|v| v.abs()).sum::<f64>() <= radius + tol,
            SetKind::L2Ball { radius } => point::norm(x) <= radius + tol,
            SetKind::LinfBox { radius } => x.iter().all(|v| v.abs() <= radius + tol),
            SetKind::Simplex => x.iter().all(|&v| v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol,
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &[f64]) -> Point {
        assert_eq!(x.len(), self.dim, "projection input has wrong dimension");
        let v = match self.kind {
            SetKind::L2Ball { radius } => {
                let n = point::norm(x);
                if n <= radius {
                    x.to_vec()
                } else {
                    x.iter().map(|v| v * radius / n).collect()
                }
            }
            SetKind::LinfBox { radius } => x.iter().map(|v| v.clamp(-radius, radius)).collect(),
            SetKind::Simplex => project_simplex(x, 1.0),
            SetKind::L1Ball { radius } => {
                if x.iter().map(|v| v.abs()).sum::<f64>() <= radius {
                    x.to_vec()
                } else {
                    let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
                    project_simplex(&abs, radius)
                        .into_iter()
                        .zip(x)
                        .map(|(a, &s)| a * sign(s))
                        .collect()
                }
            }
        };
        Point::from_vec_unchecked(v)
    }

    /// Every extreme point, for polytopes (`None` for the Euclidean ball).
    pub fn vertices(&self) -> Option<Vec<Point>> {
        let d = self.dim;
        match self.kind {
            SetKind::L1Ball { radius } => Some(
                (0..d)
                    .flat_map(|i| [Point::basis(d, i, radius), Point::basis(d, i, -radius)])
                    .collect(),
            ),
            SetKind::Simplex => Some((0..d).map(|i| Point::basis(d, i, 1.0)).collect()),
            SetKind::LinfBox { radius } => {
                assert!(d < 31, "box vertex enumeration limited to d < 31");
                Some(
                    (0u32..(1 << d))
                        .map(|mask| {
                            let v = (0..d).map(|i| if mask >> i & 1 == 1 { radius } else { -radius }).collect();
                            Point::from_vec_unchecked(v)
                        })
                        .collect(),
                )
            }
            SetKind::L2Ball { .. } => None,
        }
    }
}

/// Projection onto `{x >= 0, sum x = z}` by the sorted-threshold rule.
fn project_simplex(x: &[f64], z: f64) -> Vec<f64> {
    let mut u = x.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - z) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    x.iter().map(|v| (v - theta).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn lmo_examples() {
        assert_eq!(FeasibleSet::l1_ball(3, 1.0).unwrap().lmo(&[3.0, -4.0, 1.0]), p(&[0.0, 1.0, 0.0]));
        assert_eq!(FeasibleSet::simplex(3).unwrap().lmo(&[0.2, -0.1, 0.7]), p(&[0.0, 1.0, 0.0]));
        let v = FeasibleSet::l2_ball(2, 2.0).unwrap().lmo(&[3.0, 4.0]);
        assert!(close(&v, &[-1.2, -1.6], 1e-12));
        assert_eq!(FeasibleSet::linf_box(3, 1.0).unwrap().lmo(&[1.0, 0.0, -2.0]), p(&[-1.0, -1.0, 1.0]));
    }

    #[test]
    fn lmo_tie_breaks() {
        assert_eq!(FeasibleSet::l1_ball(3, 2.0).unwrap().lmo(&[1.0, -1.0, 1.0]), p(&[-2.0, 0.0, 0.0]));
        assert_eq!(FeasibleSet::l1_ball(2, 1.0).unwrap().lmo(&[0.0, 0.0]), p(&[-1.0, 0.0]));
        assert_eq!(FeasibleSet::simplex(3).unwrap().lmo(&[0.0, 0.0, 0.0]), p(&[1.0, 0.0, 0.0]));
        assert_eq!(FeasibleSet::l2_ball(2, 1.0).unwrap().lmo(&[0.0, 0.0]), p(&[-1.0, 0.0]));
        assert_eq!(FeasibleSet::linf_box(2, 1.0).unwrap().lmo(&[0.0, 0.0]), p(&[-1.0, -1.0]));
    }

    #[test]
    fn membership_examples() {
        assert!(FeasibleSet::l1_ball(2, 1.0).unwrap().contains(&[0.5, 0.5], 0.0));
        assert!(!FeasibleSet::simplex(2).unwrap().contains(&[0.5, 0.6], 1e-9));
        assert!(FeasibleSet::l2_ball(2, 1.0).unwrap().contains(&[1.0 + 1e-12, 0.0], 1e-9));
        assert!(!FeasibleSet::linf_box(2, 1.0).unwrap().contains(&[1.1, 0.0], 1e-9));
        assert!(!FeasibleSet::simplex(2).unwrap().contains(&[-0.1, 1.1], 1e-9));
        assert!(!FeasibleSet::linf_box(2, 1.0).unwrap().contains(&[0.0], 1e-9));
    }

    #[test]
    fn projection_examples() {
        assert_eq!(FeasibleSet::linf_box(2, 1.0).unwrap().project(&[2.0, -0.5]), p(&[1.0, -0.5]));
        assert!(close(&FeasibleSet::l2_ball(2, 1.0).unwrap().project(&[3.0, 4.0]), &[0.6, 0.8], 1e-12));
        assert!(close(&FeasibleSet::simplex(2).unwrap().project(&[1.0, 1.0]), &[0.5, 0.5], 1e-12));
        assert!(close(&FeasibleSet::l1_ball(2, 1.0).unwrap().project(&[2.0, -1.0]), &[1.0, 0.0], 1e-12));
        assert!(close(&FeasibleSet::l1_ball(3, 1.0).unwrap().project(&[0.2, -0.3, 0.1]), &[0.2, -0.3, 0.1], 0.0));
    }

    #[test]
    fn diameters() {
        assert_eq!(FeasibleSet::l1_ball(5, 1.5).unwrap().diameter(), 3.0);
        assert_eq!(FeasibleSet::l2_ball(5, 1.5).unwrap().diameter(), 3.0);
        assert!((FeasibleSet::linf_box(4, 1.0).unwrap().diameter() - 4.0).abs() < 1e-15);
        assert_eq!(FeasibleSet::simplex(3).unwrap().diameter(), 2f64.sqrt());
    }

    // Polytope diameters equal the largest pairwise vertex distance.
    #[test]
    fn diameters_match_vertex_brute_force() {
        for set in [
            FeasibleSet::l1_ball(4, 0.7).unwrap(),
            FeasibleSet::linf_box(3, 1.3).unwrap(),
            FeasibleSet::simplex(5).unwrap(),
        ] {
            let verts = set.vertices().unwrap();
            let mut best: f64 = 0.0;
            for a in &verts {
                for b in &verts {
                    best = best.max(point::dist_sq(a, b).sqrt());
                }
            }
            assert!((best - set.diameter()).abs() < 1e-12, "{:?}", set.kind());
        }
    }

    #[test]
    fn invalid_sets() {
        assert!(FeasibleSet::l1_ball(2, 0.0).is_err());
        assert!(FeasibleSet::l2_ball(2, -1.0).is_err());
        assert!(FeasibleSet::linf_box(2, f64::INFINITY).is_err());
        assert!(FeasibleSet::simplex(0).is_err());
    }

    #[test]
    fn initial_points_are_feasible_vertices() {
        for set in [
            FeasibleSet::l1_ball(3, 1.0).unwrap(),
            FeasibleSet::l2_ball(3, 1.0).unwrap(),
            FeasibleSet::linf_box(3, 1.0).unwrap(),
            FeasibleSet::simplex(3).unwrap(),
        ] {
            assert!(set.contains(&set.initial_point(), 1e-12));
        }
        assert_eq!(FeasibleSet::linf_box(2, 1.0).unwrap().initial_point(), p(&[-1.0, -1.0]));
    }

    fn sets(d: usize) -> Vec<FeasibleSet> {
        vec![
            FeasibleSet::l1_ball(d, 1.3).unwrap(),
            FeasibleSet::l2_ball(d, 0.8).unwrap(),
            FeasibleSet::linf_box(d, 2.0).unwrap(),
            FeasibleSet::simplex(d).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn lmo_is_optimal_over_vertices(g in prop::collection::vec(-5.0f64..5.0, 1..5)) {
            for set in sets(g.len()) {
                let v = set.lmo(&g);
                prop_assert!(set.contains(&v, 1e-12));
                prop_assert_eq!(&v, &set.lmo(&g));
                let best = point::dot(&v, &g);
                if let Some(verts) = set.vertices() {
                    for w in verts {
                        prop_assert!(best <= point::dot(&w, &g) + 1e-12);
                    }
                } else {
                    // Ball: <v, g> = -r |g| is the Cauchy-Schwarz lower bound.
                    prop_assert!((best + 0.8 * point::norm(&g)).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn projection_is_feasible_and_idempotent(x in prop::collection::vec(-6.0f64..6.0, 1..8)) {
            for set in sets(x.len()) {
                let p1 = set.project(&x);
                prop_assert!(set.contains(&p1, 1e-9));
                let p2 = set.project(&p1);
                prop_assert!(close(&p1, &p2, 1e-12), "{:?}: {:?} vs {:?}", set.kind(), p1, p2);
            }
        }

        // Projection optimality: <x - P(x), v - P(x)> <= 0 for every vertex v.
        #[test]
        fn projection_satisfies_variational_inequality(x in prop::collection::vec(-4.0f64..4.0, 1..5)) {
            for set in sets(x.len()) {
                let px = set.project(&x);
                if let Some(verts) = set.vertices() {
                    for v in verts {
                        let ip: f64 = (0..x.len()).map(|i| (x[i] - px[i]) * (v[i] - px[i])).sum();
                        prop_assert!(ip <= 1e-9, "{:?}", set.kind());
                    }
                }
            }
        }

        #[test]
        fn fw_step_stays_feasible(
            a in prop::collection::vec(-3.0f64..3.0, 4),
            b in prop::collection::vec(-3.0f64..3.0, 4),
            gamma in 0.0f64..=1.0,
        ) {
            for set in sets(4) {
                let x = set.project(&a);
                let v = set.project(&b);
                let y = point::fw_step(&x, &v, gamma).unwrap();
                prop_assert!(set.contains(&y, 1e-9));
            }
        }
    }

    // Inexact-LMO robustness: a KWSA-style perturbation with |bias|_inf <= cL/2
    // loses at most c L R d / 2 in the linear objective.
    #[test]
    fn perturbed_lmo_loses_bounded_amount() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for trial in 0..500 {
            let d = 1 + trial % 6;
            let (c, l) = (rng.random_range(0.01..0.5), rng.random_range(0.5..4.0));
            for set in sets(d) {
                let grad: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
                let noisy: Vec<f64> = grad.iter().map(|g| g + rng.random_range(-0.5..0.5) * c * l).collect();
                let exact_best = point::dot(&set.lmo(&grad), &grad);
                let achieved = point::dot(&set.lmo(&noisy), &grad);
                let slack = c * l * set.diameter() * d as f64 / 2.0;
                assert!(achieved <= exact_best + slack + 1e-12, "{:?}", set.kind());
            }
        }
    }
}
