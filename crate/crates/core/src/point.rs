//! Dense points in R^d and the Frank-Wolfe convex-combination step.

use std::ops::Deref;

use crate::error::{Error, Result};

/// A finite, non-empty dense vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    /// Validates that `coords` is non-empty and finite.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyPoint);
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinitePoint { index, value });
        }
        Ok(Point(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Point(vec![0.0; dim])
    }

    pub fn basis(dim: usize, index: usize, scale: f64) -> Self {
        let mut p = Point::zeros(dim);
        p.0[index] = scale;
        p
    }

    /// Wraps coordinates produced by arithmetic on finite inputs.
    ///
    /// Debug builds still check finiteness.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        debug_assert!(coords.iter().all(|v| v.is_finite()), "non-finite point {coords:?}");
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    /// `self + scale * dir`.
    pub fn offset(&self, dir: &[f64], scale: f64) -> Vec<f64> {
        self.0.iter().zip(dir).map(|(x, z)| x + scale * z).collect()
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: self.dim() });
        }
        Ok(())
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Frank-Wolfe update `(1 - gamma) x + gamma v`.
pub fn fw_step(x: &Point, v: &Point, gamma: f64) -> Result<Point> {
    v.check_dim(x.dim())?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidStep(gamma));
    }
    let coords = x.iter().zip(v.iter()).map(|(xi, vi)| (1.0 - gamma) * xi + gamma * vi).collect();
    Ok(Point::from_vec_unchecked(coords))
}
