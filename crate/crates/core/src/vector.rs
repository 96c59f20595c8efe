use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point of ℝᵈ.
///
/// Vectors built through [`Vector::new`] have at least one coordinate and
/// only finite coordinates. Arithmetic does not re-check finiteness, so an
/// overflowing iteration can produce infinities; the iterative routines test
/// for that themselves.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Vector<S>(Vec<S>);

impl<S: Real> Vector<S> {
    pub fn new(coords: Vec<S>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index });
        }
        Ok(Self(coords))
    }

    pub fn from_f64(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| S::lit(c)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self(vec![S::zero(); dim])
    }

    pub fn constant(dim: usize, value: S) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self(vec![value; dim])
    }

    pub(crate) fn from_raw(coords: Vec<S>) -> Self {
        debug_assert!(!coords.is_empty());
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<S> {
        self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.as_f64()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &Self) -> S {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(&a, &b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> S {
        self.dot(self)
    }

    /// Euclidean norm, computed with scaling so large iterates do not overflow.
    pub fn norm(&self) -> S {
        let scale = self.norm_inf();
        if scale == S::zero() || !scale.is_finite() {
            return scale;
        }
        let sum: S = self.0.iter().map(|&c| (c / scale) * (c / scale)).sum();
        scale * sum.sqrt()
    }

    pub fn norm_inf(&self) -> S {
        self.0.iter().fold(S::zero(), |m, c| m.max(c.abs()))
    }

    pub fn distance(&self, other: &Self) -> S {
        (self - other).norm()
    }

    pub fn scale(&self, factor: S) -> Self {
        Self(self.0.iter().map(|&c| c * factor).collect())
    }

    /// `self + factor * other`
    pub fn axpy(&self, factor: S, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| a + factor * b).collect())
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self(self.0.iter().map(|&c| f(c)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Self>) -> Self {
        Self(parts.into_iter().flat_map(|p| p.0.iter().copied()).collect())
    }

    pub fn slice(&self, start: usize, len: usize) -> Self {
        Self(self.0[start..start + len].to_vec())
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        }
    }
}

impl<S: Real> TryFrom<Vec<S>> for Vector<S> {
    type Error = Error;

    fn try_from(coords: Vec<S>) -> Result<Self> {
        Self::new(coords)
    }
}

impl<S> Index<usize> for Vector<S> {
    type Output = S;

    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

impl<S: Real> Add for &Vector<S> {
    type Output = Vector<S>;

    fn add(self, rhs: Self) -> Vector<S> {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl<S: Real> Sub for &Vector<S> {
    type Output = Vector<S>;

    fn sub(self, rhs: Self) -> Vector<S> {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl<S: Real> Neg for &Vector<S> {
    type Output = Vector<S>;

    fn neg(self) -> Vector<S> {
        self.map(|c| -c)
    }
}

impl<S: Real> Mul<S> for &Vector<S> {
    type Output = Vector<S>;

    fn mul(self, rhs: S) -> Vector<S> {
        self.scale(rhs)
    }
}
