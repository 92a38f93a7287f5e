use crate::error::{Error, Result};

use super::SignPattern;

/// Dense real vector. Constructors reject NaN and infinities, so every
/// `Vector` in circulation holds finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    /// Wraps `data`, rejecting empty input and non-finite entries.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::DimensionMismatch("vector must be non-empty".into()));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("vector entry {i}")));
        }
        Ok(Vector { data })
    }

    pub fn zeros(n: usize) -> Self {
        Vector { data: vec![0.0; n] }
    }

    /// Internal constructor for arithmetic results already known to be finite.
    pub(crate) fn from_raw(data: Vec<f64>) -> Self {
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Vector { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Componentwise positive part, `max(x_i, 0)`.
    pub fn plus_part(&self) -> Vector {
        Vector::from_raw(self.data.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect())
    }

    /// Componentwise negative part, `max(-x_i, 0)`; `x = x⁺ - x⁻` holds exactly.
    pub fn minus_part(&self) -> Vector {
        Vector::from_raw(self.data.iter().map(|&v| if v < 0.0 { -v } else { 0.0 }).collect())
    }

    /// 0/1 pattern marking strictly positive components.
    ///
    /// Zero maps to 0, so the pattern of `x` is exactly the support of `x⁺`.
    pub fn sign_pattern(&self) -> SignPattern {
        SignPattern::from_fn(self.data.len(), |i| self.data[i] > 0.0)
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector::from_raw(self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector::from_raw(self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect())
    }

    pub fn scaled(&self, factor: f64) -> Vector {
        Vector::from_raw(self.data.iter().map(|v| v * factor).collect())
    }

    /// Smallest component.
    pub fn min_entry(&self) -> f64 {
        self.data.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}
