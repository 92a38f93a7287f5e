//! Self-contained dense real linear algebra: vectors, column-major matrices,
//! LU and Cholesky factorizations, power-iteration spectral norms and a
//! one-sided Jacobi SVD. All floating point is f64.

mod cholesky;
mod lu;
mod matrix;
mod spectral;
mod svd;
mod vector;

pub use cholesky::{CholeskyFactorization, SYMMETRY_TOLERANCE};
pub use lu::{LuFactorization, SINGULARITY_FACTOR};
pub use matrix::DenseMatrix;
pub use spectral::{
    operator_norm_bound_check, spectral_norm, spectral_norm_symmetric,
    DEFAULT_SPECTRAL_TOLERANCE, POWER_ITERATION_CAP,
};
pub use svd::{svd_jacobi, Svd};
pub use vector::Vector;

pub(crate) use spectral::psd_operator_lambda_max;

/// 0/1 activity pattern of a vector: bit `i` is 1 iff component `i` is
/// strictly positive. Patterns index the selection matrices `diag(sgn(x⁺))`
/// of the semi-smooth Newton iteration.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignPattern {
    bits: Vec<u8>,
}

impl SignPattern {
    pub fn from_fn(n: usize, positive: impl Fn(usize) -> bool) -> Self {
        SignPattern {
            bits: (0..n).map(|i| u8::from(positive(i))).collect(),
        }
    }

    /// Pattern from the low `n` bits of a mask, bit `i` for component `i`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        SignPattern::from_fn(n, |i| mask >> i & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_positive(&self, i: usize) -> bool {
        self.bits[i] == 1
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    /// Number of active (positive) components.
    pub fn active_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

impl std::fmt::Display for SignPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_round_trips_through_mask() {
        let p = SignPattern::from_mask(5, 0b10110);
        assert_eq!(p.as_slice(), &[0, 1, 1, 0, 1]);
        assert_eq!(p.active_count(), 3);
        assert_eq!(p.to_string(), "01101");
    }

    #[test]
    fn diag_of_pattern_times_x_is_plus_part() {
        let x = Vector::new(vec![2.0, -3.0, 0.0, 0.5]).unwrap();
        let p = x.sign_pattern();
        let picked: Vec<f64> = (0..x.len())
            .map(|i| if p.is_positive(i) { x[i] } else { 0.0 })
            .collect();
        assert_eq!(picked, x.plus_part().as_slice());
    }
}
