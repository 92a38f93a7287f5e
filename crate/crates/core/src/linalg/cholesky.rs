use crate::error::{Error, Result};

use super::DenseMatrix;

/// Relative symmetry tolerance for factorization inputs.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Cholesky factorization `M = L Lᵀ` of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct CholeskyFactorization {
    lower: DenseMatrix,
}

impl CholeskyFactorization {
    /// Factors `m`, rejecting asymmetric input and reporting
    /// `NotPositiveDefinite` at the first non-positive pivot.
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Cholesky needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let allowed = SYMMETRY_TOLERANCE * m.max_abs();
        let asymmetry = m.symmetry_error();
        if asymmetry > allowed {
            return Err(Error::NotSymmetric { asymmetry, allowed });
        }
        let n = m.rows();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut diag = m.get(j, j);
            for k in 0..j {
                let v = l.get(j, k);
                diag -= v * v;
            }
            if !(diag > 0.0) {
                return Err(Error::NotPositiveDefinite {
                    pivot: diag,
                    index: j,
                });
            }
            let root = diag.sqrt();
            l.set(j, j, root);
            for i in (j + 1)..n {
                let mut acc = m.get(i, j);
                for k in 0..j {
                    acc -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, acc / root);
            }
        }
        Ok(CholeskyFactorization { lower: l })
    }

    /// The lower triangular factor.
    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_its_own_factor() {
        let f = CholeskyFactorization::factor(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(f.lower(), &DenseMatrix::identity(3));
    }

    #[test]
    fn diagonal_factor_takes_roots() {
        let m = DenseMatrix::diagonal(&[4.0, 9.0]).unwrap();
        let f = CholeskyFactorization::factor(&m).unwrap();
        assert_eq!(f.lower().get(0, 0), 2.0);
        assert_eq!(f.lower().get(1, 1), 3.0);
        assert_eq!(f.lower().get(1, 0), 0.0);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        match CholeskyFactorization::factor(&m) {
            Err(Error::NotPositiveDefinite { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let m = DenseMatrix::from_rows(&[&[1.0, 0.5], &[0.2, 1.0]]).unwrap();
        assert!(matches!(
            CholeskyFactorization::factor(&m),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn reconstruction_error_is_small() {
        let mut rng = crate::rng::Rng::new(6);
        for _ in 0..10 {
            let n = 6;
            let data: Vec<f64> = (0..n * n).map(|_| rng.symmetric(3.0)).collect();
            let b = DenseMatrix::new(n, n, data).unwrap();
            let mut spd = b.transpose_matmul(&b);
            spd.add_diagonal(0.5);
            spd.symmetrize();
            let f = CholeskyFactorization::factor(&spd).unwrap();
            let l = f.lower();
            let rebuilt = l.matmul(&l.transpose());
            let err = rebuilt.sub(&spd).max_abs();
            assert!(err <= 1e-12 * spd.max_abs().max(1.0), "error {err}");
        }
    }
}
