use crate::error::{Error, Result};

use super::{DenseMatrix, Vector};

/// Relative pivot threshold: a pivot counts as zero when its magnitude is at
/// or below `SINGULARITY_FACTOR * max_abs(original matrix)`.
pub const SINGULARITY_FACTOR: f64 = 1e-13;

/// LU factorization with partial (row) pivoting: `P A = L U` with unit lower
/// triangular `L` and upper triangular `U` packed into one matrix.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    packed: DenseMatrix,
    /// `perm[i]` is the original row index sitting at position `i` of `P A`.
    perm: Vec<usize>,
    smallest_pivot: f64,
}

impl LuFactorization {
    /// Factors a square matrix, failing with `SingularMatrix` when any pivot
    /// falls below the relative threshold.
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        let threshold = SINGULARITY_FACTOR * m.max_abs();
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut smallest = f64::INFINITY;

        for k in 0..n {
            let mut pivot_row = k;
            let mut pivot_abs = a.get(k, k).abs();
            for i in (k + 1)..n {
                let v = a.get(i, k).abs();
                if v > pivot_abs {
                    pivot_abs = v;
                    pivot_row = i;
                }
            }
            if pivot_abs <= threshold {
                return Err(Error::SingularMatrix {
                    pivot: pivot_abs,
                    column: k,
                });
            }
            if pivot_row != k {
                for j in 0..n {
                    let tmp = a.get(k, j);
                    a.set(k, j, a.get(pivot_row, j));
                    a.set(pivot_row, j, tmp);
                }
                perm.swap(k, pivot_row);
            }
            smallest = smallest.min(pivot_abs);
            let pivot = a.get(k, k);
            for i in (k + 1)..n {
                let factor = a.get(i, k) / pivot;
                a.set(i, k, factor);
                if factor == 0.0 {
                    continue;
                }
                for j in (k + 1)..n {
                    a.set(i, j, a.get(i, j) - factor * a.get(k, j));
                }
            }
        }

        Ok(LuFactorization {
            packed: a,
            perm,
            smallest_pivot: smallest,
        })
    }

    pub fn dim(&self) -> usize {
        self.packed.rows()
    }

    /// Magnitude of the smallest pivot accepted during elimination.
    pub fn smallest_pivot(&self) -> f64 {
        self.smallest_pivot
    }

    /// Solves `A x = rhs` by permutation, forward and back substitution.
    pub fn solve(&self, rhs: &Vector) -> Result<Vector> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "rhs has length {}, matrix is {n}x{n}",
                rhs.len()
            )));
        }
        // y solves L y = P rhs.
        let mut y: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 1..n {
            let mut acc = y[i];
            for j in 0..i {
                acc -= self.packed.get(i, j) * y[j];
            }
            y[i] = acc;
        }
        // x solves U x = y.
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in (i + 1)..n {
                acc -= self.packed.get(i, j) * y[j];
            }
            y[i] = acc / self.packed.get(i, i);
        }
        Vector::new(y).map_err(|_| Error::NonFinite("LU solve produced overflow".into()))
    }

    /// Solves `Aᵀ x = rhs` using the same factors: `Aᵀ = Uᵀ Lᵀ P`.
    pub fn solve_transpose(&self, rhs: &Vector) -> Result<Vector> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "rhs has length {}, matrix is {n}x{n}",
                rhs.len()
            )));
        }
        // z solves Uᵀ z = rhs (Uᵀ is lower triangular).
        let mut z = rhs.as_slice().to_vec();
        for i in 0..n {
            let mut acc = z[i];
            for j in 0..i {
                acc -= self.packed.get(j, i) * z[j];
            }
            z[i] = acc / self.packed.get(i, i);
        }
        // w solves Lᵀ w = z (unit diagonal, upper triangular).
        for i in (0..n).rev() {
            let mut acc = z[i];
            for j in (i + 1)..n {
                acc -= self.packed.get(j, i) * z[j];
            }
            z[i] = acc;
        }
        // x = Pᵀ w scatters position i back to original row perm[i].
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        Vector::new(x).map_err(|_| Error::NonFinite("LU transpose solve produced overflow".into()))
    }

    /// Pivot magnitudes along the diagonal of `U`.
    pub fn pivots(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.packed.get(i, i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factors_trivially() {
        let id = DenseMatrix::identity(3);
        let f = LuFactorization::factor(&id).unwrap();
        assert_eq!(f.smallest_pivot(), 1.0);
        assert!(f.pivots().iter().all(|&p| p == 1.0));
        let x = f.solve(&Vector::new(vec![5.0, -3.0, 2.0]).unwrap()).unwrap();
        assert_eq!(x.as_slice(), &[5.0, -3.0, 2.0]);
    }

    #[test]
    fn zero_diagonal_needs_a_row_swap() {
        let m = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let f = LuFactorization::factor(&m).unwrap();
        let x = f.solve(&Vector::new(vec![2.0, 3.0]).unwrap()).unwrap();
        // Solution of [[0,1],[1,0]] x = (2,3) is (3,2).
        assert_eq!(x.as_slice(), &[3.0, 2.0]);
    }

    #[test]
    fn rank_deficient_matrix_is_rejected() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        match LuFactorization::factor(&m) {
            Err(Error::SingularMatrix { .. }) => {}
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
    }

    #[test]
    fn diagonal_solve() {
        let m = DenseMatrix::diagonal(&[2.0, 4.0]).unwrap();
        let f = LuFactorization::factor(&m).unwrap();
        let x = f.solve(&Vector::new(vec![2.0, 8.0]).unwrap()).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn random_solve_recovers_known_vector() {
        let mut rng = crate::rng::Rng::new(31);
        let n = 10;
        let data: Vec<f64> = (0..n * n).map(|_| rng.symmetric(1.0)).collect();
        let m = DenseMatrix::new(n, n, data).unwrap();
        let y = Vector::new((0..n).map(|i| (i as f64) - 4.5).collect()).unwrap();
        let rhs = m.matvec(&y);
        let f = LuFactorization::factor(&m).unwrap();
        let x = f.solve(&rhs).unwrap();
        let err = x.sub(&y).norm() / y.norm();
        assert!(err < 1e-8, "relative error {err}");
    }

    #[test]
    fn transpose_solve_matches_explicit_transpose() {
        let mut rng = crate::rng::Rng::new(77);
        let n = 8;
        let data: Vec<f64> = (0..n * n).map(|_| rng.symmetric(2.0)).collect();
        let m = DenseMatrix::new(n, n, data).unwrap();
        let rhs = Vector::new((0..n).map(|i| ((i * 7) % 5) as f64 - 2.0).collect()).unwrap();
        let f = LuFactorization::factor(&m).unwrap();
        let ft = LuFactorization::factor(&m.transpose()).unwrap();
        let a = f.solve_transpose(&rhs).unwrap();
        let b = ft.solve(&rhs).unwrap();
        assert!(a.sub(&b).norm() < 1e-10 * (1.0 + b.norm()));
    }

    #[test]
    fn residual_scaling_of_solves() {
        let mut rng = crate::rng::Rng::new(5);
        for trial in 0..20 {
            let n = 3 + trial % 6;
            let data: Vec<f64> = (0..n * n).map(|_| rng.symmetric(10.0)).collect();
            let m = match DenseMatrix::new(n, n, data) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let f = match LuFactorization::factor(&m) {
                Ok(f) => f,
                Err(_) => continue,
            };
            let rhs = Vector::new((0..n).map(|_| rng.symmetric(10.0)).collect()).unwrap();
            let x = f.solve(&rhs).unwrap();
            let resid = m.matvec(&x).sub(&rhs).norm();
            let bound = 1e-10 * (m.frobenius_norm() * x.norm() + rhs.norm());
            assert!(resid <= bound, "residual {resid} vs bound {bound}");
        }
    }
}
