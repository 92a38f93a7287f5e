use crate::error::{Error, Result};

use super::{SignPattern, Vector};

/// Dense real matrix in column-major storage: entry (i, j) lives at
/// `data[i + j * rows]`. Constructors reject non-finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Wraps column-major `data` of length `rows * cols`.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("matrix must be non-empty".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "matrix entry ({}, {})",
                i % rows,
                i / rows
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds from row slices; handy for literal matrices in tests.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::DimensionMismatch("matrix must be non-empty".into()));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let mut data = vec![0.0; r * c];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                data[i + j * r] = v;
            }
        }
        DenseMatrix::new(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i + i * n] = 1.0;
        }
        m
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let n = entries.len();
        let mut m = DenseMatrix::zeros(n, n);
        for (i, &v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("diagonal entry {i}")));
            }
            m.data[i + i * n] = v;
        }
        Ok(m)
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        debug_assert!(data.iter().all(|v| v.is_finite()));
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + j * self.rows]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i + j * self.rows] = v;
    }

    /// Column `j` as a slice; columns are contiguous in this layout.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// All entries in column-major order.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn matvec(&self, x: &Vector) -> Vector {
        debug_assert_eq!(self.cols, x.len());
        let mut out = vec![0.0; self.rows];
        for j in 0..self.cols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let col = self.column(j);
            for i in 0..self.rows {
                out[i] += col[i] * xj;
            }
        }
        Vector::from_raw(out)
    }

    /// Computes `Aᵀ x` without forming the transpose.
    pub fn matvec_transpose(&self, x: &Vector) -> Vector {
        debug_assert_eq!(self.rows, x.len());
        let mut out = vec![0.0; self.cols];
        for (j, o) in out.iter_mut().enumerate() {
            let col = self.column(j);
            *o = col.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum();
        }
        Vector::from_raw(out)
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let bcol = other.column(j);
            let ocol = out.column_mut(j);
            for (k, &bkj) in bcol.iter().enumerate() {
                if bkj == 0.0 {
                    continue;
                }
                let acol = self.column(k);
                for i in 0..self.rows {
                    ocol[i] += acol[i] * bkj;
                }
            }
        }
        out
    }

    /// Computes `Aᵀ B` without forming the transpose.
    pub fn transpose_matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        debug_assert_eq!(self.rows, other.rows);
        let mut out = DenseMatrix::zeros(self.cols, other.cols);
        for j in 0..other.cols {
            let bcol = other.column(j);
            let ocol = out.column_mut(j);
            for (i, o) in ocol.iter_mut().enumerate() {
                let acol = self.column(i);
                *o = acol.iter().zip(bcol).map(|(a, b)| a * b).sum();
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.data[j + i * self.cols] = self.get(i, j);
            }
        }
        out
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        DenseMatrix::from_raw(self.rows, self.cols, data)
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix::from_raw(self.rows, self.cols, data)
    }

    pub fn scaled(&self, factor: f64) -> DenseMatrix {
        let data = self.data.iter().map(|v| v * factor).collect();
        DenseMatrix::from_raw(self.rows, self.cols, data)
    }

    /// Scales column `j` by `pattern_j`, i.e. forms `M · diag(pattern)`.
    pub fn mul_diag_right(&self, pattern: &SignPattern) -> DenseMatrix {
        debug_assert_eq!(self.cols, pattern.len());
        let mut out = self.clone();
        for j in 0..self.cols {
            if !pattern.is_positive(j) {
                for v in out.column_mut(j) {
                    *v = 0.0;
                }
            }
        }
        out
    }

    /// Adds `value` to each diagonal entry in place.
    pub fn add_diagonal(&mut self, value: f64) {
        debug_assert!(self.is_square());
        for i in 0..self.rows {
            self.data[i + i * self.rows] += value;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute difference between mirrored entries.
    pub fn symmetry_error(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut worst = 0.0f64;
        for j in 0..self.cols {
            for i in 0..j {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Replaces the matrix with its symmetric part `(M + Mᵀ)/2`.
    pub fn symmetrize(&mut self) {
        debug_assert!(self.is_square());
        for j in 0..self.cols {
            for i in 0..j {
                let avg = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, avg);
                self.set(j, i, avg);
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i + j * self.rows]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_column_major() {
        let m = DenseMatrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        // data = [col0; col1]
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 1), 4.0);
        assert_eq!(m[(1, 1)], 4.0);
    }

    #[test]
    fn from_rows_matches_get() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.get(1, 0), 3.0);
    }

    #[test]
    fn matvec_and_transpose_agree_with_explicit_transpose() {
        let m = DenseMatrix::from_rows(&[&[1.0, -2.0, 0.5], &[3.0, 4.0, -1.0]]).unwrap();
        let x = Vector::new(vec![2.0, -1.0]).unwrap();
        let explicit = m.transpose().matvec(&x);
        let implicit = m.matvec_transpose(&x);
        for i in 0..3 {
            assert!((explicit[i] - implicit[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn transpose_matmul_agrees() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, -4.0], &[0.5, 1.5]]).unwrap();
        let b = DenseMatrix::from_rows(&[&[2.0, 0.0], &[1.0, 1.0], &[-1.0, 2.0]]).unwrap();
        let fast = a.transpose_matmul(&b);
        let slow = a.transpose().matmul(&b);
        for i in 0..2 {
            for j in 0..2 {
                assert!((fast.get(i, j) - slow.get(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mul_diag_right_zeroes_columns() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let p = SignPattern::from_fn(2, |i| i == 1);
        let md = m.mul_diag_right(&p);
        assert_eq!(md.get(0, 0), 0.0);
        assert_eq!(md.get(1, 0), 0.0);
        assert_eq!(md.get(0, 1), 2.0);
        assert_eq!(md.get(1, 1), 4.0);
    }

    #[test]
    fn shape_and_finite_validation() {
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::new(2, 1, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::from_rows(&[]).is_err());
    }
}
