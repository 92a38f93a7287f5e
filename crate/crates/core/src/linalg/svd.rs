//! Singular value decomposition by one-sided Jacobi rotations.
//!
//! Rotations applied to column pairs of the working matrix implicitly
//! diagonalize the Gram matrix `GᵀG`: each rotation zeroes one off-diagonal
//! Gram entry. At convergence the working columns are mutually orthogonal
//! with norms equal to the singular values, the accumulated rotations give
//! the right factor exactly orthogonal (a product of plane rotations), and
//! the normalized columns give the left factor. The instance generator
//! relies on both factors being orthogonal to near machine precision.

use crate::error::{Error, Result};

use super::DenseMatrix;

/// Off-diagonal Gram entries are rotated away while
/// `|⟨g_i, g_j⟩| > JACOBI_THRESHOLD · ‖g_i‖ ‖g_j‖`.
const JACOBI_THRESHOLD: f64 = 1e-14;

const MAX_SWEEPS: usize = 64;

/// Factors `m = u · diag(sigma) · vt` with `sigma` sorted descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub vt: DenseMatrix,
}

/// One-sided Jacobi SVD of a square matrix.
///
/// Returns `SingularMatrix` on (numerically) rank-deficient input and
/// `NoConvergence` if the sweep cap is exhausted; callers drawing random
/// matrices treat both as degenerate draws.
pub fn svd_jacobi(m: &DenseMatrix) -> Result<Svd> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "SVD needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut g = m.clone();
    let mut v = DenseMatrix::identity(n);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n.saturating_sub(1) {
            for j in (i + 1)..n {
                let (aii, ajj, aij) = {
                    let gi = g.column(i);
                    let gj = g.column(j);
                    let mut aii = 0.0;
                    let mut ajj = 0.0;
                    let mut aij = 0.0;
                    for k in 0..n {
                        aii += gi[k] * gi[k];
                        ajj += gj[k] * gj[k];
                        aij += gi[k] * gj[k];
                    }
                    (aii, ajj, aij)
                };
                let scale = (aii * ajj).sqrt();
                if scale == 0.0 || aij.abs() <= JACOBI_THRESHOLD * scale {
                    continue;
                }
                rotated = true;
                let zeta = (ajj - aii) / (2.0 * aij);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut g, i, j, c, s);
                rotate_columns(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            procedure: "one-sided Jacobi SVD",
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| g.column(j).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let largest = sigma[0];
    if largest == 0.0 || sigma[n - 1] <= 1e-13 * largest {
        return Err(Error::SingularMatrix {
            pivot: sigma[n - 1],
            column: order[n - 1],
        });
    }

    let mut u = DenseMatrix::zeros(n, n);
    let mut vt = DenseMatrix::zeros(n, n);
    for (slot, &j) in order.iter().enumerate() {
        let col = g.column(j);
        for i in 0..n {
            u.set(i, slot, col[i] / sigma[slot]);
        }
        // Row `slot` of vt is column `j` of the accumulated rotations.
        let vcol = v.column(j);
        for i in 0..n {
            vt.set(slot, i, vcol[i]);
        }
    }

    Ok(Svd { u, sigma, vt })
}

/// Applies the plane rotation to columns `i` and `j`:
/// `(g_i, g_j) ← (c·g_i - s·g_j, s·g_i + c·g_j)`.
fn rotate_columns(m: &mut DenseMatrix, i: usize, j: usize, c: f64, s: f64) {
    let n = m.rows();
    for k in 0..n {
        let gi = m.get(k, i);
        let gj = m.get(k, j);
        m.set(k, i, c * gi - s * gj);
        m.set(k, j, s * gi + c * gj);
    }
}
