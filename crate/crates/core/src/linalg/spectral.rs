//! Spectral norms via power iteration on symmetric positive semidefinite
//! operators.
//!
//! For a symmetric `M` the norm is `sqrt(λ_max(M²))`; for a general square
//! `G` it is `sqrt(λ_max(Gᵀ G))`. Both squares are PSD, so one power
//! iteration routine over an abstract operator serves every caller,
//! including the solver checks that iterate on `(Sᵀ S)⁻¹` through a pair of
//! triangular solves.

use crate::error::{Error, Result};
use crate::rng::splitmix64;

use super::{DenseMatrix, Vector};

/// Iteration cap for all power iterations in this module.
pub const POWER_ITERATION_CAP: usize = 10_000;

/// Default relative tolerance on the extreme eigenvalue.
pub const DEFAULT_SPECTRAL_TOLERANCE: f64 = 1e-12;

/// Start vector: all ones plus a fixed sub-1% splitmix64 jitter, normalized.
/// The jitter keeps the start from being exactly orthogonal to a top
/// eigenvector (the plain all-ones vector is, for example, orthogonal to the
/// top eigenspace of [[1, -2], [-2, 1]]), while staying fully deterministic.
fn start_vector(n: usize) -> Vec<f64> {
    let mut state = 0x5EED_5EED_5EED_5EEDu64;
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            let jitter = (splitmix64(&mut state) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            1.0 + 0.008 * (jitter - 0.5)
        })
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v
}

/// Largest eigenvalue of a symmetric PSD operator given by `apply`.
///
/// Convergence is declared on the eigen-residual `‖Op x - ν x‖ ≤ tol·ν` for
/// the unit iterate `x` with Rayleigh quotient `ν`, which for symmetric
/// operators bounds the eigenvalue error by `tol·ν`. A cluster of nearly
/// equal extreme eigenvalues therefore slows the iteration down rather than
/// letting it stop on a wrong value; the cap turns that into `NoConvergence`.
pub(crate) fn psd_operator_lambda_max<F>(n: usize, tol: f64, mut apply: F) -> Result<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut x = start_vector(n);
    let mut y = vec![0.0; n];
    for _ in 0..POWER_ITERATION_CAP {
        apply(&x, &mut y);
        let nu: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let nu = nu.max(0.0);
        let mut resid_sq = 0.0;
        for i in 0..n {
            let d = y[i] - nu * x[i];
            resid_sq += d * d;
        }
        if resid_sq.sqrt() <= tol * nu {
            return Ok(nu);
        }
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if ynorm == 0.0 {
            // The operator annihilates a generic vector; treat it as zero.
            return Ok(0.0);
        }
        for i in 0..n {
            x[i] = y[i] / ynorm;
        }
    }
    Err(Error::NoConvergence {
        procedure: "power iteration",
        iterations: POWER_ITERATION_CAP,
    })
}

/// Spectral norm (largest absolute eigenvalue) of a symmetric matrix, to
/// relative accuracy `tol`, via power iteration on `M²`.
pub fn spectral_norm_symmetric(m: &DenseMatrix, tol: f64) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "spectral norm needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let allowed = super::cholesky::SYMMETRY_TOLERANCE * m.max_abs();
    let asymmetry = m.symmetry_error();
    if asymmetry > allowed {
        return Err(Error::NotSymmetric { asymmetry, allowed });
    }
    if m.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let n = m.rows();
    let lambda = psd_operator_lambda_max(n, tol, |x, y| {
        let t = m.matvec(&Vector::from_raw(x.to_vec()));
        let t2 = m.matvec(&t);
        y.copy_from_slice(t2.as_slice());
    })?;
    Ok(lambda.sqrt())
}

/// Spectral norm of a general square matrix via power iteration on `Gᵀ G`.
pub fn spectral_norm(g: &DenseMatrix, tol: f64) -> Result<f64> {
    if !g.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "spectral norm needs a square matrix, got {}x{}",
            g.rows(),
            g.cols()
        )));
    }
    if g.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let n = g.rows();
    let lambda = psd_operator_lambda_max(n, tol, |x, y| {
        let t = g.matvec(&Vector::from_raw(x.to_vec()));
        let t2 = g.matvec_transpose(&t);
        y.copy_from_slice(t2.as_slice());
    })?;
    Ok(lambda.sqrt())
}

/// Checks submultiplicativity `‖L M‖ ≤ ‖L‖ ‖M‖` up to a `1e-10` slack.
/// Property-test helper; `L` and `M` must be square of equal size.
pub fn operator_norm_bound_check(l: &DenseMatrix, m: &DenseMatrix) -> Result<bool> {
    if !l.is_square() || !m.is_square() || l.rows() != m.rows() {
        return Err(Error::DimensionMismatch(
            "operator norm bound check needs square matrices of equal size".into(),
        ));
    }
    let tol = DEFAULT_SPECTRAL_TOLERANCE;
    let product_norm = spectral_norm(&l.matmul(m), tol)?;
    let bound = spectral_norm(l, tol)? * spectral_norm(m, tol)?;
    Ok(product_norm <= bound + 1e-10)
}
