//! Independent reference solvers for cross-checking the Newton iteration.
//!
//! `enumerate_solve` tries every one of the `2ⁿ` sign patterns: a root of
//! `F` with pattern `d` solves the linear system `(M·diag(d) + I) x = -q`,
//! so solving that system for each `d` and keeping the sign-consistent
//! candidates finds every root exactly, with no iteration involved.
//! `projected_gradient_oracle` minimizes the orthant form of a problem by a
//! plain projected gradient method, sharing no code path with either the
//! Newton solver or the enumeration.

use crate::error::{Error, Result};
use crate::linalg::{
    spectral_norm_symmetric, LuFactorization, SignPattern, Vector, DEFAULT_SPECTRAL_TOLERANCE,
};
use crate::model::{QpProblem, SemiSmoothSystem};

/// Enumeration is capped at `2^ENUMERATION_CAP` candidate patterns.
pub const ENUMERATION_CAP: usize = 20;

/// Componentwise slack when classifying a candidate as sign-consistent.
pub const SIGN_CONSISTENCY_TOLERANCE: f64 = 1e-12;

/// All roots of `F` found by pattern enumeration.
#[derive(Clone, Debug)]
pub struct OracleResult {
    /// Sign-consistent roots with the pattern that produced each,
    /// deduplicated within `1e-10 · (1 + ‖x‖)`.
    pub solutions: Vec<(SignPattern, Vector)>,
    /// Exactly one distinct root was found.
    pub unique: bool,
}

impl OracleResult {
    /// The root, when it is unique.
    pub fn solution(&self) -> Option<&Vector> {
        if self.unique {
            Some(&self.solutions[0].1)
        } else {
            None
        }
    }
}

/// Solves the system by full sign-pattern enumeration. `n ≤ 20` only.
///
/// Components within `±1e-12` of zero are accepted under either pattern, so
/// roots sitting on a boundary may be found twice; deduplication folds them
/// back together. When `‖M‖ < 1` the root is provably unique, and finding
/// several distinct ones is reported as `UniquenessViolated`.
///
/// Patterns whose matrix `S_D = M D + I` is singular are skipped: they
/// cannot carry an isolated root, and they only arise when `‖M‖ ≥ 1`, where
/// the nonsingularity guarantee no longer applies.
pub fn enumerate_solve(s: &SemiSmoothSystem) -> Result<OracleResult> {
    let n = s.dim();
    if n > ENUMERATION_CAP {
        return Err(Error::DimensionTooLarge {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    let minus_q = s.q().scaled(-1.0);
    let residual_gate = 1e-9 * (1.0 + s.q().norm());
    let mut solutions: Vec<(SignPattern, Vector)> = Vec::new();

    for mask in 0..(1u64 << n) {
        let pattern = SignPattern::from_mask(n, mask);
        let jac = s.jacobian(&pattern)?;
        let factors = match LuFactorization::factor(&jac) {
            Ok(f) => f,
            Err(Error::SingularMatrix { .. }) => continue,
            Err(e) => return Err(e),
        };
        let x = factors.solve(&minus_q)?;
        let consistent = (0..n).all(|i| {
            if pattern.is_positive(i) {
                x[i] >= -SIGN_CONSISTENCY_TOLERANCE
            } else {
                x[i] <= SIGN_CONSISTENCY_TOLERANCE
            }
        });
        if !consistent {
            continue;
        }
        if s.residual_norm(&x)? > residual_gate {
            continue;
        }
        let duplicate = solutions
            .iter()
            .any(|(_, y)| x.sub(y).norm() <= 1e-10 * (1.0 + y.norm()));
        if !duplicate {
            solutions.push((pattern, x));
        }
    }

    let unique = solutions.len() == 1;
    if s.norm_m() < 1.0 && !unique && !solutions.is_empty() {
        return Err(Error::UniquenessViolated {
            count: solutions.len(),
        });
    }
    Ok(OracleResult { solutions, unique })
}

/// Minimizes the orthant form `½ vᵀ Q̃ v + b̃ᵀ v` over `v ≥ 0` by projected
/// gradient steps `v ← (v - ∇/L)⁺` with `L = ‖Q̃‖`, starting from `v = 0`.
/// Returns `v`; `A v` approximates the problem's minimizer.
pub fn projected_gradient_oracle(p: &QpProblem, iterations: usize) -> Result<Vector> {
    let a = p.cone_matrix();
    let mut qtilde = a.transpose_matmul(&p.hessian().matmul(a));
    qtilde.symmetrize();
    let btilde = a.matvec_transpose(p.linear_term());
    let lipschitz = spectral_norm_symmetric(&qtilde, DEFAULT_SPECTRAL_TOLERANCE)?;
    if !(lipschitz > 0.0) {
        return Err(Error::PreconditionViolated(
            "orthant Hessian has zero norm".into(),
        ));
    }
    let step = 1.0 / lipschitz;
    let mut v = Vector::zeros(p.dim());
    for _ in 0..iterations {
        let gradient = qtilde.matvec(&v).add(&btilde);
        v = v.sub(&gradient.scaled(step)).plus_part();
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::model::{build_system, projection_problem};

    #[test]
    fn zero_m_oracle_finds_minus_q() {
        let s = SemiSmoothSystem::from_parts(
            DenseMatrix::zeros(2, 2),
            Vector::new(vec![1.0, -2.0]).unwrap(),
        )
        .unwrap();
        let result = enumerate_solve(&s).unwrap();
        assert!(result.unique);
        let u = result.solution().unwrap();
        assert_eq!(u.as_slice(), &[-1.0, 2.0]);
    }

    #[test]
    fn frozen_two_dimensional_root() {
        let s = SemiSmoothSystem::from_parts(
            DenseMatrix::diagonal(&[0.4, 0.4]).unwrap(),
            Vector::new(vec![1.0, -1.0]).unwrap(),
        )
        .unwrap();
        let result = enumerate_solve(&s).unwrap();
        assert!(result.unique);
        let u = result.solution().unwrap();
        assert!((u[0] + 1.0).abs() < 1e-14);
        assert!((u[1] - 5.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let n = ENUMERATION_CAP + 1;
        let s = SemiSmoothSystem::from_parts(DenseMatrix::zeros(n, n), Vector::zeros(n)).unwrap();
        assert!(matches!(
            enumerate_solve(&s),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn boundary_root_is_deduplicated() {
        // q = (0, -1): the root x = (0, 1) sits on the boundary of the first
        // component and is sign-consistent under both patterns of bit 0.
        let s = SemiSmoothSystem::from_parts(
            DenseMatrix::zeros(2, 2),
            Vector::new(vec![0.0, -1.0]).unwrap(),
        )
        .unwrap();
        let result = enumerate_solve(&s).unwrap();
        assert!(result.unique, "solutions: {:?}", result.solutions);
        assert_eq!(result.solution().unwrap().as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn projected_gradient_on_identity_projection() {
        let z = Vector::new(vec![3.0, -1.0]).unwrap();
        let p = projection_problem(DenseMatrix::identity(2), &z).unwrap();
        let v = projected_gradient_oracle(&p, 200).unwrap();
        assert!((v[0] - 3.0).abs() < 1e-6);
        assert!(v[1].abs() < 1e-6);
    }

    #[test]
    fn projected_gradient_stays_at_zero_for_nonnegative_btilde() {
        let p = QpProblem::new(
            DenseMatrix::identity(2),
            Vector::new(vec![0.5, 1.5]).unwrap(),
            0.0,
            DenseMatrix::identity(2),
        )
        .unwrap();
        let v = projected_gradient_oracle(&p, 100).unwrap();
        assert_eq!(v.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn oracle_agrees_with_projected_gradient_objective() {
        let mut rng = crate::rng::Rng::new(60);
        for _ in 0..10 {
            let n = 4;
            let raw: Vec<f64> = (0..n * n).map(|_| rng.symmetric(1.0)).collect();
            let a = match DenseMatrix::new(n, n, raw) {
                Ok(a) if LuFactorization::factor(&a).is_ok() => a,
                _ => continue,
            };
            let z = Vector::new((0..n).map(|_| rng.symmetric(2.0)).collect()).unwrap();
            let p = projection_problem(a, &z).unwrap();
            let s = build_system(&p).unwrap();
            let oracle = enumerate_solve(&s).unwrap();
            let Some(u) = oracle.solution() else { continue };
            let newton_obj = p.objective(&s.recover_qp_solution(u).unwrap()).unwrap();
            let v = projected_gradient_oracle(&p, 20_000).unwrap();
            let pg_obj = p
                .objective(&p.cone_matrix().matvec(&v))
                .unwrap();
            assert!(
                (newton_obj - pg_obj).abs() <= 1e-6 * (1.0 + newton_obj.abs()),
                "objectives {newton_obj} vs {pg_obj}"
            );
        }
    }
}
