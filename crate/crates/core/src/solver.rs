//! Semi-smooth Newton iteration and its fixed-point companion.
//!
//! The Newton step at `x` solves `S(x) x⁺ = -q` with
//! `S(x) = M·diag(sgn(x⁺)) + I`; the next iterate is the solution itself,
//! not an additive update, so each step lands exactly on the piecewise-linear
//! model's root for the current pattern. Once two consecutive iterates share
//! a sign pattern the iterate is a root of `F` up to linear-solve error and
//! the run stops (finite termination). Below `‖M‖ < 1/2` the error contracts
//! at rate `‖M‖ / (1 - ‖M‖)` per step; the fixed-point map
//! `φ(x) = -M x⁺ - q` contracts whenever `‖M‖ < 1`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{
    psd_operator_lambda_max, spectral_norm, LuFactorization, SignPattern, Vector,
    DEFAULT_SPECTRAL_TOLERANCE,
};
use crate::model::SemiSmoothSystem;

/// Iteration method.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Newton,
    FixedPoint,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Newton => write!(f, "newton"),
            Method::FixedPoint => write!(f, "fixed-point"),
        }
    }
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// Residual dropped below `tol_res · (1 + ‖q‖)`.
    ConvergedResidual,
    /// Distance to the supplied solution dropped below `tol_x · (1 + ‖u‖)`.
    ConvergedKnownSolution,
    /// Two consecutive iterates shared a sign pattern; the last iterate is a
    /// root up to linear-solve error.
    FiniteTermination,
    /// Iteration cap reached, or a revisited pattern announced a cycle.
    MaxIterations,
}

impl SolveStatus {
    pub fn converged(self) -> bool {
        !matches!(self, SolveStatus::MaxIterations)
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::ConvergedResidual => "converged-residual",
            SolveStatus::ConvergedKnownSolution => "converged-known-solution",
            SolveStatus::FiniteTermination => "finite-termination",
            SolveStatus::MaxIterations => "max-iterations",
        };
        write!(f, "{s}")
    }
}

/// Solver controls. Both tolerances are relative: the residual test scales
/// by `1 + ‖q‖`, the known-solution test by `1 + ‖u‖`.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub method: Method,
    pub tol_x: f64,
    pub tol_res: f64,
    pub max_iter: usize,
    /// Record per-step contraction ratios when a known solution is supplied.
    pub track_rate: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Newton,
            tol_x: 1e-6,
            tol_res: 1e-12,
            max_iter: 100,
            track_rate: true,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol_x > 0.0) || !(self.tol_res > 0.0) {
            return Err(Error::PreconditionViolated(
                "solver tolerances must be positive".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::PreconditionViolated(
                "max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One recorded iterate.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Vector,
    pub residual_norm: f64,
    pub pattern: SignPattern,
    /// Smallest pivot of the Newton matrix factored to leave this iterate;
    /// absent on the final record and for fixed-point steps.
    pub smallest_pivot: Option<f64>,
}

/// Full account of a run.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Number of steps taken; the trace holds `iterations + 1` records.
    pub iterations: usize,
    pub final_x: Vector,
    pub final_residual_norm: f64,
    pub trace: Vec<IterationRecord>,
    /// `‖M‖ / (1 - ‖M‖)` when `‖M‖ < 1`.
    pub rate_bound: Option<f64>,
    /// Observed ratios `‖u - x_{k+1}‖ / ‖u - x_k‖`; empty without a known
    /// solution or with `track_rate` off.
    pub contraction_observed: Vec<f64>,
    /// A non-consecutive sign pattern was revisited; the iteration would
    /// repeat forever, so the run was cut short with `MaxIterations`.
    pub cycle_detected: bool,
}

/// One Newton step from `x`: solves `S(x) x_next = -q`.
pub fn newton_step(s: &SemiSmoothSystem, x: &Vector) -> Result<Vector> {
    let (next, _) = newton_step_with_pivot(s, x)?;
    Ok(next)
}

fn newton_step_with_pivot(s: &SemiSmoothSystem, x: &Vector) -> Result<(Vector, f64)> {
    let jac = s.jacobian(&x.sign_pattern())?;
    let factors = LuFactorization::factor(&jac)?;
    let next = factors.solve(&s.q().scaled(-1.0))?;
    Ok((next, factors.smallest_pivot()))
}

/// One fixed-point step `φ(x) = -M x⁺ - q`.
pub fn fixed_point_step(s: &SemiSmoothSystem, x: &Vector) -> Result<Vector> {
    if x.len() != s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "iterate has length {}, system dimension is {}",
            x.len(),
            s.dim()
        )));
    }
    Ok(s.m().matvec(&x.plus_part()).add(s.q()).scaled(-1.0))
}

/// Runs the iteration from `x0`.
///
/// Stopping checks per iterate, in order: known-solution distance (when
/// `known_solution` is given), relative residual, pattern repetition
/// (Newton only), iteration cap. Cycle detection watches for revisits of
/// non-consecutive patterns, which pin the iteration to a loop.
pub fn solve(
    s: &SemiSmoothSystem,
    x0: &Vector,
    config: &SolverConfig,
    known_solution: Option<&Vector>,
) -> Result<SolveReport> {
    config.validate()?;
    if x0.len() != s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "start has length {}, system dimension is {}",
            x0.len(),
            s.dim()
        )));
    }
    if let Some(u) = known_solution {
        if u.len() != s.dim() {
            return Err(Error::DimensionMismatch(format!(
                "known solution has length {}, system dimension is {}",
                u.len(),
                s.dim()
            )));
        }
    }

    let residual_gate = config.tol_res * (1.0 + s.q().norm());
    let solution_gate = known_solution.map(|u| (u, config.tol_x * (1.0 + u.norm())));

    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut seen: HashMap<SignPattern, usize> = HashMap::new();
    let mut x = x0.clone();
    let mut cycle_detected = false;

    let status = loop {
        let k = trace.len();
        let pattern = x.sign_pattern();
        let residual_norm = s.residual_norm(&x)?;
        trace.push(IterationRecord {
            k,
            x: x.clone(),
            residual_norm,
            pattern: pattern.clone(),
            smallest_pivot: None,
        });

        if let Some((u, gate)) = solution_gate {
            if u.sub(&x).norm() < gate {
                break SolveStatus::ConvergedKnownSolution;
            }
        }
        if residual_norm <= residual_gate {
            break SolveStatus::ConvergedResidual;
        }
        if config.method == Method::Newton {
            if k >= 1 && trace[k - 1].pattern == pattern {
                break SolveStatus::FiniteTermination;
            }
            if let Some(&first) = seen.get(&pattern) {
                if first + 1 < k {
                    cycle_detected = true;
                    break SolveStatus::MaxIterations;
                }
            }
            seen.entry(pattern).or_insert(k);
        }
        if k == config.max_iter {
            break SolveStatus::MaxIterations;
        }

        x = match config.method {
            Method::Newton => {
                let (next, pivot) = newton_step_with_pivot(s, &x).map_err(|e| match e {
                    Error::SingularMatrix { pivot, .. } => Error::SingularStep {
                        iteration: k,
                        pivot,
                    },
                    other => other,
                })?;
                trace.last_mut().expect("trace is non-empty").smallest_pivot = Some(pivot);
                next
            }
            Method::FixedPoint => fixed_point_step(s, &x)?,
        };
    };

    let last = trace.last().expect("trace is non-empty");
    let contraction_observed = match (config.track_rate, known_solution) {
        (true, Some(u)) => {
            let mut ratios = Vec::with_capacity(trace.len().saturating_sub(1));
            for pair in trace.windows(2) {
                let before = u.sub(&pair[0].x).norm();
                let after = u.sub(&pair[1].x).norm();
                if before > 0.0 {
                    ratios.push(after / before);
                }
            }
            ratios
        }
        _ => Vec::new(),
    };
    let rate_bound = if s.norm_m() < 1.0 {
        Some(s.norm_m() / (1.0 - s.norm_m()))
    } else {
        None
    };

    Ok(SolveReport {
        status,
        iterations: trace.len() - 1,
        final_x: last.x.clone(),
        final_residual_norm: last.residual_norm,
        rate_bound,
        contraction_observed,
        cycle_detected,
        trace,
    })
}

/// Checks the contraction bound `‖u - x_{k+1}‖ ≤ ρ ‖u - x_k‖ + slack` with
/// `ρ = ‖M‖ / (1 - ‖M‖)` over every consecutive pair of the trace, with an
/// absolute slack of `1e-10 · (1 + ‖u‖)` for rounding.
///
/// Requires `‖M‖ < 1/2`; outside that regime the bound is meaningless and
/// `PreconditionViolated` is returned.
pub fn verify_rate(report: &SolveReport, s: &SemiSmoothSystem, u: &Vector) -> Result<bool> {
    if !(s.norm_m() < 0.5) {
        return Err(Error::PreconditionViolated(format!(
            "verify_rate needs ‖M‖ < 1/2, got {}",
            s.norm_m()
        )));
    }
    let rho = s.norm_m() / (1.0 - s.norm_m());
    let slack = 1e-10 * (1.0 + u.norm());
    for pair in report.trace.windows(2) {
        let before = u.sub(&pair[0].x).norm();
        let after = u.sub(&pair[1].x).norm();
        if after > rho * before + slack {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks `‖S(x)⁻¹‖ ≤ 1 / (1 - ‖M‖)` at `x`, with `1e-8` slack.
///
/// `‖S⁻¹‖ = 1/σ_min(S)` is computed by power iteration on `(SᵀS)⁻¹`,
/// applied through one LU factorization of `S` and a solve plus a transpose
/// solve per step. Requires `‖M‖ < 1`.
pub fn inverse_norm_bound_check(s: &SemiSmoothSystem, x: &Vector) -> Result<bool> {
    if !(s.norm_m() < 1.0) {
        return Err(Error::PreconditionViolated(format!(
            "inverse norm bound needs ‖M‖ < 1, got {}",
            s.norm_m()
        )));
    }
    let jac = s.jacobian(&x.sign_pattern())?;
    let factors = LuFactorization::factor(&jac)?;
    let n = s.dim();
    let mut failure: Option<Error> = None;
    let lambda = psd_operator_lambda_max(n, DEFAULT_SPECTRAL_TOLERANCE, |v, out| {
        let input = Vector::from_raw(v.to_vec());
        let applied = factors
            .solve_transpose(&input)
            .and_then(|t| factors.solve(&t));
        match applied {
            Ok(res) => out.copy_from_slice(res.as_slice()),
            Err(e) => {
                failure = Some(e);
                out.fill(0.0);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let inverse_norm = lambda.sqrt();
    Ok(inverse_norm <= 1.0 / (1.0 - s.norm_m()) + 1e-8)
}

/// Checks both perturbation bounds behind the convergence proof:
/// `‖S(x) - S(y)‖ ≤ ‖M‖` and
/// `‖F(x) - F(y) - S(y)(x - y)‖ ≤ ‖M‖ ‖x - y‖`, each with a small slack.
pub fn perturbation_bound_check(s: &SemiSmoothSystem, x: &Vector, y: &Vector) -> Result<bool> {
    let s_x = s.jacobian(&x.sign_pattern())?;
    let s_y = s.jacobian(&y.sign_pattern())?;
    let diff_norm = spectral_norm(&s_x.sub(&s_y), DEFAULT_SPECTRAL_TOLERANCE)?;
    if diff_norm > s.norm_m() + 1e-10 {
        return Ok(false);
    }
    let step = x.sub(y);
    let linearization = s
        .residual(x)?
        .sub(&s.residual(y)?)
        .sub(&s_y.matvec(&step));
    let bound = s.norm_m() * step.norm() + 1e-10 * (1.0 + step.norm());
    Ok(linearization.norm() <= bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn system(m: DenseMatrix, q: Vec<f64>) -> SemiSmoothSystem {
        SemiSmoothSystem::from_parts(m, Vector::new(q).unwrap()).unwrap()
    }

    #[test]
    fn newton_step_with_zero_m_lands_on_minus_q() {
        let s = system(DenseMatrix::zeros(2, 2), vec![1.0, -2.0]);
        let next = newton_step(&s, &Vector::new(vec![5.0, 5.0]).unwrap()).unwrap();
        assert_eq!(next.as_slice(), &[-1.0, 2.0]);
    }

    #[test]
    fn newton_step_frozen_example() {
        let s = system(DenseMatrix::diagonal(&[0.4, 0.4]).unwrap(), vec![1.0, -1.0]);
        let next = newton_step(&s, &Vector::new(vec![1.0, 1.0]).unwrap()).unwrap();
        assert!((next[0] - (-5.0 / 7.0)).abs() < 1e-15);
        assert!((next[1] - 5.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn newton_step_fixes_a_root() {
        // Root of this system: u = (-1, 5/7), worked out by pattern.
        let s = system(DenseMatrix::diagonal(&[0.4, 0.4]).unwrap(), vec![1.0, -1.0]);
        let u = Vector::new(vec![-1.0, 5.0 / 7.0]).unwrap();
        assert!(s.residual_norm(&u).unwrap() < 1e-15);
        let next = newton_step(&s, &u).unwrap();
        assert!(next.sub(&u).norm() < 1e-15);
    }

    #[test]
    fn fixed_point_steps_follow_the_map() {
        let s = system(DenseMatrix::diagonal(&[0.4, 0.4]).unwrap(), vec![1.0, -1.0]);
        let x0 = Vector::zeros(2);
        let x1 = fixed_point_step(&s, &x0).unwrap();
        assert_eq!(x1.as_slice(), &[-1.0, 1.0]);
        let x2 = fixed_point_step(&s, &x1).unwrap();
        assert_eq!(x2.as_slice(), &[-1.0, 0.6]);
        // One contraction step toward u at exactly the rate ‖M‖.
        let u = Vector::new(vec![-1.0, 5.0 / 7.0]).unwrap();
        let before = u.sub(&x1).norm();
        let after = u.sub(&x2).norm();
        assert!(after <= 0.4 * before + 1e-12, "{after} vs {before}");
    }

    #[test]
    fn zero_m_solves_in_one_step() {
        let s = system(DenseMatrix::zeros(2, 2), vec![1.0, -2.0]);
        let report = solve(
            &s,
            &Vector::new(vec![9.0, -3.0]).unwrap(),
            &SolverConfig::default(),
            None,
        )
        .unwrap();
        assert_eq!(report.iterations, 1);
        assert!(matches!(
            report.status,
            SolveStatus::ConvergedResidual | SolveStatus::FiniteTermination
        ));
        assert_eq!(report.final_x.as_slice(), &[-1.0, 2.0]);
        assert_eq!(report.rate_bound, Some(0.0));
    }

    #[test]
    fn known_solution_stopping() {
        let s = system(DenseMatrix::diagonal(&[0.4, 0.4]).unwrap(), vec![1.0, -1.0]);
        let u = Vector::new(vec![-1.0, 5.0 / 7.0]).unwrap();
        let config = SolverConfig {
            tol_x: 1e-10,
            ..SolverConfig::default()
        };
        let report = solve(&s, &Vector::zeros(2), &config, Some(&u)).unwrap();
        assert_eq!(report.status, SolveStatus::ConvergedKnownSolution);
        assert!(report.iterations <= 3, "{}", report.iterations);
        assert!(!report.contraction_observed.is_empty());
        for &r in &report.contraction_observed {
            assert!(r <= report.rate_bound.unwrap() + 1e-10);
        }
    }

    #[test]
    fn finite_termination_reports_a_repeated_pattern() {
        // With M = 0.3·I the root x = (−1, 10/13) has a one-ulp nonzero
        // computed residual, so the tiny residual gate cannot preempt the
        // pattern-repetition exit.
        let s = system(DenseMatrix::diagonal(&[0.3, 0.3]).unwrap(), vec![1.0, -1.0]);
        let config = SolverConfig {
            tol_res: 1e-300,
            ..SolverConfig::default()
        };
        let report = solve(&s, &Vector::new(vec![3.0, 3.0]).unwrap(), &config, None).unwrap();
        assert_eq!(report.status, SolveStatus::FiniteTermination);
        let len = report.trace.len();
        assert_eq!(
            report.trace[len - 1].pattern,
            report.trace[len - 2].pattern
        );
        assert!(report.final_residual_norm <= 1e-10 * (1.0 + s.q().norm()));
    }

    #[test]
    fn iteration_cap_is_honored() {
        // ‖M‖ > 1 with sign structure that keeps the residual alive.
        let s = system(DenseMatrix::diagonal(&[3.0, 3.0]).unwrap(), vec![1.0, -1.0]);
        let config = SolverConfig {
            method: Method::FixedPoint,
            max_iter: 7,
            tol_res: 1e-300,
            ..SolverConfig::default()
        };
        let report = solve(&s, &Vector::zeros(2), &config, None).unwrap();
        assert_eq!(report.status, SolveStatus::MaxIterations);
        assert_eq!(report.iterations, 7);
        assert!(report.rate_bound.is_none());
    }

    #[test]
    fn verify_rate_accepts_newton_traces_and_rejects_fakes() {
        let s = system(DenseMatrix::diagonal(&[0.3, -0.3]).unwrap(), vec![0.7, -0.2]);
        let u = {
            let config = SolverConfig {
                tol_res: 1e-14,
                ..SolverConfig::default()
            };
            solve(&s, &Vector::zeros(2), &config, None).unwrap().final_x
        };
        let config = SolverConfig {
            tol_x: 1e-12,
            ..SolverConfig::default()
        };
        let report = solve(&s, &Vector::new(vec![2.0, 2.0]).unwrap(), &config, Some(&u)).unwrap();
        assert!(verify_rate(&report, &s, &u).unwrap());

        // A doctored trace that moves away from u must fail.
        let mut fake = report.clone();
        fake.trace[1].x = Vector::new(vec![50.0, 50.0]).unwrap();
        assert!(!verify_rate(&fake, &s, &u).unwrap());
    }

    #[test]
    fn verify_rate_requires_the_contraction_regime() {
        let s = system(DenseMatrix::diagonal(&[0.8, 0.8]).unwrap(), vec![1.0, 1.0]);
        let report = solve(&s, &Vector::zeros(2), &SolverConfig::default(), None).unwrap();
        let u = report.final_x.clone();
        assert!(matches!(
            verify_rate(&report, &s, &u),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn inverse_norm_bound_simple_cases() {
        let zero_m = system(DenseMatrix::zeros(2, 2), vec![0.5, 0.5]);
        assert!(inverse_norm_bound_check(&zero_m, &Vector::new(vec![1.0, -1.0]).unwrap()).unwrap());

        // S = diag(1.4, 0.6) at the all-positive pattern: ‖S⁻¹‖ = 1/0.6
        // meets the bound 1/(1 - 0.4) exactly.
        let s = system(DenseMatrix::diagonal(&[0.4, -0.4]).unwrap(), vec![0.1, 0.1]);
        assert!(inverse_norm_bound_check(&s, &Vector::new(vec![1.0, 1.0]).unwrap()).unwrap());
    }

    #[test]
    fn inverse_norm_bound_needs_small_m() {
        let s = system(DenseMatrix::diagonal(&[1.5, 0.0]).unwrap(), vec![0.1, 0.1]);
        assert!(matches!(
            inverse_norm_bound_check(&s, &Vector::zeros(2)),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn perturbation_bounds_hold_on_random_points() {
        let mut rng = crate::rng::Rng::new(40);
        let n = 5;
        for _ in 0..50 {
            let raw: Vec<f64> = (0..n * n).map(|_| rng.symmetric(0.3)).collect();
            let mut m = DenseMatrix::new(n, n, raw).unwrap();
            m.symmetrize();
            m = m.scaled(0.4 / m.max_abs().max(1.0));
            let q = Vector::new((0..n).map(|_| rng.symmetric(1.0)).collect()).unwrap();
            let s = SemiSmoothSystem::from_parts(m, q).unwrap();
            let x = Vector::new((0..n).map(|_| rng.symmetric(5.0)).collect()).unwrap();
            let y = Vector::new((0..n).map(|_| rng.symmetric(5.0)).collect()).unwrap();
            assert!(perturbation_bound_check(&s, &x, &y).unwrap());
        }
    }

    #[test]
    fn singular_step_carries_the_iteration_index() {
        // An eigenvalue of M this close to -1 passes the positive definite
        // check on M + I but leaves the all-positive Newton matrix
        // diag(1e-14, 1) below the LU pivot threshold.
        let m = DenseMatrix::diagonal(&[-1.0 + 1e-14, 0.0]).unwrap();
        let s = SemiSmoothSystem::from_parts(m, Vector::new(vec![-1.0, -1.0]).unwrap()).unwrap();
        let config = SolverConfig {
            tol_res: 1e-300,
            ..SolverConfig::default()
        };
        let err = solve(&s, &Vector::new(vec![1.0, 1.0]).unwrap(), &config, None).unwrap_err();
        assert!(matches!(err, Error::SingularStep { iteration: 0, .. }), "{err}");
    }
}
