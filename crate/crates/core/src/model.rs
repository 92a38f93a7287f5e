//! Problem data and the nonsmooth reformulation.
//!
//! A problem asks for the minimizer of `½ yᵀQ y + bᵀy + c` over the
//! simplicial cone `{A v : v ≥ 0}` spanned by the columns of a nonsingular
//! `A`. Substituting `y = A x⁺` turns optimality into one piecewise-linear
//! equation in `x`,
//!
//! `F(x) = (AᵀQA - I) x⁺ + x + Aᵀb = 0`,
//!
//! covered here by [`SemiSmoothSystem`] with `M = AᵀQA - I` and `q = Aᵀb`.
//! If `u` solves `F(u) = 0` then `A u⁺` is the unique minimizer.

use crate::error::{Error, Result};
use crate::linalg::{
    spectral_norm_symmetric, CholeskyFactorization, DenseMatrix, LuFactorization, SignPattern,
    Vector, DEFAULT_SPECTRAL_TOLERANCE,
};

/// Convex quadratic program over a simplicial cone.
///
/// Invariants enforced at construction: `Q` symmetric positive definite,
/// `A` nonsingular, all shapes consistent, all entries finite.
#[derive(Clone, Debug)]
pub struct QpProblem {
    q: DenseMatrix,
    b: Vector,
    c: f64,
    a: DenseMatrix,
    /// LU factors of `A`, reused for feasibility checks and generator work.
    a_lu: LuFactorization,
}

impl QpProblem {
    pub fn new(q: DenseMatrix, b: Vector, c: f64, a: DenseMatrix) -> Result<Self> {
        let n = b.len();
        if !q.is_square() || q.rows() != n {
            return Err(Error::InvalidProblem(format!(
                "Q must be {n}x{n} to match b, got {}x{}",
                q.rows(),
                q.cols()
            )));
        }
        if !a.is_square() || a.rows() != n {
            return Err(Error::InvalidProblem(format!(
                "A must be {n}x{n} to match b, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if !c.is_finite() {
            return Err(Error::NonFinite("constant term c".into()));
        }
        CholeskyFactorization::factor(&q).map_err(|e| match e {
            Error::NotSymmetric { .. } => Error::InvalidProblem("Q not symmetric".into()),
            Error::NotPositiveDefinite { .. } => {
                Error::InvalidProblem("Q not positive definite".into())
            }
            other => other,
        })?;
        let a_lu = LuFactorization::factor(&a).map_err(|e| match e {
            Error::SingularMatrix { .. } => Error::InvalidProblem("A singular".into()),
            other => other,
        })?;
        Ok(QpProblem { q, b, c, a, a_lu })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn hessian(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn linear_term(&self) -> &Vector {
        &self.b
    }

    pub fn constant_term(&self) -> f64 {
        self.c
    }

    /// The cone matrix `A`; the feasible set is `{A v : v ≥ 0}`.
    pub fn cone_matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub(crate) fn cone_lu(&self) -> &LuFactorization {
        &self.a_lu
    }

    /// Objective value `½ yᵀQ y + bᵀy + c`.
    pub fn objective(&self, y: &Vector) -> Result<f64> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "objective input has length {}, problem dimension is {}",
                y.len(),
                self.dim()
            )));
        }
        Ok(0.5 * y.dot(&self.q.matvec(y)) + self.b.dot(y) + self.c)
    }

    /// Gradient `Q y + b`.
    pub fn gradient(&self, y: &Vector) -> Vector {
        self.q.matvec(y).add(&self.b)
    }
}

/// The projection of `z` onto the cone of `a`: minimize `½‖y - z‖²` over
/// the cone, i.e. `Q = I`, `b = -z`, `c = ½‖z‖²`. The optimal value is half
/// the squared distance from `z` to the cone, and the orthant reduction of
/// this problem carries Hessian `AᵀA` and linear term `-Aᵀz`.
pub fn projection_problem(a: DenseMatrix, z: &Vector) -> Result<QpProblem> {
    if !a.is_square() || a.rows() != z.len() {
        return Err(Error::InvalidProblem(format!(
            "projection needs square A matching z, got {}x{} vs length {}",
            a.rows(),
            a.cols(),
            z.len()
        )));
    }
    let c = 0.5 * z.dot(z);
    QpProblem::new(DenseMatrix::identity(z.len()), z.scaled(-1.0), c, a)
}

/// Data of the nonsmooth equation `F(x) = M x⁺ + x + q = 0`.
///
/// `M = AᵀQA - I` is symmetric with eigenvalues above `-1`; `norm_m` caches
/// its spectral norm, the quantity every convergence statement is phrased in.
#[derive(Clone, Debug)]
pub struct SemiSmoothSystem {
    m: DenseMatrix,
    q: Vector,
    norm_m: f64,
    source: QpProblem,
}

/// Builds the semi-smooth system of a problem.
///
/// `M` is symmetrized after forming `AᵀQA - I`; the discarded asymmetry is
/// rounding noise from the two matrix products.
pub fn build_system(p: &QpProblem) -> Result<SemiSmoothSystem> {
    let t = p.hessian().matmul(p.cone_matrix());
    let mut m = p.cone_matrix().transpose_matmul(&t);
    m.add_diagonal(-1.0);
    m.symmetrize();
    let q = p.cone_matrix().matvec_transpose(p.linear_term());
    let norm_m = spectral_norm_symmetric(&m, DEFAULT_SPECTRAL_TOLERANCE)?;
    Ok(SemiSmoothSystem {
        m,
        q,
        norm_m,
        source: p.clone(),
    })
}

impl SemiSmoothSystem {
    /// Builds a system directly from `(M, q)` with `M` symmetric and
    /// `M + I` positive definite, the exact range reachable from problems:
    /// such a pair is realized by the orthant problem `Q = M + I`, `A = I`,
    /// `b = q`, which becomes the synthesized source.
    pub fn from_parts(m: DenseMatrix, q: Vector) -> Result<Self> {
        if !m.is_square() || m.rows() != q.len() {
            return Err(Error::DimensionMismatch(format!(
                "M must be square matching q, got {}x{} vs length {}",
                m.rows(),
                m.cols(),
                q.len()
            )));
        }
        let n = q.len();
        let mut hessian = m.clone();
        hessian.add_diagonal(1.0);
        let source = QpProblem::new(hessian, q.clone(), 0.0, DenseMatrix::identity(n))?;
        let norm_m = spectral_norm_symmetric(&m, DEFAULT_SPECTRAL_TOLERANCE)?;
        Ok(SemiSmoothSystem {
            m,
            q,
            norm_m,
            source,
        })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn m(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn q(&self) -> &Vector {
        &self.q
    }

    /// Cached spectral norm of `M`. Below `1/2` the Newton iteration
    /// contracts with rate `norm_m / (1 - norm_m)`; below `1` the
    /// fixed-point map contracts and the solution is unique.
    pub fn norm_m(&self) -> f64 {
        self.norm_m
    }

    pub fn source(&self) -> &QpProblem {
        &self.source
    }

    /// Residual `F(x) = M x⁺ + x + q`.
    pub fn residual(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "residual input has length {}, system dimension is {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(self.m.matvec(&x.plus_part()).add(x).add(&self.q))
    }

    pub fn residual_norm(&self, x: &Vector) -> Result<f64> {
        Ok(self.residual(x)?.norm())
    }

    /// Newton matrix `S = M · diag(pattern) + I` for a sign pattern.
    /// Nonsingular for every pattern whenever `M + I` is positive definite.
    pub fn jacobian(&self, pattern: &SignPattern) -> Result<DenseMatrix> {
        if pattern.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "pattern has length {}, system dimension is {}",
                pattern.len(),
                self.dim()
            )));
        }
        let mut s = self.m.mul_diag_right(pattern);
        s.add_diagonal(1.0);
        Ok(s)
    }

    /// Maps a root of `F` to the minimizer of the source problem.
    pub fn recover_qp_solution(&self, u: &Vector) -> Result<Vector> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "solution input has length {}, system dimension is {}",
                u.len(),
                self.dim()
            )));
        }
        Ok(self.source.cone_matrix().matvec(&u.plus_part()))
    }
}

/// Optimality certificate for a candidate minimizer `y`.
///
/// A point is optimal iff it is primal feasible (`A⁻¹y ≥ 0`), its gradient
/// lies in the dual cone (`Aᵀ(Qy + b) ≥ 0`) and the two are complementary
/// (`⟨Qy + b, y⟩ = 0`).
#[derive(Clone, Debug)]
pub struct KktCertificate {
    /// `min_i (A⁻¹ y)_i`; nonnegative means feasible.
    pub primal_feasibility: f64,
    /// `min_i (Aᵀ(Qy + b))_i`; nonnegative means the gradient is dual-feasible.
    pub dual_feasibility: f64,
    /// `|⟨Qy + b, y⟩|`.
    pub complementarity: f64,
    pub passed: bool,
}

/// Evaluates the certificate at tolerance `tol`: feasibilities may dip to
/// `-tol` additively, complementarity is compared against
/// `tol · (1 + ‖y‖·‖∇‖)` so the check stays meaningful at large data scales.
pub fn check_kkt(p: &QpProblem, y: &Vector, tol: f64) -> Result<KktCertificate> {
    if y.len() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "candidate has length {}, problem dimension is {}",
            y.len(),
            p.dim()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::PreconditionViolated(
            "KKT tolerance must be positive".into(),
        ));
    }
    let gradient = p.gradient(y);
    let coefficients = p.cone_lu().solve(y)?;
    let primal_feasibility = coefficients.min_entry();
    let dual_feasibility = p.cone_matrix().matvec_transpose(&gradient).min_entry();
    let complementarity = gradient.dot(y).abs();
    let passed = primal_feasibility >= -tol
        && dual_feasibility >= -tol
        && complementarity <= tol * (1.0 + y.norm() * gradient.norm());
    Ok(KktCertificate {
        primal_feasibility,
        dual_feasibility,
        complementarity,
        passed,
    })
}

/// Residual of the complementarity system in orthant form.
///
/// With `Q̃ = AᵀQA` and `b̃ = Aᵀb`, a pair `(x, y)` solves the problem's
/// linear complementarity formulation iff `y = Q̃x + b̃`, `x ≥ 0`, `y ≥ 0`
/// and `⟨x, y⟩ = 0`; the returned value is the largest violation among
/// those four conditions.
pub fn lcp_residual(p: &QpProblem, x: &Vector, y: &Vector) -> Result<f64> {
    let n = p.dim();
    if x.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "LCP pair has lengths {} and {}, problem dimension is {n}",
            x.len(),
            y.len()
        )));
    }
    // Q̃x and b̃ through matvec chains; no matrix products.
    let ax = p.cone_matrix().matvec(x);
    let qax = p.hessian().matvec(&ax);
    let qtilde_x = p.cone_matrix().matvec_transpose(&qax);
    let btilde = p.cone_matrix().matvec_transpose(p.linear_term());
    let affine = y.sub(&qtilde_x).sub(&btilde).norm_inf();
    let x_neg = x.minus_part().norm_inf();
    let y_neg = y.minus_part().norm_inf();
    let comp = x.dot(y).abs();
    Ok(affine.max(x_neg).max(y_neg).max(comp))
}
