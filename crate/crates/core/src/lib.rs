//! Semi-smooth Newton solver for convex quadratic programs over
//! simplicial cones.
//!
//! A simplicial cone is the image of the nonnegative orthant under a
//! nonsingular matrix `A`. Minimizing `½yᵀQy + bᵀy + c` over such a cone is
//! equivalent to finding a root of the piecewise-linear map
//!
//! ```text
//! F(x) = (AᵀQA − I)·x⁺ + x + Aᵀb
//! ```
//!
//! where `x⁺` is the componentwise positive part: if `F(u) = 0` then
//! `y = A·u⁺` minimizes the program. This crate provides:
//!
//! * dense linear algebra kernels sized for dense desk-scale problems
//!   ([`linalg`]): LU and Cholesky factorizations, a one-sided Jacobi
//!   singular value decomposition, and power-iteration spectral norms;
//! * the model layer ([`model`]): validated problem data, the reformulated
//!   system, KKT certificates, and the complementarity-problem bridge;
//! * the solvers ([`solver`]): a semi-smooth Newton iteration with finite
//!   termination on sign-pattern repetition, and a fixed-point fallback,
//!   both with full iteration traces and convergence-rate checks;
//! * reference oracles ([`oracle`]): exhaustive sign-pattern enumeration
//!   and a projected-gradient method, for validating the Newton path on
//!   small instances;
//! * a seeded instance generator ([`generator`]) planting a known solution
//!   and a known operator norm `‖AᵀQA − I‖ = β`;
//! * a plain-text problem file format ([`io`]) with bit-exact round-trips.
//!
//! The Newton iteration solves `(M·diag(sgn(x⁺)) + I) x' = −q` at every
//! step; when `‖M‖ < ½` each step contracts the error at the fixed rate
//! `‖M‖/(1 − ‖M‖)`, and the solver checks that guarantee as it runs.
//!
//! ```
//! use sscqp::linalg::{DenseMatrix, Vector};
//! use sscqp::model::{build_system, QpProblem};
//! use sscqp::solver::{solve, SolverConfig};
//!
//! // Project z = (1, -2) onto the nonnegative orthant, phrased as a QP.
//! let q = DenseMatrix::identity(2);
//! let b = Vector::new(vec![-1.0, 2.0])?;
//! let problem = QpProblem::new(q, b, 0.0, DenseMatrix::identity(2))?;
//! let system = build_system(&problem)?;
//! let report = solve(&system, &Vector::zeros(2), &SolverConfig::default(), None)?;
//! assert!(report.status.converged());
//! let y = system.recover_qp_solution(&report.final_x)?;
//! assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
//! # Ok::<(), sscqp::error::Error>(())
//! ```

// `!(x > 0.0)` in validation guards is deliberate: unlike `x <= 0.0` it
// also rejects NaN. The dense kernels use index loops where the loop body
// reads offset rows/columns of a packed factor; iterator forms would hide
// the access pattern.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod generator;
pub mod io;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use generator::{generate, generate_batch, GeneratedInstance, InstanceSpec};
pub use io::{read_problem_file, write_generated, write_problem, ProblemFile};
pub use linalg::{DenseMatrix, SignPattern, Vector};
pub use model::{build_system, check_kkt, QpProblem, SemiSmoothSystem};
pub use oracle::{enumerate_solve, OracleResult};
pub use solver::{solve, Method, SolveReport, SolveStatus, SolverConfig};
