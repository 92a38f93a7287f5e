//! Shared error type for the whole crate.

/// Errors reported by factorizations, solvers, parsers and generators.
///
/// Numeric routines never panic on bad data; every failure mode that a caller
/// can provoke (or that floating point can produce) maps to a variant here.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Operand shapes are incompatible for the requested operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A pivot fell below the singularity threshold during LU elimination.
    #[error("matrix is numerically singular (pivot {pivot:.3e} at column {column})")]
    SingularMatrix { pivot: f64, column: usize },

    /// A Cholesky pivot was not strictly positive.
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { pivot: f64, index: usize },

    /// Symmetry check failed beyond the stated relative tolerance.
    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e}, allowed {allowed:.3e})")]
    NotSymmetric { asymmetry: f64, allowed: f64 },

    /// An iterative procedure hit its iteration cap before meeting tolerance.
    #[error("no convergence within {iterations} iterations of {procedure}")]
    NoConvergence {
        procedure: &'static str,
        iterations: usize,
    },

    /// A documented precondition of the called operation does not hold.
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// The Newton iteration could not factor its linear system.
    #[error("singular Newton system at iteration {iteration} (pivot {pivot:.3e})")]
    SingularStep { iteration: usize, pivot: f64 },

    /// Problem file is syntactically malformed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Problem file parsed but violates a model invariant.
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// Full sign-pattern enumeration was requested above the supported size.
    #[error("dimension {n} exceeds the enumeration cap of {cap}")]
    DimensionTooLarge { n: usize, cap: usize },

    /// The enumeration oracle found several solutions where theory promises one.
    #[error("found {count} distinct sign-consistent solutions where a unique one is guaranteed")]
    UniquenessViolated { count: usize },

    /// Instance construction kept producing degenerate draws.
    #[error("instance generation failed: {0}")]
    GenerationFailed(String),

    /// A value that must be finite was NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
