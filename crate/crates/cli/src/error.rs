//! CLI-level error type: everything here maps to exit code 1.

use std::fmt;

/// An error that prevents a command from running at all (bad flags, bad
/// files, broken input data). Distinct from *outcomes* like non-convergence
/// or property failures, which commands report through their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flag combination or environment configuration.
    Usage(String),
    /// An error surfaced by the solver library.
    Core(sscqp::error::Error),
    /// Filesystem trouble outside the library's own IO paths.
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<sscqp::error::Error> for CliError {
    fn from(e: sscqp::error::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
