//! Worker-pool construction honoring the `SSCQP_THREADS` cap.

use crate::error::CliError;

/// Builds the rayon pool used by all parallel suites. `SSCQP_THREADS`, when
/// set, caps the worker count; otherwise rayon picks one worker per core.
/// Records are always merged in deterministic instance order regardless of
/// the worker count.
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    match std::env::var("SSCQP_THREADS") {
        Ok(raw) => {
            let workers: usize = raw.trim().parse().map_err(|_| {
                CliError::Usage(format!(
                    "SSCQP_THREADS must be a positive integer, got `{raw}`"
                ))
            })?;
            if workers == 0 {
                return Err(CliError::Usage(
                    "SSCQP_THREADS must be a positive integer, got `0`".into(),
                ));
            }
            builder = builder.num_threads(workers);
        }
        Err(std::env::VarError::NotPresent) => {}
        Err(std::env::VarError::NotUnicode(_)) => {
            return Err(CliError::Usage("SSCQP_THREADS is not valid unicode".into()));
        }
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot build worker pool: {e}")))
}
