//! Library side of the `boxlab` command: check evaluators, the suite runner
//! and the JSON run report.

pub mod commands;
pub mod edge;
pub mod error;
pub mod report;
pub mod suite;

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "BOXLAB_THREADS";

/// Sizes the global rayon pool from `BOXLAB_THREADS` when it is set.
pub fn configure_threads(value: Option<String>) -> Result<(), error::CliError> {
    let Some(value) = value else { return Ok(()) };
    let threads: usize =
        value.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
            error::CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got {value:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| error::CliError::Usage(e.to_string()))
}
