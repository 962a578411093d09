//! One module per `nlsim` subcommand. Each takes a parsed [`Config`],
//! writes its artifacts under an output directory, and returns its
//! results so library callers can assert on them without re-reading
//! the files.
//!
//! [`Config`]: crate::config::Config

pub mod averaging;
pub mod gauge;
pub mod norms;
pub mod report;
pub mod simulate;
pub mod sweep;

use crate::error::{HarnessError, Result};

/// Worker pool for embarrassingly parallel sweep points. Zero workers
/// means the machine default. Every task is internally sequential, so
/// scheduling cannot change any computed value.
pub(crate) fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if workers > 0 {
        builder = builder.num_threads(workers);
    }
    builder
        .build()
        .map_err(|e| HarnessError::Config(format!("workers: {e}")))
}
