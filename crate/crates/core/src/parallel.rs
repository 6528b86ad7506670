//! Worker-count control.
//!
//! Library operations parallelize with rayon on whatever pool they are called
//! from. The CLI builds a pool sized by `CEVT_THREADS` (0 or unset = one
//! worker per core) and runs each command inside it.

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "CEVT_THREADS";

/// Worker count requested through `CEVT_THREADS`; 0 means automatic.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::invalid(format!(
                "{THREADS_ENV} must be a non-negative integer, got `{v}`"
            ))
        }),
        Err(_) => Ok(0),
    }
}

pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))
}
