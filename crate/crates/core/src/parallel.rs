//! Thread-count control. `RANKONE_THREADS` caps the worker threads used by
//! per-root corrections and Monte Carlo trials.

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "RANKONE_THREADS";

/// Parsed `RANKONE_THREADS`, or `None` when unset or empty.
pub fn configured_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) if s.trim().is_empty() => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `f` on a pool of `threads` workers (rayon's default when `None`).
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs `f` with the thread count taken from the environment.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    with_threads(configured_threads()?, f)
}
