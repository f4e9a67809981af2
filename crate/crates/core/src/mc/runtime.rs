//! Worker-count resolution and scoped thread pools.
//!
//! The precedence is explicit request, then the `HQV_WORKERS` environment
//! variable, then the library default.  Because seeds are derived per
//! replication, the worker count can never change results, only wall time.

use rayon::ThreadPoolBuilder;

use crate::error::{Error, Result};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "HQV_WORKERS";

/// Resolves the worker count: `explicit` wins, then `HQV_WORKERS`, then
/// `None` meaning the global default pool.
pub fn resolve_workers(explicit: Option<usize>) -> Result<Option<usize>> {
    if explicit.is_some() {
        return Ok(explicit);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(raw) => {
            let parsed: usize = raw.trim().parse().map_err(|_| {
                Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}"))
            })?;
            if parsed == 0 {
                return Err(Error::Config(format!("{WORKERS_ENV} must be at least 1")));
            }
            Ok(Some(parsed))
        }
        Err(_) => Ok(None),
    }
}

/// Runs `f` under the resolved worker count: inside a scoped pool when a
/// count is requested, in the ambient pool otherwise.
pub fn with_workers<R, F>(explicit: Option<usize>, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match resolve_workers(explicit)? {
        Some(count) => {
            let pool = ThreadPoolBuilder::new()
                .num_threads(count)
                .build()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rayon::prelude::*;

    #[test]
    fn env_and_flag_precedence_in_one_sequence() {
        // All environment manipulation stays inside this single test so no
        // parallel test observes a half-set variable.
        std::env::remove_var(WORKERS_ENV);
        assert_eq!(resolve_workers(None).unwrap(), None);
        assert_eq!(resolve_workers(Some(3)).unwrap(), Some(3));

        std::env::set_var(WORKERS_ENV, "2");
        assert_eq!(resolve_workers(None).unwrap(), Some(2));
        assert_eq!(resolve_workers(Some(5)).unwrap(), Some(5));

        std::env::set_var(WORKERS_ENV, "zero");
        assert!(resolve_workers(None).is_err());
        std::env::set_var(WORKERS_ENV, "0");
        assert!(resolve_workers(None).is_err());
        std::env::remove_var(WORKERS_ENV);
    }

    #[test]
    fn scoped_pool_runs_parallel_work() {
        let sum = with_workers(Some(2), || (0..100u64).into_par_iter().sum::<u64>()).unwrap();
        assert_eq!(sum, 4950);
    }
}
