//! Thread pools sized from `--threads`, then `HELIKON_THREADS`, then the core count.
//!
//! Work is mapped with indexed parallel iterators, so results come back in
//! input order regardless of the pool size.

use rayon::prelude::*;

use crate::CliError;

pub const THREADS_ENV: &str = "HELIKON_THREADS";

pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> Result<usize, CliError> {
    let n = match (flag, env) {
        (Some(n), _) => n,
        (None, Some(s)) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {s:?}")))?,
        (None, None) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    if n == 0 {
        return Err(CliError::Config("parallelism must be at least 1".into()));
    }
    Ok(n)
}

/// [`resolve_threads`] with the environment read from the process.
pub fn threads_from_env(flag: Option<usize>) -> Result<usize, CliError> {
    let env = std::env::var(THREADS_ENV).ok();
    resolve_threads(flag, env.as_deref())
}

/// `items.map(f)` on a dedicated pool of `threads` workers, in input order.
pub fn ordered_map<T, R, F>(threads: usize, items: &[T], f: F) -> Result<Vec<R>, CliError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        assert_eq!(resolve_threads(Some(3), Some("7")).unwrap(), 3);
        assert_eq!(resolve_threads(None, Some("7")).unwrap(), 7);
        assert!(resolve_threads(None, None).unwrap() >= 1);
        assert!(resolve_threads(Some(0), None).is_err());
        assert!(resolve_threads(None, Some("zero")).is_err());
        assert!(resolve_threads(None, Some("0")).is_err());
    }

    #[test]
    fn order_is_preserved() {
        let v: Vec<u64> = (0..1000).collect();
        let a = ordered_map(1, &v, |x| x * x).unwrap();
        let b = ordered_map(8, &v, |x| x * x).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[999], 999 * 999);
    }
}
