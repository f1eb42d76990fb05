use rayon::prelude::*;

use crate::error::{Error, Result};

/// Evaluates `f(0), ..., f(count - 1)` on a pool of `threads` workers (the
/// global pool when `None`) and returns the results in index order.
pub fn map_indexed<T, F>(count: u64, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let run = || (0..count).into_par_iter().map(&f).collect::<Vec<T>>();
    match threads {
        None => Ok(run()),
        Some(0) => Err(Error::InvalidArgument("thread count must be >= 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(run))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_for_any_thread_count() {
        let expected: Vec<u64> = (0..100).map(|i| i * i).collect();
        for t in [None, Some(1), Some(3), Some(8)] {
            assert_eq!(map_indexed(100, t, |i| i * i).unwrap(), expected);
        }
        assert!(map_indexed(3, Some(0), |i| i).is_err());
    }
}
