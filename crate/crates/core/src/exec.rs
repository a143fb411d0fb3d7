//! Bulk-map execution backend.
//!
//! With the default `parallel` feature the closure runs on the rayon thread
//! pool; without it the same indices are processed sequentially. Results are
//! collected in index order either way, so downstream reductions are
//! deterministic and the two backends produce bit-identical output.

#[cfg(feature = "parallel")]
pub(crate) fn try_map_indices<T, F>(n: usize, f: F) -> crate::Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> crate::Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn try_map_indices<T, F>(n: usize, f: F) -> crate::Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> crate::Result<T> + Sync + Send,
{
    (0..n).map(f).collect()
}
