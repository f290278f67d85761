//! Per-state sweeps, data-parallel when the `parallel` feature is enabled.
//!
//! Results are collected in state order, and each entry is computed by the
//! same sequential arithmetic either way, so both paths are bit-identical.

/// Sweeps below this many states stay on the calling thread.
pub const PARALLEL_MIN_STATES: usize = 64;

#[cfg(feature = "parallel")]
pub fn map_states<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    if n < PARALLEL_MIN_STATES || rayon::current_num_threads() <= 1 {
        (0..n).map(f).collect()
    } else {
        (0..n).into_par_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_states<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Maps `f` over `items`, in parallel when available; output keeps input order.
#[cfg(feature = "parallel")]
pub fn map_items<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_items<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    items.iter().map(f).collect()
}
