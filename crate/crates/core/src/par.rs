//! Deterministic data-parallel helpers.
//!
//! Reductions are split into fixed-size chunks and the partial sums combined
//! in order, so results do not depend on the rayon thread count.

use rayon::prelude::*;

const CHUNK: usize = 16 * 1024;

/// `sum_i f(i)` for `i in 0..n`.
pub(crate) fn sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    if n <= CHUNK {
        return (0..n).map(&f).sum();
    }
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n);
            (start..end).map(&f).sum::<f64>()
        })
        .collect();
    partial.iter().sum()
}

/// Same as [`sum`] but for a pair of accumulators.
pub(crate) fn sum2<F>(n: usize, f: F) -> (f64, f64)
where
    F: Fn(usize) -> (f64, f64) + Sync,
{
    let add = |acc: (f64, f64), v: (f64, f64)| (acc.0 + v.0, acc.1 + v.1);
    if n <= CHUNK {
        return (0..n).map(&f).fold((0.0, 0.0), add);
    }
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n);
            (start..end).map(&f).fold((0.0, 0.0), add)
        })
        .collect();
    partial.into_iter().fold((0.0, 0.0), add)
}

/// `(0..n).map(f).collect()`, in parallel for large `n`.
pub(crate) fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if n <= CHUNK {
        (0..n).map(f).collect()
    } else {
        (0..n).into_par_iter().with_min_len(1024).map(f).collect()
    }
}
