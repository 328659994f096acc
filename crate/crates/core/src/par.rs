// SPDX-License-Identifier: Apache-2.0

//! Execution strategy for the data-parallel kernels.
//!
//! With the `parallel` feature enabled, [`Parallelism::Parallel`] maps work
//! items on the rayon pool. Without it, both variants run sequentially.
//! Every helper returns results in input order, and callers reduce them in
//! that order, so the output never depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Parallel,
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Parallel
        } else {
            Parallelism::Sequential
        }
    }
}

impl Parallelism {
    /// Whether work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

/// Maps `f` over `0..n`, returning results in index order.
pub(crate) fn map_range<R, F>(n: usize, par: Parallelism, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = par;
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, returning results in slice order.
pub(crate) fn map_slice<T, R, F>(items: &[T], par: Parallelism, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = par;
    items.iter().map(f).collect()
}

/// Sums per-chunk vectors computed over `0..n` in fixed-size chunks.
///
/// Chunk boundaries depend only on `n` and `chunk`, and partial sums are
/// added in chunk order, so floating point results are bitwise identical for
/// sequential and parallel execution.
pub(crate) fn chunked_vec_sum<F>(n: usize, width: usize, chunk: usize, par: Parallelism, f: F) -> Vec<f64>
where
    F: Fn(std::ops::Range<usize>, &mut [f64]) + Sync + Send,
{
    let chunk = chunk.max(1);
    let chunks = n.div_ceil(chunk);
    let partials = map_range(chunks, par, |c| {
        let mut acc = vec![0.0; width];
        let start = c * chunk;
        f(start..(start + chunk).min(n), &mut acc);
        acc
    });
    let mut total = vec![0.0; width];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_range_preserves_order() {
        for par in [Parallelism::Sequential, Parallelism::Parallel] {
            let out = map_range(100, par, |i| i * 2);
            assert_eq!(out, (0..100).map(|i| i * 2).collect::<Vec<_>>());
        }
    }

    #[test]
    fn chunked_sum_is_schedule_independent() {
        let f = |r: std::ops::Range<usize>, acc: &mut [f64]| {
            for i in r {
                acc[i % 3] += 1.0 / (i as f64 + 1.0);
            }
        };
        let a = chunked_vec_sum(1000, 3, 7, Parallelism::Sequential, f);
        let b = chunked_vec_sum(1000, 3, 7, Parallelism::Parallel, f);
        assert_eq!(a, b);
    }
}
