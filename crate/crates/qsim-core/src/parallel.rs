//! Data-parallel execution helpers.
//!
//! With the default `parallel` feature the indexed helpers fan work out over
//! rayon; without it they run sequentially. Every caller derives per-item
//! state from the item index, so the two modes produce identical results.
//! The `*_seq` variants are always sequential and serve as the reference
//! path for tests and benchmarks.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Sequential reference implementation of [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Histogram `n_items` items into `n_cells` counters; `cell(k)` names the
/// cell for item `k`.
#[cfg(feature = "parallel")]
pub fn tally_indexed<F>(n_items: usize, n_cells: usize, cell: F) -> Vec<u64>
where
    F: Fn(usize) -> usize + Sync + Send,
{
    (0..n_items)
        .into_par_iter()
        .fold(
            || vec![0u64; n_cells],
            |mut acc, k| {
                acc[cell(k)] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; n_cells],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Histogram `n_items` items into `n_cells` counters; `cell(k)` names the
/// cell for item `k`.
#[cfg(not(feature = "parallel"))]
pub fn tally_indexed<F>(n_items: usize, n_cells: usize, cell: F) -> Vec<u64>
where
    F: Fn(usize) -> usize,
{
    tally_indexed_seq(n_items, n_cells, cell)
}

/// Sequential reference implementation of [`tally_indexed`].
pub fn tally_indexed_seq<F>(n_items: usize, n_cells: usize, cell: F) -> Vec<u64>
where
    F: Fn(usize) -> usize,
{
    let mut acc = vec![0u64; n_cells];
    for k in 0..n_items {
        acc[cell(k)] += 1;
    }
    acc
}
