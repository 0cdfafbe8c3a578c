//! Row-tiled data parallelism with output independent of the worker count.
//!
//! Every per-pixel kernel writes into a disjoint tile of the output, so the
//! result is byte-identical for any thread pool size.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rows per tile handed to one worker.
pub const TILE_ROWS: usize = 16;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "DEBRIS_THREADS";

/// Thread cap from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `f` inside a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Evaluates `kernel` at every flat pixel index of a `width`-wide grid with
/// `len` pixels. `None` marks the pixel invalid (its value is left at 0).
pub fn map_pixels<F>(len: usize, width: usize, kernel: F) -> (Vec<f64>, Vec<bool>)
where
    F: Fn(usize) -> Option<f64> + Sync,
{
    let mut values = vec![0.0; len];
    let mut valid = vec![false; len];
    let tile = (TILE_ROWS * width).max(1);
    values
        .par_chunks_mut(tile)
        .zip(valid.par_chunks_mut(tile))
        .enumerate()
        .for_each(|(t, (vals, oks))| {
            let base = t * tile;
            for (j, (v, ok)) in vals.iter_mut().zip(oks.iter_mut()).enumerate() {
                if let Some(x) = kernel(base + j) {
                    *v = x;
                    *ok = true;
                }
            }
        });
    (values, valid)
}

/// Tiled map producing arbitrary `Copy` labels.
pub fn map_labels<T, F>(len: usize, width: usize, kernel: F) -> Vec<T>
where
    T: Copy + Default + Send,
    F: Fn(usize) -> T + Sync,
{
    let mut out = vec![T::default(); len];
    let tile = (TILE_ROWS * width).max(1);
    out.par_chunks_mut(tile).enumerate().for_each(|(t, chunk)| {
        let base = t * tile;
        for (j, o) in chunk.iter_mut().enumerate() {
            *o = kernel(base + j);
        }
    });
    out
}
