//! Data-parallel kernels with sequential fallbacks.
//!
//! With the `parallel` feature (default) the plain entry points fan out via
//! rayon; the `*_seq` siblings always run on the calling thread. Reductions
//! use a fixed chunk size and sum the per-chunk partials in order, so both
//! paths produce bit-identical results regardless of thread count.

use crate::C64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk size for deterministic reductions and parallel splits.
const CHUNK: usize = 4096;

/// Apply `f(index, value)` to every element in place.
pub fn map_indexed<F>(values: &mut [C64], f: F)
where
    F: Fn(usize, C64) -> C64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        values.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let base = c * CHUNK;
            for (i, v) in chunk.iter_mut().enumerate() {
                *v = f(base + i, *v);
            }
        });
    }
    #[cfg(not(feature = "parallel"))]
    map_indexed_seq(values, f);
}

/// Sequential variant of [`map_indexed`]; bit-identical output.
pub fn map_indexed_seq<F>(values: &mut [C64], f: F)
where
    F: Fn(usize, C64) -> C64,
{
    for (i, v) in values.iter_mut().enumerate() {
        *v = f(i, *v);
    }
}

/// Sum `f(index, value)` over all elements, chunk-deterministically.
pub fn sum_indexed<F>(values: &[C64], f: F) -> f64
where
    F: Fn(usize, C64) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        let partials: Vec<f64> = values
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, chunk)| chunk_sum(c * CHUNK, chunk, &f))
            .collect();
        return partials.iter().sum();
    }
    #[cfg(not(feature = "parallel"))]
    sum_indexed_seq(values, f)
}

/// Sequential variant of [`sum_indexed`]; bit-identical output.
pub fn sum_indexed_seq<F>(values: &[C64], f: F) -> f64
where
    F: Fn(usize, C64) -> f64,
{
    values
        .chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| chunk_sum(c * CHUNK, chunk, &f))
        .sum()
}

fn chunk_sum<F>(base: usize, chunk: &[C64], f: &F) -> f64
where
    F: Fn(usize, C64) -> f64,
{
    let mut acc = 0.0;
    for (i, &v) in chunk.iter().enumerate() {
        acc += f(base + i, v);
    }
    acc
}

/// True when every entry is finite in both components.
pub fn all_finite(values: &[C64]) -> bool {
    #[cfg(feature = "parallel")]
    {
        return values
            .par_chunks(CHUNK)
            .all(|chunk| chunk.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
    }
    #[cfg(not(feature = "parallel"))]
    values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

/// Run `job` for each line index in `0..lines`, giving each worker its own
/// scratch created by `init`. Used for the strided passes of the
/// multi-dimensional FFT; line jobs write disjoint slices, so the parallel
/// and sequential paths are bit-identical.
pub(crate) fn for_each_line<S, I, F>(lines: usize, init: I, job: F)
where
    S: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..lines).into_par_iter().for_each_init(&init, |s, l| job(s, l));
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut s = init();
        for l in 0..lines {
            job(&mut s, l);
        }
    }
}

pub(crate) fn for_each_line_seq<S, I, F>(lines: usize, init: I, job: F)
where
    I: Fn() -> S,
    F: Fn(&mut S, usize),
{
    let mut s = init();
    for l in 0..lines {
        job(&mut s, l);
    }
}
