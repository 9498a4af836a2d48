//! Deterministic data-parallel primitives: exclusive prefix scan, flag
//! compaction, and order-preserving parallel map/concatenate.
//!
//! Every primitive splits its input into contiguous blocks, one or more per
//! worker, and reassembles results in block order, so outputs are identical
//! for any worker count.

use std::ops::Range;
use std::sync::Arc;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ScanError {
    #[error("prefix sum overflowed the 64-bit accumulator")]
    Overflow,
    #[error("length mismatch: {values} values but {flags} flags")]
    LengthMismatch { values: usize, flags: usize },
}

/// Blocks handed to each worker; more than one evens out skewed blocks.
const BLOCKS_PER_WORKER: usize = 4;

/// A fixed-size worker pool, or the calling thread alone.
#[derive(Clone)]
pub struct Workers {
    pool: Option<Arc<ThreadPool>>,
    threads: usize,
}

impl std::fmt::Debug for Workers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Workers").field("threads", &self.threads).finish()
    }
}

impl Workers {
    /// Dedicated pool of `threads` workers (at least one).
    pub fn new(threads: usize) -> Self {
        let threads = threads.max(1);
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .thread_name(|i| format!("episodic-worker-{i}"))
            .build()
            .expect("failed to start worker pool");
        Self { pool: Some(Arc::new(pool)), threads }
    }

    /// Runs everything on the calling thread as a single block.
    pub fn inline() -> Self {
        Self { pool: None, threads: 1 }
    }

    /// One worker per logical core.
    pub fn available() -> Self {
        Self::new(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// Runs `f` inside the pool, so rayon calls made by `f` use these workers.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.pool {
            Some(pool) => pool.install(f),
            None => f(),
        }
    }

    /// Contiguous, non-empty block ranges covering `0..len`.
    pub fn blocks(&self, len: usize) -> Vec<Range<usize>> {
        if len == 0 {
            return Vec::new();
        }
        let target = if self.threads == 1 { 1 } else { self.threads * BLOCKS_PER_WORKER };
        let size = len.div_ceil(target.min(len));
        (0..len).step_by(size).map(|s| s..(s + size).min(len)).collect()
    }
}

/// Splits `buf` into consecutive mutable pieces of the given lengths.
fn split_lengths<T>(mut buf: &mut [T], lengths: impl IntoIterator<Item = usize>) -> Vec<&mut [T]> {
    let mut out = Vec::new();
    for len in lengths {
        let (head, tail) = std::mem::take(&mut buf).split_at_mut(len);
        out.push(head);
        buf = tail;
    }
    out
}

fn serial_exclusive(values: impl IntoIterator<Item = u64>) -> Result<(Vec<u64>, u64), ScanError> {
    let mut acc = 0u64;
    let mut out = Vec::new();
    for v in values {
        out.push(acc);
        acc = acc.checked_add(v).ok_or(ScanError::Overflow)?;
    }
    Ok((out, acc))
}

/// `out[0] = 0`, `out[k] = values[0] + ... + values[k-1]`.
///
/// Fails if the total overflows `u64`.
pub fn exclusive_scan(values: &[u64], workers: &Workers) -> Result<Vec<u64>, ScanError> {
    let blocks = workers.blocks(values.len());
    workers.install(|| {
        let sums: Vec<Option<u64>> = blocks
            .par_iter()
            .map(|r| values[r.clone()].iter().try_fold(0u64, |acc, &v| acc.checked_add(v)))
            .collect();
        let sums: Vec<u64> = sums.into_iter().collect::<Option<_>>().ok_or(ScanError::Overflow)?;
        let (offsets, _) = serial_exclusive(sums)?;

        let mut out = vec![0u64; values.len()];
        let pieces = split_lengths(&mut out, blocks.iter().map(|r| r.len()));
        pieces
            .into_par_iter()
            .zip(blocks.par_iter())
            .zip(offsets.par_iter())
            .for_each(|((piece, r), &offset)| {
                let mut acc = offset;
                for (slot, &v) in piece.iter_mut().zip(&values[r.clone()]) {
                    *slot = acc;
                    acc += v;
                }
            });
        Ok(out)
    })
}

/// Keeps `values[i]` where `flags[i]`, preserving relative order.
pub fn compact_flags<T>(values: &[T], flags: &[bool], workers: &Workers) -> Result<Vec<T>, ScanError>
where
    T: Copy + Default + Send + Sync,
{
    if values.len() != flags.len() {
        return Err(ScanError::LengthMismatch { values: values.len(), flags: flags.len() });
    }
    let blocks = workers.blocks(values.len());
    workers.install(|| {
        let counts: Vec<u64> = blocks
            .par_iter()
            .map(|r| flags[r.clone()].iter().filter(|&&f| f).count() as u64)
            .collect();
        let (_, total) = serial_exclusive(counts.iter().copied())?;

        let mut out = vec![T::default(); total as usize];
        let pieces = split_lengths(&mut out, counts.iter().map(|&c| c as usize));
        pieces.into_par_iter().zip(blocks.par_iter()).for_each(|(piece, r)| {
            let kept = values[r.clone()].iter().zip(&flags[r.clone()]).filter(|(_, &f)| f);
            for (slot, (v, _)) in piece.iter_mut().zip(kept) {
                *slot = *v;
            }
        });
        Ok(out)
    })
}

/// Concatenation of `per_item(inputs[0])`, `per_item(inputs[1])`, ... in input
/// order. Each block fills a private buffer; buffers are joined in block order.
///
/// Returns the first failure by input order.
pub fn parallel_map_collect<T, U, E, F>(inputs: &[T], per_item: F, workers: &Workers) -> Result<Vec<U>, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(&T, &mut Vec<U>) -> Result<(), E> + Sync,
{
    let blocks = workers.blocks(inputs.len());
    let parts: Vec<Result<Vec<U>, E>> = workers.install(|| {
        blocks
            .par_iter()
            .map(|r| {
                let mut local = Vec::new();
                for item in &inputs[r.clone()] {
                    per_item(item, &mut local)?;
                }
                Ok(local)
            })
            .collect()
    });

    let mut locals = Vec::with_capacity(parts.len());
    for part in parts {
        locals.push(part?);
    }
    let total = locals.iter().map(Vec::len).sum();
    let mut out = Vec::with_capacity(total);
    for local in locals {
        out.extend(local);
    }
    Ok(out)
}

/// Three-phase compaction over items `0..n`: `count(i)` outputs per item, an
/// exclusive scan for write offsets, then `write(i, slot)` fills exactly
/// `count(i)` slots. Output is in item order.
pub fn count_scan_write<U, C, W>(n: usize, count: C, write: W, workers: &Workers) -> Result<Vec<U>, ScanError>
where
    U: Default + Clone + Send,
    C: Fn(usize) -> usize + Sync,
    W: Fn(usize, &mut [U]) + Sync,
{
    let blocks = workers.blocks(n);
    let counts: Vec<u64> = workers.install(|| {
        blocks
            .par_iter()
            .flat_map_iter(|r| r.clone().map(|i| count(i) as u64))
            .collect()
    });
    let offsets = exclusive_scan(&counts, workers)?;
    let total = offsets.last().zip(counts.last()).map_or(0, |(o, c)| o + c) as usize;

    let mut out = vec![U::default(); total];
    let block_lengths = blocks.iter().map(|r| {
        let start = offsets[r.start] as usize;
        let end = if r.end < n { offsets[r.end] as usize } else { total };
        end - start
    });
    let pieces = split_lengths(&mut out, block_lengths.collect::<Vec<_>>());
    workers.install(|| {
        pieces.into_par_iter().zip(blocks.par_iter()).for_each(|(piece, r)| {
            let slots = split_lengths(piece, counts[r.clone()].iter().map(|&c| c as usize));
            for (i, slot) in r.clone().zip(slots) {
                write(i, slot);
            }
        });
    });
    Ok(out)
}
