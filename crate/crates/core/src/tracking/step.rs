//! One tracking iteration and the three compaction strategies.
//!
//! Each input item's reachable targets form a contiguous rank range
//! `[lo, hi)` in the target type's index. Inputs are ascending by position,
//! so both bounds are non-decreasing across items. A target rank is emitted
//! once, by the first item whose range covers it, with the chain time folded
//! over every later item that also covers it. That dedup is local to each
//! item and leaves the output ascending by position without a sort.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rayon::prelude::*;

use super::{CompactionStrategy, Direction, TrackedItem, Tracker};
use crate::episode::IntervalConstraint;
use crate::scan::{compact_flags, count_scan_write};
use crate::stream::EventType;

struct Step<'s> {
    items: &'s [TrackedItem],
    /// `[lo, hi)` per item, as ranks into the target type's index.
    windows: Vec<(usize, usize)>,
    targets: &'s [usize],
    direction: Direction,
}

impl Step<'_> {
    #[inline]
    fn owned(&self, i: usize) -> (usize, usize) {
        let (lo, hi) = self.windows[i];
        let prev_hi = if i == 0 { 0 } else { self.windows[i - 1].1 };
        (lo.max(prev_hi), hi)
    }

    #[inline]
    fn owned_len(&self, i: usize) -> usize {
        let (start, end) = self.owned(i);
        end.saturating_sub(start)
    }

    #[inline]
    fn fold(&self, a: u64, b: u64) -> u64 {
        match self.direction {
            Direction::Forward => a.max(b),
            Direction::Backward => a.min(b),
        }
    }

    /// Emits item `i`'s owned targets in rank order.
    fn emit(&self, i: usize, mut sink: impl FnMut(TrackedItem)) {
        let (start, end) = self.owned(i);
        let mut chain = self.items[i].chain_time;
        let mut next = i + 1;
        for rank in start..end {
            while next < self.items.len() && self.windows[next].0 <= rank {
                chain = self.fold(chain, self.items[next].chain_time);
                next += 1;
            }
            sink(TrackedItem { event_index: self.targets[rank], chain_time: chain });
        }
    }
}

/// Rank range of `to_times` reachable from an event at `time`.
#[inline]
fn window(time: u64, to_times: &[u64], c: IntervalConstraint, direction: Direction) -> (usize, usize) {
    match direction {
        Direction::Forward => {
            let lower = time + c.low();
            let upper = time + c.high();
            let lo = to_times.partition_point(|&t| t <= lower);
            let mut hi = lo;
            while hi < to_times.len() && to_times[hi] <= upper {
                hi += 1;
            }
            (lo, hi)
        }
        Direction::Backward => {
            let lo = to_times.partition_point(|&t| t < time.saturating_sub(c.high()));
            let Some(upper) = time.checked_sub(c.low()) else {
                return (lo, lo);
            };
            let mut hi = lo;
            while hi < to_times.len() && to_times[hi] < upper {
                hi += 1;
            }
            (lo, hi)
        }
    }
}

/// Runs inside the tracker's worker pool.
pub(super) fn run(t: &Tracker<'_>, items: &[TrackedItem], to: EventType, c: IntervalConstraint) -> Vec<TrackedItem> {
    if items.is_empty() {
        return Vec::new();
    }
    let to_times = t.index.times(to);
    let min_len = items.len().div_ceil(t.workers.threads() * 4).max(1);
    let windows: Vec<(usize, usize)> = items
        .par_iter()
        .with_min_len(min_len)
        .map(|it| window(t.stream.time(it.event_index), to_times, c, t.direction))
        .collect();
    debug_assert!(windows.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));

    let step = Step { items, windows, targets: t.index.positions(to), direction: t.direction };
    match t.strategy {
        CompactionStrategy::CountScanWrite => count_scan_write_step(t, &step),
        CompactionStrategy::FlagCompact => flag_compact_step(t, &step),
        CompactionStrategy::ConcurrentAppend => concurrent_append_step(&step),
    }
}

fn count_scan_write_step(t: &Tracker<'_>, step: &Step<'_>) -> Vec<TrackedItem> {
    count_scan_write(
        step.items.len(),
        |i| step.owned_len(i),
        |i, slots: &mut [TrackedItem]| {
            let mut k = 0;
            step.emit(i, |item| {
                slots[k] = item;
                k += 1;
            });
        },
        t.workers,
    )
    .expect("tracked item count fits in u64")
}

fn flag_compact_step(t: &Tracker<'_>, step: &Step<'_>) -> Vec<TrackedItem> {
    let n = step.items.len();
    let k_max = (0..n).map(|i| step.owned_len(i)).max().unwrap_or(0);
    if k_max == 0 {
        return Vec::new();
    }
    let batch = (t.slab_limit / k_max).max(1);
    let mut out = Vec::new();
    for first in (0..n).step_by(batch) {
        let last = (first + batch).min(n);
        let slots = (last - first) * k_max;
        let mut slab = vec![TrackedItem::default(); slots];
        let mut flags = vec![false; slots];
        slab.par_chunks_mut(k_max)
            .zip(flags.par_chunks_mut(k_max))
            .enumerate()
            .for_each(|(offset, (cells, marks))| {
                let mut k = 0;
                step.emit(first + offset, |item| {
                    cells[k] = item;
                    marks[k] = true;
                    k += 1;
                });
            });
        out.extend(compact_flags(&slab, &flags, t.workers).expect("slab and flags have equal length"));
    }
    out
}

fn concurrent_append_step(step: &Step<'_>) -> Vec<TrackedItem> {
    let n = step.items.len();
    let total: usize = (0..n).map(|i| step.owned_len(i)).sum();
    let slots: Vec<(AtomicUsize, AtomicU64)> = (0..total).map(|_| (AtomicUsize::new(0), AtomicU64::new(0))).collect();
    let next_free = AtomicUsize::new(0);

    (0..n).into_par_iter().for_each_init(Vec::new, |local, i| {
        local.clear();
        step.emit(i, |item| local.push(item));
        if local.is_empty() {
            return;
        }
        let offset = next_free.fetch_add(local.len(), Ordering::AcqRel);
        for (slot, item) in slots[offset..offset + local.len()].iter().zip(local.iter()) {
            slot.0.store(item.event_index, Ordering::Relaxed);
            slot.1.store(item.chain_time, Ordering::Relaxed);
        }
    });
    debug_assert_eq!(next_free.load(Ordering::Acquire), total);

    let mut out: Vec<TrackedItem> = slots
        .into_iter()
        .map(|(index, chain)| TrackedItem { event_index: index.into_inner(), chain_time: chain.into_inner() })
        .collect();
    out.par_sort_unstable_by_key(|it| it.event_index);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_window_is_half_open() {
        let c = IntervalConstraint::new(5, 10).unwrap();
        let times = [4, 5, 6, 10, 11, 15, 16];
        // (0+5, 0+10] -> 6, 10
        assert_eq!(window(0, &times, c, Direction::Forward), (2, 4));
        // (6+5, 6+10] -> 15, 16
        assert_eq!(window(6, &times, c, Direction::Forward), (5, 7));
    }

    #[test]
    fn backward_window_is_half_open() {
        let c = IntervalConstraint::new(5, 10).unwrap();
        let times = [0, 1, 5, 6, 10];
        // [16-10, 16-5) -> 6, 10
        assert_eq!(window(16, &times, c, Direction::Backward), (3, 5));
        // [11-10, 11-5) -> 1, 5
        assert_eq!(window(11, &times, c, Direction::Backward), (1, 3));
        assert_eq!(window(3, &times, c, Direction::Backward), (0, 0));
    }
}
