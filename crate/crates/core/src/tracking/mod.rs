//! Parallel local tracking.
//!
//! Counting is split in two: enumerate a representative set of occurrence
//! intervals in parallel, then pick the largest non-overlapped subset with
//! the greedy scheduler in [`greedy_schedule`].
//!
//! Enumeration seeds one [`TrackedItem`] per event of the first episode type
//! (forward) or the last one (backward) and runs `N - 1` tracking steps. Each
//! step maps every item to the events of the next type inside its constraint
//! window and compacts the results into one ordered list for the next step.
//! An item carries the timestamp of the far end of its chain: the start in
//! forward mode, the end in backward mode. When several chains reach the same
//! event only the latest start (forward) or earliest end (backward) is kept,
//! which never lowers the greedy count.

mod schedule;
mod step;

use std::fmt;
use std::str::FromStr;

pub use schedule::{greedy_schedule, is_sorted_by_end, UnsortedError};

use crate::episode::{Episode, IntervalConstraint, OccurrenceInterval};
use crate::index::TypeIndex;
use crate::scan::Workers;
use crate::stream::{EventStream, EventType};

/// An event reached by tracking plus the far-end timestamp of its chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TrackedItem {
    pub event_index: usize,
    pub chain_time: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::Forward, Direction::Backward];

    pub fn name(self) -> &'static str {
        match self {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fwd" | "forward" => Ok(Direction::Forward),
            "bwd" | "backward" => Ok(Direction::Backward),
            other => Err(format!("unknown direction {other:?} (expected fwd or bwd)")),
        }
    }
}

/// How per-item results are gathered into one list between steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CompactionStrategy {
    /// Count pass, exclusive scan for offsets, write pass. Order-preserving.
    #[default]
    CountScanWrite,
    /// Fixed-size slab per item, 0/1 flags, then flag compaction. Order-preserving.
    FlagCompact,
    /// Offsets reserved through a shared fetch-and-add counter; arrival order
    /// is arbitrary, so every step ends with a sort.
    ConcurrentAppend,
}

impl CompactionStrategy {
    pub const ALL: [CompactionStrategy; 3] =
        [CompactionStrategy::CountScanWrite, CompactionStrategy::FlagCompact, CompactionStrategy::ConcurrentAppend];

    pub fn name(self) -> &'static str {
        match self {
            CompactionStrategy::CountScanWrite => "csw",
            CompactionStrategy::FlagCompact => "flag",
            CompactionStrategy::ConcurrentAppend => "append",
        }
    }
}

impl fmt::Display for CompactionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CompactionStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csw" | "count-scan-write" => Ok(CompactionStrategy::CountScanWrite),
            "flag" | "flag-compact" => Ok(CompactionStrategy::FlagCompact),
            "append" | "concurrent-append" => Ok(CompactionStrategy::ConcurrentAppend),
            other => Err(format!("unknown strategy {other:?} (expected csw, flag or append)")),
        }
    }
}

/// Result of one tracking count with the bookkeeping the benchmarks report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrackingCount {
    pub count: u64,
    /// Size of the interval set handed to the scheduler.
    pub occurrences: usize,
    /// Whether that set arrived out of end order and had to be sorted.
    pub sort_fallback: bool,
}

/// Default cap on slab slots per flag-compaction batch.
pub const DEFAULT_SLAB_LIMIT: usize = 1 << 24;

/// Tracking configuration bound to one stream and its index.
#[derive(Debug, Clone)]
pub struct Tracker<'a> {
    stream: &'a EventStream,
    index: &'a TypeIndex,
    workers: &'a Workers,
    direction: Direction,
    strategy: CompactionStrategy,
    slab_limit: usize,
}

impl<'a> Tracker<'a> {
    pub fn new(stream: &'a EventStream, index: &'a TypeIndex, workers: &'a Workers) -> Self {
        Self {
            stream,
            index,
            workers,
            direction: Direction::default(),
            strategy: CompactionStrategy::default(),
            slab_limit: DEFAULT_SLAB_LIMIT,
        }
    }

    pub fn direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn strategy(mut self, strategy: CompactionStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    /// Caps the flag-compaction slab; larger steps run in batches.
    pub fn slab_limit(mut self, slots: usize) -> Self {
        self.slab_limit = slots.max(1);
        self
    }

    pub fn stream(&self) -> &'a EventStream {
        self.stream
    }

    /// One tracking iteration from `from` events to `to` events.
    ///
    /// `items` must reference events of type `from` in ascending position
    /// order. The result is deduplicated by event and ascending by position.
    pub fn track_step(
        &self,
        items: &[TrackedItem],
        from: EventType,
        to: EventType,
        constraint: IntervalConstraint,
    ) -> Vec<TrackedItem> {
        debug_assert!(items.iter().all(|it| self.stream.event_type(it.event_index) == from));
        debug_assert!(items.windows(2).all(|w| w[0].event_index < w[1].event_index));
        self.workers.install(|| step::run(self, items, to, constraint))
    }

    /// Representative occurrence intervals of `episode`: per final tracked
    /// event, the tightest chain reaching it.
    pub fn find_occurrences(&self, episode: &Episode) -> Vec<OccurrenceInterval> {
        self.workers.install(|| self.find_inner(episode))
    }

    fn find_inner(&self, episode: &Episode) -> Vec<OccurrenceInterval> {
        let types = episode.types();
        let constraints = episode.constraints();
        let n = types.len();
        let seed_type = match self.direction {
            Direction::Forward => types[0],
            Direction::Backward => types[n - 1],
        };
        let mut items: Vec<TrackedItem> = self
            .index
            .positions(seed_type)
            .iter()
            .zip(self.index.times(seed_type))
            .map(|(&event_index, &chain_time)| TrackedItem { event_index, chain_time })
            .collect();

        for step in 0..n - 1 {
            if items.is_empty() {
                break;
            }
            let (from, to, c) = match self.direction {
                Direction::Forward => (types[step], types[step + 1], constraints[step]),
                Direction::Backward => (types[n - 1 - step], types[n - 2 - step], constraints[n - 2 - step]),
            };
            items = step::run(self, &items, to, c);
            debug_assert!(items.iter().all(|it| self.stream.event_type(it.event_index) == to), "{from} -> {to}");
        }

        let time = |it: &TrackedItem| self.stream.time(it.event_index);
        match self.direction {
            Direction::Forward => items.iter().map(|it| OccurrenceInterval::new(it.chain_time, time(it))).collect(),
            Direction::Backward => items.iter().map(|it| OccurrenceInterval::new(time(it), it.chain_time)).collect(),
        }
    }

    /// Non-overlapped count plus scheduling statistics.
    ///
    /// The interval set is checked for end order before scheduling and sorted
    /// only if the check fails.
    pub fn count_detailed(&self, episode: &Episode) -> TrackingCount {
        let mut occurrences = self.find_occurrences(episode);
        let sort_fallback = !is_sorted_by_end(&occurrences);
        if sort_fallback {
            occurrences.sort_by_key(|o| o.end);
        }
        let count = greedy_schedule(&occurrences).expect("occurrences sorted by end");
        TrackingCount { count, occurrences: occurrences.len(), sort_fallback }
    }

    pub fn count(&self, episode: &Episode) -> u64 {
        self.count_detailed(episode).count
    }
}

/// Free-function form of [`Tracker::track_step`].
#[allow(clippy::too_many_arguments)]
pub fn track_step(
    stream: &EventStream,
    index: &TypeIndex,
    items: &[TrackedItem],
    from: EventType,
    to: EventType,
    constraint: IntervalConstraint,
    direction: Direction,
    strategy: CompactionStrategy,
    workers: &Workers,
) -> Vec<TrackedItem> {
    Tracker::new(stream, index, workers)
        .direction(direction)
        .strategy(strategy)
        .track_step(items, from, to, constraint)
}

pub fn find_occurrences(
    stream: &EventStream,
    index: &TypeIndex,
    episode: &Episode,
    direction: Direction,
    strategy: CompactionStrategy,
    workers: &Workers,
) -> Vec<OccurrenceInterval> {
    Tracker::new(stream, index, workers).direction(direction).strategy(strategy).find_occurrences(episode)
}

pub fn count_tracking(
    stream: &EventStream,
    index: &TypeIndex,
    episode: &Episode,
    direction: Direction,
    strategy: CompactionStrategy,
    workers: &Workers,
) -> u64 {
    Tracker::new(stream, index, workers).direction(direction).strategy(strategy).count(episode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episode::parse_episode;
    use crate::oracle;
    use crate::stream::SymbolTable;

    fn setup(events: &[(&str, u64)]) -> (EventStream, SymbolTable, TypeIndex) {
        let symbols = SymbolTable::from_names(["A", "B", "C"]);
        let events = events.iter().map(|&(n, t)| (symbols.get(n).unwrap(), t)).collect();
        let stream = EventStream::new(events, 3).unwrap();
        let index = TypeIndex::build(&stream);
        (stream, symbols, index)
    }

    fn all_configs() -> impl Iterator<Item = (Direction, CompactionStrategy)> {
        Direction::ALL.into_iter().flat_map(|d| CompactionStrategy::ALL.into_iter().map(move |s| (d, s)))
    }

    #[test]
    fn forward_step_keeps_latest_start() {
        let (stream, sym, index) = setup(&[("A", 0), ("A", 3), ("B", 6), ("B", 9), ("B", 12)]);
        let a = sym.get("A").unwrap();
        let b = sym.get("B").unwrap();
        let seeds = [TrackedItem { event_index: 0, chain_time: 0 }, TrackedItem { event_index: 1, chain_time: 3 }];
        let c = IntervalConstraint::new(5, 10).unwrap();
        let expected = vec![
            TrackedItem { event_index: 2, chain_time: 0 },
            TrackedItem { event_index: 3, chain_time: 3 },
            TrackedItem { event_index: 4, chain_time: 3 },
        ];
        for strategy in CompactionStrategy::ALL {
            for threads in [1, 3] {
                let w = Workers::new(threads);
                let out = track_step(&stream, &index, &seeds, a, b, c, Direction::Forward, strategy, &w);
                assert_eq!(out, expected, "{strategy} x{threads}");
            }
        }
    }

    #[test]
    fn backward_step_keeps_earliest_end() {
        let (stream, sym, index) = setup(&[("A", 0), ("A", 3), ("B", 6), ("B", 9), ("B", 12)]);
        let a = sym.get("A").unwrap();
        let b = sym.get("B").unwrap();
        let seeds: Vec<_> = [2, 3, 4].iter().map(|&i| TrackedItem { event_index: i, chain_time: stream.time(i) }).collect();
        let c = IntervalConstraint::new(5, 10).unwrap();
        for strategy in CompactionStrategy::ALL {
            let w = Workers::new(2);
            let out = track_step(&stream, &index, &seeds, b, a, c, Direction::Backward, strategy, &w);
            assert_eq!(
                out,
                vec![TrackedItem { event_index: 0, chain_time: 6 }, TrackedItem { event_index: 1, chain_time: 9 }],
                "{strategy}"
            );
        }
    }

    #[test]
    fn empty_inputs_and_windows() {
        let (stream, sym, index) = setup(&[("A", 0), ("B", 30)]);
        let a = sym.get("A").unwrap();
        let b = sym.get("B").unwrap();
        let c = IntervalConstraint::new(5, 10).unwrap();
        let w = Workers::inline();
        for (d, s) in all_configs() {
            assert!(track_step(&stream, &index, &[], a, b, c, d, s, &w).is_empty());
        }
        let seeds = [TrackedItem { event_index: 0, chain_time: 0 }];
        for s in CompactionStrategy::ALL {
            assert!(track_step(&stream, &index, &seeds, a, b, c, Direction::Forward, s, &w).is_empty());
        }
    }

    #[test]
    fn single_node_yields_point_intervals() {
        let (stream, sym, index) = setup(&[("A", 1), ("B", 2), ("A", 4)]);
        let e = parse_episode("A", &sym).unwrap();
        let w = Workers::inline();
        for (d, s) in all_configs() {
            let occ = find_occurrences(&stream, &index, &e, d, s, &w);
            assert_eq!(occ, vec![OccurrenceInterval::new(1, 1), OccurrenceInterval::new(4, 4)]);
        }
    }

    #[test]
    fn three_node_occurrence() {
        let (stream, sym, index) = setup(&[("A", 1), ("B", 8), ("C", 20)]);
        let e = parse_episode("A-(5,10]-B-(10,15]-C", &sym).unwrap();
        let w = Workers::new(2);
        for (d, s) in all_configs() {
            assert_eq!(find_occurrences(&stream, &index, &e, d, s, &w), vec![OccurrenceInterval::new(1, 20)]);
            assert_eq!(count_tracking(&stream, &index, &e, d, s, &w), 1);
        }
    }

    #[test]
    fn shared_middle_event_counts_once() {
        let (stream, sym, index) = setup(&[("A", 0), ("A", 2), ("B", 8), ("C", 12), ("C", 14)]);
        let e = parse_episode("A-(5,10]-B-(0,10]-C", &sym).unwrap();
        let expected = oracle::max_nonoverlap(&oracle::enumerate_all(&stream, &e).unwrap());
        assert_eq!(expected, 1);
        let w = Workers::new(2);
        for (d, s) in all_configs() {
            assert_eq!(count_tracking(&stream, &index, &e, d, s, &w), 1);
        }
    }

    #[test]
    fn tiny_slab_limit_batches_flag_compaction() {
        let (stream, sym, index) =
            setup(&[("A", 0), ("A", 1), ("A", 2), ("B", 7), ("B", 8), ("B", 9), ("B", 10), ("C", 20)]);
        let e = parse_episode("A-(5,10]-B-(5,15]-C", &sym).unwrap();
        let w = Workers::new(2);
        let reference = Tracker::new(&stream, &index, &w).find_occurrences(&e);
        for limit in [1, 2, 3, 5] {
            let t = Tracker::new(&stream, &index, &w).strategy(CompactionStrategy::FlagCompact).slab_limit(limit);
            assert_eq!(t.find_occurrences(&e), reference);
        }
    }

    #[test]
    fn strategy_and_direction_names_parse() {
        for s in CompactionStrategy::ALL {
            assert_eq!(s.name().parse::<CompactionStrategy>(), Ok(s));
        }
        for d in Direction::ALL {
            assert_eq!(d.name().parse::<Direction>(), Ok(d));
        }
        assert!("sideways".parse::<Direction>().is_err());
        assert!("atomic".parse::<CompactionStrategy>().is_err());
    }
}
