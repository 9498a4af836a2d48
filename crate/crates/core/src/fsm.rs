//! Sequential reference counter.
//!
//! One pass over the stream keeps, for every episode position `k`, the
//! timestamps of events accepted at `k` that can still be extended. An event
//! is accepted at `k > 0` when some entry of list `k - 1` lies inside the
//! constraint window before it; acceptance at the last position completes an
//! occurrence, bumps the count and clears every list. After a completion at
//! time `T`, only events strictly later than `T` may start a new occurrence.
//!
//! The first completion seen is the earliest-ending occurrence that starts
//! after the previous completion, which is exactly what greedy interval
//! scheduling selects, so the count is the maximum non-overlapped count.

use std::collections::VecDeque;

use crate::episode::Episode;
use crate::stream::{EventStream, EventType};

/// Incremental state machine for one episode.
#[derive(Debug, Clone)]
pub struct StateMachine<'e> {
    episode: &'e Episode,
    lists: Vec<VecDeque<u64>>,
    floor: Option<u64>,
    count: u64,
    first_end: Option<u64>,
    last_end: Option<u64>,
    accepted: Vec<usize>,
}

impl<'e> StateMachine<'e> {
    pub fn new(episode: &'e Episode) -> Self {
        Self::with_floor(episode, None)
    }

    /// Machine whose occurrences must start strictly after `floor`, as if an
    /// occurrence had just completed at that time.
    pub fn with_floor(episode: &'e Episode, floor: Option<u64>) -> Self {
        Self {
            episode,
            lists: vec![VecDeque::new(); episode.len()],
            floor,
            count: 0,
            first_end: None,
            last_end: None,
            accepted: Vec::with_capacity(episode.len()),
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn first_end(&self) -> Option<u64> {
        self.first_end
    }

    pub fn last_end(&self) -> Option<u64> {
        self.last_end
    }

    /// Feeds one event; returns `true` if it completed an occurrence.
    pub fn feed(&mut self, ty: EventType, time: u64) -> bool {
        let types = self.episode.types();
        let constraints = self.episode.constraints();
        let last = types.len() - 1;

        // Decide every accepting position against the state before this event.
        self.accepted.clear();
        for k in 0..types.len() {
            if types[k] != ty {
                continue;
            }
            let ok = if k == 0 {
                self.floor.is_none_or(|f| time > f)
            } else {
                let c = constraints[k - 1];
                let prev = &mut self.lists[k - 1];
                while prev.front().is_some_and(|&t| time - t > c.high()) {
                    prev.pop_front();
                }
                prev.front().is_some_and(|&t| time - t > c.low())
            };
            if ok {
                self.accepted.push(k);
            }
        }

        if self.accepted.last() == Some(&last) {
            self.count += 1;
            self.first_end.get_or_insert(time);
            self.last_end = Some(time);
            self.floor = Some(time);
            self.lists.iter_mut().for_each(VecDeque::clear);
            return true;
        }
        for &k in &self.accepted {
            let list = &mut self.lists[k];
            if list.back() != Some(&time) {
                list.push_back(time);
            }
        }
        false
    }
}

/// Maximum number of non-overlapped occurrences of `episode` in `stream`.
pub fn count_fsm(stream: &EventStream, episode: &Episode) -> u64 {
    let mut machine = StateMachine::new(episode);
    for (ty, t) in stream.iter() {
        machine.feed(ty, t);
    }
    machine.count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episode::parse_episode;
    use crate::stream::SymbolTable;

    fn setup(events: &[(&str, u64)]) -> (EventStream, SymbolTable) {
        let symbols = SymbolTable::from_names(["A", "B", "C"]);
        let events = events.iter().map(|&(n, t)| (symbols.get(n).unwrap(), t)).collect();
        (EventStream::new(events, 3).unwrap(), symbols)
    }

    #[test]
    fn b_joins_list_when_gap_fits() {
        let symbols = SymbolTable::from_names(["A", "B", "C"]);
        let e = parse_episode("A-(5,10]-B-(10,15]-C", &symbols).unwrap();
        let mut m = StateMachine::new(&e);
        assert!(!m.feed(EventType(0), 10));
        assert!(!m.feed(EventType(1), 18));
        assert_eq!(m.lists[1], [18]);
        // 20 - 18 = 2 is outside (10,15]
        assert!(!m.feed(EventType(2), 20));
        assert!(m.feed(EventType(2), 30));
        assert_eq!(m.count(), 1);
    }

    #[test]
    fn two_disjoint_pairs() {
        let (s, sym) = setup(&[("A", 0), ("B", 6), ("A", 20), ("B", 27)]);
        assert_eq!(count_fsm(&s, &parse_episode("A-(5,10]-B", &sym).unwrap()), 2);
    }

    #[test]
    fn no_start_event() {
        let (s, sym) = setup(&[("B", 6)]);
        assert_eq!(count_fsm(&s, &parse_episode("A-(5,10]-B", &sym).unwrap()), 0);
    }

    #[test]
    fn restart_requires_strictly_later_start() {
        // A@6 ties with the completing B@6 and may not start the next occurrence.
        let (s, sym) = setup(&[("A", 0), ("B", 6), ("A", 6), ("B", 12)]);
        assert_eq!(count_fsm(&s, &parse_episode("A-(5,10]-B", &sym).unwrap()), 1);
    }

    #[test]
    fn single_node_counts_distinct_times() {
        let (s, sym) = setup(&[("A", 1), ("A", 1), ("B", 2), ("A", 3)]);
        assert_eq!(count_fsm(&s, &parse_episode("A", &sym).unwrap()), 2);
    }

    #[test]
    fn repeated_type_episode() {
        let (s, sym) = setup(&[("A", 0), ("A", 3), ("A", 6), ("A", 9)]);
        // (0,3) then (6,9); (3,6) touches (0,3) and is skipped.
        assert_eq!(count_fsm(&s, &parse_episode("A-(0,5]-A", &sym).unwrap()), 2);
    }

    #[test]
    fn earliest_ending_occurrence_wins() {
        // A@0 ... B@9 is valid, but A@2,B@8 ends first and leaves room for A@10,B@16.
        let (s, sym) = setup(&[("A", 0), ("A", 2), ("B", 8), ("B", 9), ("A", 10), ("B", 16)]);
        assert_eq!(count_fsm(&s, &parse_episode("A-(5,10]-B", &sym).unwrap()), 2);
    }
}
