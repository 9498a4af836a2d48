//! Brute-force ground truth for small instances.
//!
//! [`enumerate_all`] lists every index tuple that forms a valid occurrence,
//! checking each candidate extension against the raw stream without using
//! the type index, and [`max_nonoverlap`] solves interval scheduling on the
//! result. Nothing here shares code with the production counters.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::episode::{Episode, OccurrenceInterval};
use crate::stream::EventStream;

pub const DEFAULT_MAX_EVENTS: usize = 500;
pub const DEFAULT_MAX_NODES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("stream has {events} events; the oracle accepts at most {max}")]
    TooManyEvents { events: usize, max: usize },
    #[error("episode has {nodes} nodes; the oracle accepts at most {max}")]
    TooManyNodes { nodes: usize, max: usize },
}

/// Every distinct `(start, end)` of a valid occurrence, with the default bounds.
pub fn enumerate_all(stream: &EventStream, episode: &Episode) -> Result<BTreeSet<OccurrenceInterval>, OracleError> {
    enumerate_bounded(stream, episode, DEFAULT_MAX_EVENTS, DEFAULT_MAX_NODES)
}

pub fn enumerate_bounded(
    stream: &EventStream,
    episode: &Episode,
    max_events: usize,
    max_nodes: usize,
) -> Result<BTreeSet<OccurrenceInterval>, OracleError> {
    if stream.len() > max_events {
        return Err(OracleError::TooManyEvents { events: stream.len(), max: max_events });
    }
    if episode.len() > max_nodes {
        return Err(OracleError::TooManyNodes { nodes: episode.len(), max: max_nodes });
    }
    let mut found = BTreeSet::new();
    let mut chosen = Vec::with_capacity(episode.len());
    for i in 0..stream.len() {
        if stream.event_type(i) == episode.types()[0] {
            chosen.push(i);
            extend(stream, episode, &mut chosen, &mut found);
            chosen.pop();
        }
    }
    Ok(found)
}

fn extend(stream: &EventStream, episode: &Episode, chosen: &mut Vec<usize>, found: &mut BTreeSet<OccurrenceInterval>) {
    let k = chosen.len();
    let prev = *chosen.last().unwrap();
    if k == episode.len() {
        found.insert(OccurrenceInterval { start: stream.time(chosen[0]), end: stream.time(prev) });
        return;
    }
    let (lo, hi) = (episode.constraints()[k - 1].low(), episode.constraints()[k - 1].high());
    for j in prev + 1..stream.len() {
        let gap = stream.time(j) - stream.time(prev);
        if gap > hi {
            break;
        }
        if stream.event_type(j) == episode.types()[k] && lo < gap {
            chosen.push(j);
            extend(stream, episode, chosen, found);
            chosen.pop();
        }
    }
}

/// Size of the largest subset in which every later start is strictly after
/// every earlier end (earliest-end-first greedy, which is optimal).
pub fn max_nonoverlap<'a>(occurrences: impl IntoIterator<Item = &'a OccurrenceInterval>) -> u64 {
    let mut by_end: Vec<OccurrenceInterval> = occurrences.into_iter().copied().collect();
    by_end.sort_by_key(|o| (o.end, o.start));
    let mut count = 0;
    let mut last: Option<u64> = None;
    for o in by_end {
        if last.is_none_or(|e| o.start > e) {
            last = Some(o.end);
            count += 1;
        }
    }
    count
}

/// Whether the events at `positions` form a valid occurrence of `episode`.
pub fn is_occurrence(stream: &EventStream, episode: &Episode, positions: &[usize]) -> bool {
    positions.len() == episode.len()
        && positions.windows(2).all(|w| w[0] < w[1])
        && positions.iter().zip(episode.types()).all(|(&p, &ty)| p < stream.len() && stream.event_type(p) == ty)
        && positions
            .windows(2)
            .zip(episode.constraints())
            .all(|(w, c)| c.admits_pair(stream.time(w[0]), stream.time(w[1])))
}

/// Whether some valid occurrence spans exactly `interval`.
pub fn has_occurrence(stream: &EventStream, episode: &Episode, interval: OccurrenceInterval) -> bool {
    let starts = (0..stream.len()).filter(|&i| stream.time(i) == interval.start && stream.event_type(i) == episode.types()[0]);
    let mut chosen = Vec::new();
    let mut found = BTreeSet::new();
    for i in starts {
        chosen.push(i);
        extend_until(stream, episode, &mut chosen, &mut found, interval.end);
        chosen.pop();
        if found.contains(&interval) {
            return true;
        }
    }
    false
}

fn extend_until(
    stream: &EventStream,
    episode: &Episode,
    chosen: &mut Vec<usize>,
    found: &mut BTreeSet<OccurrenceInterval>,
    end: u64,
) {
    let prev = *chosen.last().unwrap();
    if stream.time(prev) > end {
        return;
    }
    let k = chosen.len();
    if k == episode.len() {
        found.insert(OccurrenceInterval { start: stream.time(chosen[0]), end: stream.time(prev) });
        return;
    }
    let c = episode.constraints()[k - 1];
    for j in prev + 1..stream.len() {
        let gap = stream.time(j) - stream.time(prev);
        if gap > c.high() || stream.time(j) > end {
            break;
        }
        if stream.event_type(j) == episode.types()[k] && c.admits(gap) {
            chosen.push(j);
            extend_until(stream, episode, chosen, found, end);
            chosen.pop();
        }
    }
}
