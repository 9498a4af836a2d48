use thiserror::Error;

use crate::episode::OccurrenceInterval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("occurrences not sorted by end time at position {position}")]
pub struct UnsortedError {
    pub position: usize,
}

/// Largest set of pairwise non-overlapped intervals from a list sorted by end.
///
/// An interval is taken when its start is strictly after the end of the last
/// one taken; touching intervals overlap. The initial "last end" sits below
/// every timestamp, so an occurrence starting at 0 is selectable.
pub fn greedy_schedule(occurrences: &[OccurrenceInterval]) -> Result<u64, UnsortedError> {
    let mut count = 0;
    let mut prev_end: Option<u64> = None;
    let mut prev_seen = 0u64;
    for (position, occ) in occurrences.iter().enumerate() {
        if occ.end < prev_seen {
            return Err(UnsortedError { position });
        }
        prev_seen = occ.end;
        if prev_end.is_none_or(|e| e < occ.start) {
            prev_end = Some(occ.end);
            count += 1;
        }
    }
    Ok(count)
}

/// Whether `occurrences` is non-decreasing by end time.
pub fn is_sorted_by_end(occurrences: &[OccurrenceInterval]) -> bool {
    occurrences.windows(2).all(|w| w[0].end <= w[1].end)
}
