//! Segmented baseline: several state machines per stream segment, stitched
//! together afterwards.
//!
//! The sequential counter's future depends only on where its last occurrence
//! completed. A machine restarted at position `c + 1` with floor `time[c]`
//! therefore reproduces it exactly after a completion at `c`. For a segment
//! starting at position `b`, any occurrence completing at or after `b` lies
//! entirely within `W = sum of upper bounds` of `time[b]`, so the map step
//! runs one machine per possible completion `c` in that tail window plus one
//! floor-free machine at the window start, which stands in for every earlier
//! completion.
//!
//! Each machine counts only completions inside its own segment. The concat
//! step walks segments left to right and picks, for each, the machine that
//! continues the chain built so far: the one starting right after the last
//! completion, or the window-start machine when that completion lies before
//! the window.

use rayon::prelude::*;

use crate::episode::Episode;
use crate::fsm::StateMachine;
use crate::scan::Workers;
use crate::stream::EventStream;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentMachineResult {
    pub segment_id: usize,
    /// Stream position where this machine began.
    pub start_offset: usize,
    /// Occurrences must start strictly after this time.
    pub floor: Option<u64>,
    /// Completions inside the segment.
    pub count: u64,
    pub first_end: Option<u64>,
    pub last_end: Option<u64>,
    /// Position of the final event of the last completion inside the segment.
    pub last_end_index: Option<usize>,
    /// Whether the machine completed an occurrence before its segment began,
    /// which rules it out as a continuation.
    pub completed_early: bool,
}

#[derive(Debug, Clone, Copy)]
struct MachineSpec {
    segment_id: usize,
    start_offset: usize,
    floor: Option<u64>,
}

/// Segment `p` of `segments` covers positions `[p*n/P, (p+1)*n/P)`.
pub fn segment_bounds(len: usize, segments: usize) -> Vec<(usize, usize)> {
    let segments = segments.max(1);
    (0..segments).map(|p| (p * len / segments, (p + 1) * len / segments)).collect()
}

/// First position whose time is at least `time[boundary] - span`.
fn window_start(stream: &EventStream, boundary: usize, span: u64) -> usize {
    let threshold = stream.time(boundary).saturating_sub(span);
    stream.times().partition_point(|&t| t < threshold)
}

fn machine_specs(stream: &EventStream, episode: &Episode, segment_id: usize, begin: usize) -> Vec<MachineSpec> {
    if begin == 0 {
        return vec![MachineSpec { segment_id, start_offset: 0, floor: None }];
    }
    let tail = window_start(stream, begin, episode.max_span());
    let mut specs = vec![MachineSpec { segment_id, start_offset: tail, floor: None }];
    for c in tail.saturating_sub(1)..begin {
        if stream.event_type(c) == episode.last() {
            specs.push(MachineSpec { segment_id, start_offset: c + 1, floor: Some(stream.time(c)) });
        }
    }
    specs
}

fn run_machine(stream: &EventStream, episode: &Episode, spec: MachineSpec, begin: usize, end: usize) -> SegmentMachineResult {
    let mut machine = StateMachine::with_floor(episode, spec.floor);
    let mut result = SegmentMachineResult {
        segment_id: spec.segment_id,
        start_offset: spec.start_offset,
        floor: spec.floor,
        count: 0,
        first_end: None,
        last_end: None,
        last_end_index: None,
        completed_early: false,
    };
    for i in spec.start_offset..end {
        if machine.feed(stream.event_type(i), stream.time(i)) {
            if i < begin {
                result.completed_early = true;
                break;
            }
            result.count += 1;
            result.first_end.get_or_insert(stream.time(i));
            result.last_end = Some(stream.time(i));
            result.last_end_index = Some(i);
        }
    }
    result
}

/// Map step: every machine of every segment, in (segment, start) order.
pub fn map_segments(stream: &EventStream, episode: &Episode, segments: usize, workers: &Workers) -> Vec<SegmentMachineResult> {
    let bounds = segment_bounds(stream.len(), segments);
    let specs: Vec<(MachineSpec, usize, usize)> = bounds
        .iter()
        .enumerate()
        .filter(|(_, (b, e))| b < e)
        .flat_map(|(p, &(b, e))| machine_specs(stream, episode, p, b).into_iter().map(move |s| (s, b, e)))
        .collect();
    workers.install(|| {
        specs
            .par_iter()
            .with_min_len(1)
            .map(|&(spec, b, e)| run_machine(stream, episode, spec, b, e))
            .collect()
    })
}

/// Concat step over the map output.
pub fn concat(stream: &EventStream, episode: &Episode, segments: usize, machines: &[SegmentMachineResult]) -> u64 {
    let bounds = segment_bounds(stream.len(), segments);
    let mut total = 0;
    let mut last_completion: Option<usize> = None;
    for (p, &(b, e)) in bounds.iter().enumerate() {
        if b >= e {
            continue;
        }
        let candidates = machines.iter().filter(|m| m.segment_id == p);
        let chosen = if b == 0 {
            candidates.into_iter().next()
        } else {
            let tail = window_start(stream, b, episode.max_span());
            match last_completion {
                Some(c) if c + 1 >= tail => candidates.into_iter().find(|m| m.start_offset == c + 1 && m.floor.is_some()),
                _ => candidates.into_iter().find(|m| m.start_offset == tail && m.floor.is_none()),
            }
        };
        let m = chosen.expect("map step produced a machine for every continuation");
        debug_assert!(!m.completed_early);
        total += m.count;
        if m.last_end_index.is_some() {
            last_completion = m.last_end_index;
        }
    }
    total
}

/// Non-overlapped count via `segments` independently mapped segments.
pub fn count_mapconcat(stream: &EventStream, episode: &Episode, segments: usize, workers: &Workers) -> u64 {
    let machines = map_segments(stream, episode, segments, workers);
    concat(stream, episode, segments, &machines)
}
