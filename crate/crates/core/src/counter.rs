use std::fmt;

use crate::episode::Episode;
use crate::fsm::count_fsm;
use crate::index::TypeIndex;
use crate::mapconcat::count_mapconcat;
use crate::scan::Workers;
use crate::stream::EventStream;
use crate::tracking::{CompactionStrategy, Direction, Tracker};

/// Counting backend selection shared by the miner, the benchmarks and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Counter {
    Fsm,
    Tracking { direction: Direction, strategy: CompactionStrategy },
    MapConcat { segments: usize },
}

impl Default for Counter {
    fn default() -> Self {
        Counter::Tracking { direction: Direction::Forward, strategy: CompactionStrategy::CountScanWrite }
    }
}

impl Counter {
    pub fn count(&self, stream: &EventStream, index: &TypeIndex, episode: &Episode, workers: &Workers) -> u64 {
        match *self {
            Counter::Fsm => count_fsm(stream, episode),
            Counter::Tracking { direction, strategy } => {
                Tracker::new(stream, index, workers).direction(direction).strategy(strategy).count(episode)
            }
            Counter::MapConcat { segments } => count_mapconcat(stream, episode, segments, workers),
        }
    }

    pub fn algo_name(&self) -> &'static str {
        match self {
            Counter::Fsm => "fsm",
            Counter::Tracking { .. } => "tracking",
            Counter::MapConcat { .. } => "mapconcat",
        }
    }
}

impl fmt::Display for Counter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Counter::Fsm => f.write_str("fsm"),
            Counter::Tracking { direction, strategy } => write!(f, "tracking/{strategy}/{direction}"),
            Counter::MapConcat { segments } => write!(f, "mapconcat/{segments}"),
        }
    }
}
