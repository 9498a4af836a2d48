//! Counting non-overlapped occurrences of serial episodes with inter-event
//! time constraints in long event streams.
//!
//! The crate carries three independent counters that must always agree:
//!
//! - [`fsm`]: the sequential state-machine counter, one left-to-right pass.
//! - [`tracking`]: data-parallel local tracking of every occurrence followed by
//!   greedy interval scheduling, with three interchangeable compaction
//!   strategies built on the primitives in [`scan`].
//! - [`mapconcat`]: the segmented baseline that runs several state machines per
//!   stream segment and stitches their counts together.
//!
//! On top of the counters sit level-wise mining ([`miner`]), a synthetic
//! spike-train generator with a ground-truth injection log ([`datagen`]) and a
//! benchmark sweep harness ([`bench`]). The brute-force [`oracle`] is compiled
//! in with the default `oracle` feature.

pub mod bench;
pub mod counter;
pub mod datagen;
pub mod episode;
pub mod fsm;
pub mod index;
pub mod mapconcat;
pub mod miner;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod scan;
pub mod stream;
pub mod tracking;

pub use counter::Counter;
pub use episode::{format_episode, parse_constraints, parse_episode, Episode, IntervalConstraint, OccurrenceInterval, ParseError};
pub use index::TypeIndex;
pub use scan::Workers;
pub use stream::{load_stream, write_stream, EventStream, EventType, StreamError, SymbolTable};
pub use tracking::{CompactionStrategy, Direction, TrackedItem, Tracker};
