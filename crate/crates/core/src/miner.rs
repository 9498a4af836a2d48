//! Level-wise frequent episode discovery.
//!
//! Level 1 counts every event type. Each later level joins frequent episodes
//! of the previous level on a shared contiguous overlap (types and
//! constraints both), counts the candidates and keeps those reaching the
//! threshold. Frequency is anti-monotone, so no frequent episode is missed.

use std::collections::HashMap;
use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::counter::Counter;
use crate::episode::{format_episode, Episode, IntervalConstraint};
use crate::index::TypeIndex;
use crate::scan::Workers;
use crate::stream::{EventStream, SymbolTable};

pub const DEFAULT_SWITCH_LEVEL: usize = 3;

#[derive(Debug, Clone)]
pub struct MiningConfig {
    /// Minimum non-overlapped count for an episode to be frequent.
    pub threshold: u64,
    /// Constraints allowed between consecutive events.
    pub constraints: Vec<IntervalConstraint>,
    pub max_level: usize,
    /// Levels below this count many episodes at once, one task per episode;
    /// from this level on each episode's count is itself parallel.
    pub strategy_switch_level: usize,
    pub counter: Counter,
}

impl MiningConfig {
    pub fn new(threshold: u64, constraints: Vec<IntervalConstraint>) -> Self {
        Self {
            threshold,
            constraints,
            max_level: usize::MAX,
            strategy_switch_level: DEFAULT_SWITCH_LEVEL,
            counter: Counter::default(),
        }
    }

    pub fn validate(&self) -> Result<(), MiningError> {
        if self.threshold == 0 {
            return Err(MiningError::ZeroThreshold);
        }
        if self.constraints.is_empty() {
            return Err(MiningError::NoConstraints);
        }
        if self.max_level == 0 {
            return Err(MiningError::ZeroMaxLevel);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MiningError {
    #[error("threshold must be at least 1")]
    ZeroThreshold,
    #[error("at least one inter-event constraint is required")]
    NoConstraints,
    #[error("max level must be at least 1")]
    ZeroMaxLevel,
}

#[derive(Debug, Clone)]
pub struct LevelReport {
    pub level: usize,
    pub candidates: usize,
    pub frequent: Vec<(Episode, u64)>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Default)]
pub struct MiningReport {
    pub levels: Vec<LevelReport>,
    pub elapsed_ms: f64,
}

impl MiningReport {
    pub fn level(&self, level: usize) -> Option<&LevelReport> {
        self.levels.iter().find(|l| l.level == level)
    }

    pub fn frequent(&self) -> impl Iterator<Item = (usize, &Episode, u64)> {
        self.levels.iter().flat_map(|l| l.frequent.iter().map(move |(e, c)| (l.level, e, *c)))
    }
}

/// Size-1 candidates: one per event type.
pub fn level_one(alphabet_size: usize) -> Vec<Episode> {
    (0..alphabet_size as u32).map(|t| Episode::single(crate::stream::EventType(t))).collect()
}

/// Size-`N` candidates from frequent size-`N-1` episodes.
///
/// Two frequent episodes join when one's suffix equals the other's prefix;
/// single-node episodes join pairwise through every allowed constraint.
pub fn generate_candidates(frequent: &[Episode], constraints: &[IntervalConstraint]) -> Vec<Episode> {
    let Some(size) = frequent.first().map(Episode::len) else {
        return Vec::new();
    };
    debug_assert!(frequent.iter().all(|e| e.len() == size));

    let mut out = Vec::new();
    if size == 1 {
        for a in frequent {
            for b in frequent {
                for &c in constraints {
                    out.push(a.extended(c, b.first()));
                }
            }
        }
    } else {
        let mut by_prefix: HashMap<Episode, Vec<&Episode>> = HashMap::new();
        for b in frequent {
            by_prefix.entry(b.sub_episode(0..size - 1)).or_default().push(b);
        }
        for a in frequent {
            if let Some(joins) = by_prefix.get(&a.sub_episode(1..size)) {
                for b in joins {
                    out.push(a.extended(*b.constraints().last().unwrap(), b.last()));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn mine(stream: &EventStream, config: &MiningConfig, workers: &Workers) -> Result<MiningReport, MiningError> {
    config.validate()?;
    let started = Instant::now();
    let index = TypeIndex::build(stream);
    let mut report = MiningReport::default();
    let mut candidates = level_one(stream.alphabet_size());

    for level in 1..=config.max_level {
        if candidates.is_empty() {
            break;
        }
        let level_started = Instant::now();
        let counts: Vec<u64> = if level < config.strategy_switch_level {
            let single = Workers::inline();
            workers.install(|| {
                candidates.par_iter().map(|e| config.counter.count(stream, &index, e, &single)).collect()
            })
        } else {
            candidates.iter().map(|e| config.counter.count(stream, &index, e, workers)).collect()
        };
        let n_candidates = candidates.len();
        let frequent: Vec<(Episode, u64)> = candidates
            .into_iter()
            .zip(counts)
            .filter(|&(_, c)| c >= config.threshold)
            .collect();
        let next_seed: Vec<Episode> = frequent.iter().map(|(e, _)| e.clone()).collect();
        report.levels.push(LevelReport {
            level,
            candidates: n_candidates,
            frequent,
            elapsed_ms: level_started.elapsed().as_secs_f64() * 1e3,
        });
        candidates = if level < config.max_level { generate_candidates(&next_seed, &config.constraints) } else { Vec::new() };
    }
    report.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Quotes a CSV field when it contains a separator or quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// `level,episode,count`, one row per frequent episode.
pub fn write_csv<W: Write>(report: &MiningReport, symbols: &SymbolTable, mut out: W) -> io::Result<()> {
    writeln!(out, "level,episode,count")?;
    for (level, episode, count) in report.frequent() {
        writeln!(out, "{level},{},{count}", csv_field(&format_episode(episode, symbols)))?;
    }
    out.flush()
}

#[derive(Serialize)]
struct LevelSummary {
    level: usize,
    candidates: usize,
    frequent: usize,
    elapsed_ms: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    counter: String,
    threshold: u64,
    constraints: Vec<String>,
    levels: Vec<LevelSummary>,
    total_frequent: usize,
    elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<&'a str>,
}

/// JSON summary: per-level candidate and frequent counts plus timings.
pub fn summary_json(report: &MiningReport, config: &MiningConfig, data: Option<&str>) -> String {
    let summary = Summary {
        counter: config.counter.to_string(),
        threshold: config.threshold,
        constraints: config.constraints.iter().map(ToString::to_string).collect(),
        levels: report
            .levels
            .iter()
            .map(|l| LevelSummary {
                level: l.level,
                candidates: l.candidates,
                frequent: l.frequent.len(),
                elapsed_ms: l.elapsed_ms,
            })
            .collect(),
        total_frequent: report.levels.iter().map(|l| l.frequent.len()).sum(),
        elapsed_ms: report.elapsed_ms,
        data,
    };
    serde_json::to_string_pretty(&summary).expect("summary serializes")
}
