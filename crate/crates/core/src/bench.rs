//! Timing sweeps over generated data: dataset size, episode length and
//! injected episode frequency.
//!
//! Every cell generates one stream with a single embedded episode, builds the
//! type index once, then times each counting backend for each worker count.
//! Only the count itself is timed.

use std::io::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use crate::datagen::{generate, standard_embeddings, GenConfig, GenError, Generated};
use crate::episode::{Episode, IntervalConstraint};
use crate::fsm::count_fsm;
use crate::index::TypeIndex;
use crate::mapconcat::count_mapconcat;
use crate::scan::Workers;
use crate::tracking::{CompactionStrategy, Direction, Tracker};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Datasets,
    Length,
    Frequency,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "datasets" => Ok(Suite::Datasets),
            "length" => Ok(Suite::Length),
            "frequency" => Ok(Suite::Frequency),
            other => Err(format!("unknown suite '{other}' (expected datasets, length or frequency)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub suite: Suite,
    /// Target event counts. The length and frequency suites use the first.
    pub sizes: Vec<usize>,
    pub lengths: Vec<usize>,
    /// Injection rates in Hz for the frequency suite.
    pub rates: Vec<f64>,
    pub repeats: usize,
    pub workers: Vec<usize>,
    pub seed: u64,
    /// Episode length outside the length suite.
    pub episode_len: usize,
    /// Injection rate outside the frequency suite.
    pub frequency: f64,
    pub neurons: usize,
    pub base_rate_hz: f64,
    pub constraint: IntervalConstraint,
    /// Segment count for the segmented baseline; defaults to the worker count.
    pub segments: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            suite: Suite::Datasets,
            sizes: vec![100_000],
            lengths: (2..=9).collect(),
            rates: vec![0.5, 1.0, 2.0, 5.0, 10.0],
            repeats: 1,
            workers: vec![Workers::available().threads()],
            seed: 0,
            episode_len: 5,
            frequency: 1.0,
            neurons: 64,
            base_rate_hz: 20.0,
            constraint: IntervalConstraint::new(5, 10).expect("valid constraint"),
            segments: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub dataset_events: usize,
    pub episode_len: usize,
    pub frequency: f64,
    pub algo: &'static str,
    pub strategy: &'static str,
    pub direction: &'static str,
    pub workers: usize,
    pub segments: usize,
    pub repeat: usize,
    pub elapsed_ms: f64,
    pub sort_fallbacks: u64,
    pub count: u64,
}

pub const CSV_HEADER: &str =
    "dataset_events,episode_len,frequency,algo,strategy,workers,elapsed_ms,sort_fallbacks,direction,segments,repeat,count";

impl BenchRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.3},{},{},{},{},{}",
            self.dataset_events,
            self.episode_len,
            self.frequency,
            self.algo,
            self.strategy,
            self.workers,
            self.elapsed_ms,
            self.sort_fallbacks,
            self.direction,
            self.segments,
            self.repeat,
            self.count
        )
    }
}

/// One benchmark cell: its parameters and the data they produce.
#[derive(Debug, Clone)]
pub struct Cell {
    pub target_events: usize,
    pub episode_len: usize,
    pub frequency: f64,
    pub data: Generated,
    pub episode: Episode,
}

/// Generates a stream of roughly `target_events` background events with one
/// embedded episode of `episode_len` nodes injected at `frequency` Hz.
pub fn make_cell(
    config: &BenchConfig,
    target_events: usize,
    episode_len: usize,
    frequency: f64,
) -> Result<Cell, GenError> {
    let duration_s = target_events as f64 / (config.neurons as f64 * config.base_rate_hz);
    let embedded =
        standard_embeddings(config.neurons, 1, episode_len, config.constraint, frequency, config.seed);
    let episode = embedded[0].0.clone();
    let data = generate(&GenConfig {
        neurons: config.neurons,
        duration_s,
        base_rate_hz: config.base_rate_hz,
        embedded,
        seed: config.seed,
    })?;
    Ok(Cell { target_events, episode_len, frequency, data, episode })
}

pub fn cells(config: &BenchConfig) -> Result<Vec<Cell>, GenError> {
    let first = config.sizes.first().copied().unwrap_or(0);
    match config.suite {
        Suite::Datasets => {
            config.sizes.iter().map(|&n| make_cell(config, n, config.episode_len, config.frequency)).collect()
        }
        Suite::Length => config.lengths.iter().map(|&len| make_cell(config, first, len, config.frequency)).collect(),
        Suite::Frequency => config.rates.iter().map(|&r| make_cell(config, first, config.episode_len, r)).collect(),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e3)
}

/// Times every backend on one cell.
pub fn run_cell(config: &BenchConfig, cell: &Cell) -> Vec<BenchRow> {
    let stream = &cell.data.stream;
    let index = TypeIndex::build(stream);
    let row = |algo, strategy, direction, workers, segments, repeat, elapsed_ms, sort_fallbacks, count| BenchRow {
        dataset_events: stream.len(),
        episode_len: cell.episode_len,
        frequency: cell.frequency,
        algo,
        strategy,
        direction,
        workers,
        segments,
        repeat,
        elapsed_ms,
        sort_fallbacks,
        count,
    };
    let mut rows = Vec::new();
    for repeat in 0..config.repeats {
        let (count, ms) = timed(|| count_fsm(stream, &cell.episode));
        rows.push(row("fsm", "-", "-", 1, 1, repeat, ms, 0, count));
    }
    for &w in &config.workers {
        let workers = Workers::new(w);
        for strategy in CompactionStrategy::ALL {
            for direction in Direction::ALL {
                let tracker = Tracker::new(stream, &index, &workers).direction(direction).strategy(strategy);
                for repeat in 0..config.repeats {
                    let (result, ms) = timed(|| tracker.count_detailed(&cell.episode));
                    rows.push(row(
                        "tracking",
                        strategy.name(),
                        direction.name(),
                        w,
                        1,
                        repeat,
                        ms,
                        result.sort_fallback as u64,
                        result.count,
                    ));
                }
            }
        }
        let segments = config.segments.unwrap_or(w).max(1);
        for repeat in 0..config.repeats {
            let (count, ms) = timed(|| count_mapconcat(stream, &cell.episode, segments, &workers));
            rows.push(row("mapconcat", "-", "-", w, segments, repeat, ms, 0, count));
        }
    }
    rows
}

pub fn run_suite(config: &BenchConfig) -> Result<Vec<BenchRow>, GenError> {
    Ok(cells(config)?.iter().flat_map(|cell| run_cell(config, cell)).collect())
}

pub fn write_csv<W: Write>(rows: &[BenchRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(suite: Suite) -> BenchConfig {
        BenchConfig {
            suite,
            sizes: vec![3_000],
            lengths: vec![2, 3],
            rates: vec![1.0, 4.0],
            repeats: 2,
            workers: vec![1, 2],
            neurons: 16,
            ..Default::default()
        }
    }

    #[test]
    fn rows_per_cell() {
        let rows = run_suite(&small(Suite::Datasets)).unwrap();
        // fsm once per repeat, then per worker count: 6 tracking variants and mapconcat.
        assert_eq!(rows.len(), 2 + 2 * (6 + 1) * 2);
        let counts: Vec<u64> = rows.iter().map(|r| r.count).collect();
        assert!(counts.iter().all(|&c| c == counts[0]));
        assert!(rows.iter().all(|r| r.elapsed_ms >= 0.0));
    }

    #[test]
    fn sweeps_cover_their_axis() {
        let lengths: Vec<usize> = run_suite(&small(Suite::Length)).unwrap().iter().map(|r| r.episode_len).collect();
        assert!(lengths.contains(&2) && lengths.contains(&3));
        let rates: Vec<f64> = run_suite(&small(Suite::Frequency)).unwrap().iter().map(|r| r.frequency).collect();
        assert!(rates.contains(&1.0) && rates.contains(&4.0));
    }

    #[test]
    fn csv_shape() {
        let rows = run_suite(&BenchConfig { repeats: 1, workers: vec![1], ..small(Suite::Datasets) }).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let columns = CSV_HEADER.split(',').count();
        assert!(text.lines().all(|l| l.split(',').count() == columns));
        assert_eq!(text.lines().count(), rows.len() + 1);
    }

    #[test]
    fn suite_names() {
        assert_eq!("length".parse::<Suite>(), Ok(Suite::Length));
        assert!("sizes".parse::<Suite>().is_err());
    }
}
