//! Synthetic spike trains: homogeneous Poisson background firing on every
//! neuron plus directly injected occurrences of chosen episodes.
//!
//! Injected occurrence starts form their own Poisson process per episode and
//! each inter-event gap is drawn uniformly from the integers in `(low, high]`.
//! Injections that would run past the end of the recording are dropped; every
//! kept injection is logged as ground truth. Times are whole milliseconds,
//! and simultaneous spikes are ordered by neuron.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

use crate::episode::{format_episode, parse_episode, Episode, IntervalConstraint, OccurrenceInterval, ParseError};
use crate::stream::{EventStream, EventType, SymbolTable};

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub neurons: usize,
    pub duration_s: f64,
    pub base_rate_hz: f64,
    /// Episodes to inject and their occurrence rates in Hz.
    pub embedded: Vec<(Episode, f64)>,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self { neurons: 64, duration_s: 100.0, base_rate_hz: 20.0, embedded: Vec::new(), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("need at least one neuron")]
    NoNeurons,
    #[error("duration must be finite and non-negative, got {0}")]
    Duration(f64),
    #[error("rate must be finite and positive, got {0}")]
    Rate(f64),
    #[error("embedded episode uses neuron {ty} but only {neurons} exist")]
    NeuronOutOfRange { ty: EventType, neurons: usize },
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.neurons == 0 {
            return Err(GenError::NoNeurons);
        }
        if !self.duration_s.is_finite() || self.duration_s < 0.0 {
            return Err(GenError::Duration(self.duration_s));
        }
        let rates = std::iter::once(self.base_rate_hz).chain(self.embedded.iter().map(|(_, r)| *r));
        if let Some(bad) = rates.into_iter().find(|r| !r.is_finite() || *r <= 0.0) {
            return Err(GenError::Rate(bad));
        }
        for (episode, _) in &self.embedded {
            if let Some(&ty) = episode.types().iter().find(|t| t.index() >= self.neurons) {
                return Err(GenError::NeuronOutOfRange { ty, neurons: self.neurons });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub stream: EventStream,
    pub symbols: SymbolTable,
    /// Injected occurrences, one list per embedded episode, in start order.
    pub injections: Vec<Vec<OccurrenceInterval>>,
}

/// Names `E1 .. E<neurons>` for type ids `0 .. neurons`.
pub fn neuron_symbols(neurons: usize) -> SymbolTable {
    SymbolTable::from_names((1..=neurons).map(|i| format!("E{i}")))
}

/// Arrival times in seconds of a Poisson process on `[0, duration)`.
fn poisson_arrivals(rng: &mut ChaCha8Rng, rate_hz: f64, duration_s: f64) -> Vec<f64> {
    let exp = Exp::new(rate_hz).expect("rate validated as positive");
    let mut out = Vec::new();
    let mut t = exp.sample(rng);
    while t < duration_s {
        out.push(t);
        t += exp.sample(rng);
    }
    out
}

fn to_ms(t: f64) -> u64 {
    (t * 1000.0).floor() as u64
}

pub fn generate(config: &GenConfig) -> Result<Generated, GenError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let duration_ms = to_ms(config.duration_s);
    let mut events: Vec<(u64, u32)> = Vec::new();

    for neuron in 0..config.neurons as u32 {
        events.extend(
            poisson_arrivals(&mut rng, config.base_rate_hz, config.duration_s)
                .into_iter()
                .map(|t| (to_ms(t), neuron)),
        );
    }

    let mut injections = Vec::with_capacity(config.embedded.len());
    for (episode, rate) in &config.embedded {
        let mut log = Vec::new();
        for start in poisson_arrivals(&mut rng, *rate, config.duration_s) {
            let mut t = to_ms(start);
            let mut placed = vec![(t, episode.types()[0].0)];
            for (c, ty) in episode.constraints().iter().zip(&episode.types()[1..]) {
                t += rng.random_range(c.low() + 1..=c.high());
                placed.push((t, ty.0));
            }
            if t >= duration_ms {
                continue;
            }
            log.push(OccurrenceInterval::new(placed[0].0, t));
            events.extend(placed);
        }
        injections.push(log);
    }

    events.sort_by_key(|&(t, n)| (t, n));
    let stream = EventStream::new(
        events.into_iter().map(|(t, n)| (EventType(n), t)).collect(),
        config.neurons,
    )
    .expect("generated events are sorted and in range");
    Ok(Generated { stream, symbols: neuron_symbols(config.neurons), injections })
}

/// `count` episodes of `length` distinct neurons each with a uniform
/// constraint, neurons picked by a seeded shuffle. Episodes share neurons only
/// when `count * length` exceeds `neurons`.
pub fn standard_embeddings(
    neurons: usize,
    count: usize,
    length: usize,
    constraint: IntervalConstraint,
    rate_hz: f64,
    seed: u64,
) -> Vec<(Episode, f64)> {
    assert!(length >= 1 && length <= neurons, "episode length must fit the neuron count");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_e915_0de5);
    let mut order: Vec<u32> = (0..neurons as u32).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    (0..count)
        .map(|k| {
            let types = (0..length).map(|j| EventType(order[(k * length + j) % neurons])).collect();
            (Episode::uniform(types, constraint), rate_hz)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedSpecError {
    #[error("embedding '{0}' needs the form EPISODE:RATE")]
    MissingRate(String),
    #[error("bad rate '{0}' in embedding")]
    BadRate(String),
    #[error(transparent)]
    Episode(#[from] ParseError),
}

/// Parses `E1-(5,10]-E2:1.5`, an episode and its injection rate in Hz.
pub fn parse_embedding(text: &str, symbols: &SymbolTable) -> Result<(Episode, f64), EmbedSpecError> {
    let (episode, rate) = text.rsplit_once(':').ok_or_else(|| EmbedSpecError::MissingRate(text.to_string()))?;
    let rate: f64 = rate.trim().parse().map_err(|_| EmbedSpecError::BadRate(rate.to_string()))?;
    if !rate.is_finite() || rate <= 0.0 {
        return Err(EmbedSpecError::BadRate(rate.to_string()));
    }
    Ok((parse_episode(episode.trim(), symbols)?, rate))
}

/// Injection log as `episode,start_ms,end_ms` rows.
pub fn write_truth<W: Write>(generated: &Generated, embedded: &[(Episode, f64)], mut out: W) -> io::Result<()> {
    writeln!(out, "episode,start_ms,end_ms")?;
    for ((episode, _), log) in embedded.iter().zip(&generated.injections) {
        let name = format_episode(episode, &generated.symbols);
        let name = if name.contains(',') { format!("\"{name}\"") } else { name };
        for occ in log {
            writeln!(out, "{name},{},{}", occ.start, occ.end)?;
        }
    }
    Ok(())
}
