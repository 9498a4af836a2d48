//! Event streams, the symbol table that names event types, and the
//! line-oriented event file format (`<name>,<time_ms>` per line).

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

/// Dense event-type identifier, `0..alphabet_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EventType(pub u32);

impl EventType {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: expected `<name>,<time_ms>`, got {content:?}")]
    Malformed { line: usize, content: String },
    #[error("line {line}: time {token:?} is not a non-negative integer")]
    InvalidTime { line: usize, token: String },
    #[error("line {line}: time regression ({time} after {previous})")]
    TimeRegression { line: usize, previous: u64, time: u64 },
    #[error("event {position}: time regression ({time} after {previous})")]
    Unsorted { position: usize, previous: u64, time: u64 },
    #[error("event {position}: type {ty} outside alphabet of size {alphabet_size}")]
    TypeOutOfRange { position: usize, ty: EventType, alphabet_size: usize },
}

/// Maps event-type names to dense [`EventType`] ids in order of first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    names: Vec<String>,
    ids: HashMap<String, EventType>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut table = Self::new();
        for name in names {
            table.intern(name.into());
        }
        table
    }

    /// Returns the id for `name`, assigning the next free id if unseen.
    pub fn intern(&mut self, name: impl AsRef<str>) -> EventType {
        let name = name.as_ref();
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = EventType(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<EventType> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, ty: EventType) -> Option<&str> {
        self.names.get(ty.index()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn types(&self) -> impl Iterator<Item = EventType> + '_ {
        (0..self.names.len() as u32).map(EventType)
    }
}

/// A time-ordered event sequence stored column-wise.
///
/// Times are integer milliseconds and non-decreasing; ties keep their input
/// order, and every algorithm addresses events by position so ties stay
/// unambiguous.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventStream {
    types: Vec<EventType>,
    times: Vec<u64>,
    alphabet_size: usize,
}

impl EventStream {
    pub fn new(events: Vec<(EventType, u64)>, alphabet_size: usize) -> Result<Self, StreamError> {
        let (types, times) = events.into_iter().unzip();
        Self::from_columns(types, times, alphabet_size)
    }

    pub fn from_columns(types: Vec<EventType>, times: Vec<u64>, alphabet_size: usize) -> Result<Self, StreamError> {
        assert_eq!(types.len(), times.len(), "column lengths differ");
        for (position, pair) in times.windows(2).enumerate() {
            if pair[1] < pair[0] {
                return Err(StreamError::Unsorted { position: position + 1, previous: pair[0], time: pair[1] });
            }
        }
        if let Some(position) = types.iter().position(|t| t.index() >= alphabet_size) {
            return Err(StreamError::TypeOutOfRange { position, ty: types[position], alphabet_size });
        }
        Ok(Self { types, times, alphabet_size })
    }

    pub fn empty(alphabet_size: usize) -> Self {
        Self { types: Vec::new(), times: Vec::new(), alphabet_size }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    #[inline]
    pub fn event_type(&self, i: usize) -> EventType {
        self.types[i]
    }

    #[inline]
    pub fn time(&self, i: usize) -> u64 {
        self.times[i]
    }

    pub fn types(&self) -> &[EventType] {
        &self.types
    }

    pub fn times(&self) -> &[u64] {
        &self.times
    }

    pub fn iter(&self) -> impl Iterator<Item = (EventType, u64)> + '_ {
        self.types.iter().copied().zip(self.times.iter().copied())
    }

    /// Copies events `range` into a new stream with the same alphabet.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            types: self.types[range.clone()].to_vec(),
            times: self.times[range].to_vec(),
            alphabet_size: self.alphabet_size,
        }
    }
}

/// Reads the event file format. Blank lines and `#` comments are skipped;
/// type names get ids in order of first appearance.
pub fn load_stream<R: BufRead>(source: R) -> Result<(EventStream, SymbolTable), StreamError> {
    let mut symbols = SymbolTable::new();
    let mut types = Vec::new();
    let mut times: Vec<u64> = Vec::new();

    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (name, time) = trimmed
            .split_once(',')
            .map(|(n, t)| (n.trim(), t.trim()))
            .filter(|(n, _)| !n.is_empty())
            .ok_or_else(|| StreamError::Malformed { line: lineno, content: line.clone() })?;
        let time: u64 = time
            .parse()
            .map_err(|_| StreamError::InvalidTime { line: lineno, token: time.to_owned() })?;
        if let Some(&previous) = times.last() {
            if time < previous {
                return Err(StreamError::TimeRegression { line: lineno, previous, time });
            }
        }
        types.push(symbols.intern(name));
        times.push(time);
    }

    let alphabet_size = symbols.len();
    Ok((EventStream { types, times, alphabet_size }, symbols))
}

/// Writes `stream` in the event file format, one `<name>,<time_ms>` per line.
///
/// Panics if a type has no name in `symbols`.
pub fn write_stream<W: Write>(stream: &EventStream, symbols: &SymbolTable, mut out: W) -> io::Result<()> {
    for (ty, time) in stream.iter() {
        let name = symbols.name(ty).expect("event type missing from symbol table");
        writeln!(out, "{name},{time}")?;
    }
    out.flush()
}
