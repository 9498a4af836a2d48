//! Serial episodes, their inter-event constraints, and the textual grammar
//! `TYPE ( '-(' INT ',' INT ']-' TYPE )*`, e.g. `A-(2,5]-B-(0,6]-C`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stream::{EventType, SymbolTable};

/// Half-open gap bound `(low, high]` between consecutive episode events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IntervalConstraint {
    low: u64,
    high: u64,
}

impl IntervalConstraint {
    /// Returns `None` unless `low < high`.
    pub fn new(low: u64, high: u64) -> Option<Self> {
        (low < high).then_some(Self { low, high })
    }

    pub fn low(self) -> u64 {
        self.low
    }

    pub fn high(self) -> u64 {
        self.high
    }

    /// `low < gap <= high`.
    #[inline]
    pub fn admits(self, gap: u64) -> bool {
        self.low < gap && gap <= self.high
    }

    /// Whether an event at `later` can follow one at `earlier`.
    #[inline]
    pub fn admits_pair(self, earlier: u64, later: u64) -> bool {
        later >= earlier && self.admits(later - earlier)
    }
}

impl fmt::Display for IntervalConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}]", self.low, self.high)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {expected}, found {found:?}")]
    Syntax { offset: usize, expected: &'static str, found: String },
    #[error("empty interval {token:?}: lower bound must be below upper bound")]
    EmptyInterval { token: String },
    #[error("unknown event type {name:?}")]
    UnknownType { name: String },
}

/// Ordered event types plus one constraint per consecutive pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Episode {
    types: Vec<EventType>,
    constraints: Vec<IntervalConstraint>,
}

impl Episode {
    /// Panics unless `types` is non-empty and `constraints.len() == types.len() - 1`.
    pub fn new(types: Vec<EventType>, constraints: Vec<IntervalConstraint>) -> Self {
        assert!(!types.is_empty(), "an episode needs at least one event type");
        assert_eq!(constraints.len() + 1, types.len(), "one constraint per consecutive pair");
        Self { types, constraints }
    }

    pub fn single(ty: EventType) -> Self {
        Self { types: vec![ty], constraints: Vec::new() }
    }

    /// Episode with the same constraint between every consecutive pair.
    pub fn uniform(types: Vec<EventType>, constraint: IntervalConstraint) -> Self {
        let constraints = vec![constraint; types.len().saturating_sub(1)];
        Self::new(types, constraints)
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn types(&self) -> &[EventType] {
        &self.types
    }

    pub fn constraints(&self) -> &[IntervalConstraint] {
        &self.constraints
    }

    pub fn first(&self) -> EventType {
        self.types[0]
    }

    pub fn last(&self) -> EventType {
        self.types[self.types.len() - 1]
    }

    /// Upper bound on `end - start` of any occurrence: the sum of upper bounds.
    pub fn max_span(&self) -> u64 {
        self.constraints.iter().map(|c| c.high).sum()
    }

    /// Episode made of positions `range`.
    pub fn sub_episode(&self, range: std::ops::Range<usize>) -> Episode {
        assert!(!range.is_empty());
        Episode {
            types: self.types[range.clone()].to_vec(),
            constraints: self.constraints[range.start..range.end - 1].to_vec(),
        }
    }

    /// Appends `ty` after the current last type.
    pub fn extended(&self, constraint: IntervalConstraint, ty: EventType) -> Episode {
        let mut next = self.clone();
        next.constraints.push(constraint);
        next.types.push(ty);
        next
    }
}

/// Occurrence extent: timestamps of its first and last events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct OccurrenceInterval {
    pub start: u64,
    pub end: u64,
}

impl OccurrenceInterval {
    pub fn new(start: u64, end: u64) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn found(&self) -> String {
        match self.rest().chars().next() {
            None => "end of input".to_owned(),
            Some(_) => self.rest().chars().take(8).collect(),
        }
    }

    fn error(&self, expected: &'static str) -> ParseError {
        ParseError::Syntax { offset: self.pos, expected, found: self.found() }
    }

    fn expect(&mut self, lit: &'static str) -> Result<(), ParseError> {
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            Ok(())
        } else {
            Err(self.error(lit))
        }
    }

    fn name(&mut self) -> Result<&'a str, ParseError> {
        let rest = self.rest();
        let len = rest
            .find(|c: char| matches!(c, '-' | '(' | ')' | ',' | ']' | '[' | ';' | ':') || c.is_whitespace())
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error("event type name"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn int(&mut self) -> Result<u64, ParseError> {
        let rest = self.rest();
        let len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        let value = rest[..len].parse().map_err(|_| self.error("non-negative integer"))?;
        self.pos += len;
        Ok(value)
    }

    /// `(low,high]`
    fn constraint(&mut self) -> Result<IntervalConstraint, ParseError> {
        let start = self.pos;
        self.expect("(")?;
        let low = self.int()?;
        self.expect(",")?;
        let high = self.int()?;
        self.expect("]")?;
        IntervalConstraint::new(low, high)
            .ok_or_else(|| ParseError::EmptyInterval { token: self.text[start..self.pos].to_owned() })
    }
}

/// Parses the episode grammar, resolving names through `symbols`.
pub fn parse_episode(text: &str, symbols: &SymbolTable) -> Result<Episode, ParseError> {
    let mut cur = Cursor { text: text.trim(), pos: 0 };
    let lookup = |name: &str| symbols.get(name).ok_or_else(|| ParseError::UnknownType { name: name.to_owned() });

    let mut types = vec![lookup(cur.name()?)?];
    let mut constraints = Vec::new();
    while !cur.rest().is_empty() {
        cur.expect("-")?;
        constraints.push(cur.constraint()?);
        cur.expect("-")?;
        types.push(lookup(cur.name()?)?);
    }
    Ok(Episode { types, constraints })
}

/// Parses a `;`-separated constraint list such as `(5,10];(10,15]`.
pub fn parse_constraints(text: &str) -> Result<Vec<IntervalConstraint>, ParseError> {
    let mut out = Vec::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let mut cur = Cursor { text: part, pos: 0 };
        out.push(cur.constraint()?);
        if !cur.rest().is_empty() {
            return Err(cur.error("`;` or end of input"));
        }
    }
    if out.is_empty() {
        return Err(ParseError::Syntax { offset: 0, expected: "at least one constraint", found: text.to_owned() });
    }
    Ok(out)
}

/// Inverse of [`parse_episode`]. Panics if a type has no name in `symbols`.
pub fn format_episode(episode: &Episode, symbols: &SymbolTable) -> String {
    let name = |ty: EventType| symbols.name(ty).expect("event type missing from symbol table");
    let mut out = name(episode.types[0]).to_owned();
    for (c, &ty) in episode.constraints.iter().zip(&episode.types[1..]) {
        out.push_str(&format!("-{c}-{}", name(ty)));
    }
    out
}
