use crate::stream::{EventStream, EventType};

/// Per-type ascending position lists, with the matching timestamps kept
/// alongside so window searches never chase back into the stream.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeIndex {
    positions: Vec<Vec<usize>>,
    times: Vec<Vec<u64>>,
}

impl TypeIndex {
    pub fn build(stream: &EventStream) -> Self {
        let mut positions = vec![Vec::new(); stream.alphabet_size()];
        let mut times = vec![Vec::new(); stream.alphabet_size()];
        for (i, (ty, t)) in stream.iter().enumerate() {
            positions[ty.index()].push(i);
            times[ty.index()].push(t);
        }
        Self { positions, times }
    }

    /// Positions of `ty`; empty for types outside the alphabet.
    pub fn positions(&self, ty: EventType) -> &[usize] {
        self.positions.get(ty.index()).map_or(&[], Vec::as_slice)
    }

    /// Timestamps of the events in [`positions`](Self::positions), same order.
    pub fn times(&self, ty: EventType) -> &[u64] {
        self.times.get(ty.index()).map_or(&[], Vec::as_slice)
    }

    pub fn alphabet_size(&self) -> usize {
        self.positions.len()
    }

    pub fn total(&self) -> usize {
        self.positions.iter().map(Vec::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_positions_by_type() {
        let a = EventType(0);
        let b = EventType(1);
        let stream = EventStream::new(vec![(a, 1), (b, 2), (a, 4)], 2).unwrap();
        let index = TypeIndex::build(&stream);
        assert_eq!(index.positions(a), &[0, 2]);
        assert_eq!(index.positions(b), &[1]);
        assert_eq!(index.times(a), &[1, 4]);
        assert_eq!(index.total(), 3);
    }

    #[test]
    fn empty_stream_has_empty_lists() {
        let index = TypeIndex::build(&EventStream::empty(3));
        assert_eq!(index.alphabet_size(), 3);
        assert!((0..3).all(|t| index.positions(EventType(t)).is_empty()));
        assert!(index.positions(EventType(7)).is_empty());
    }
}
