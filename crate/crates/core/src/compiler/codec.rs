use std::collections::BTreeMap;

use crate::automaton::{Alphabet, Symbol};

/// Smallest `e` with `base^e ≥ x`.
pub fn ceil_log(base: usize, x: usize) -> usize {
    assert!(base >= 2);
    let mut e = 0;
    let mut pow: u128 = 1;
    while pow < x as u128 {
        pow *= base as u128;
        e += 1;
    }
    e
}

/// Which code the accept and reject segments carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinkCode {
    /// An otherwise unused code, so no rule ever fires there.
    Spare(usize),
    /// The code space is full; the code of a key whose every cut overshoots
    /// the accept segment is reused.
    Reused(usize),
    /// Every node has its own code.
    NotNeeded,
}

impl SinkCode {
    pub fn index(&self) -> Option<usize> {
        match *self {
            SinkCode::Spare(k) | SinkCode::Reused(k) => Some(k),
            SinkCode::NotNeeded => None,
        }
    }
}

/// Maps segment keys to length-`S` code words and lays out full segments.
///
/// Plain codecs write the key index in base `|Σ|` and have segments of
/// length `S`. Marked codecs start every segment with the marker `ι`, write
/// the index in base `|Σ| − 1` over the other symbols and pad with a filler
/// up to length `m = D·k + 1 ≥ S`.
#[derive(Debug, Clone)]
pub struct SegmentCodec<K: Ord> {
    alphabet: Alphabet,
    marker: Option<Symbol>,
    filler: Symbol,
    sticky: usize,
    seg_len: usize,
    table: BTreeMap<K, usize>,
    sink: SinkCode,
}

impl<K: Ord + Clone> SegmentCodec<K> {
    pub fn plain(alphabet: Alphabet, sticky: usize, keys: impl IntoIterator<Item = K>) -> Self {
        SegmentCodec {
            alphabet,
            marker: None,
            filler: 0,
            sticky,
            seg_len: sticky,
            table: Self::number(keys),
            sink: SinkCode::NotNeeded,
        }
    }

    pub fn marked(
        alphabet: Alphabet,
        sticky: usize,
        range: usize,
        keys: impl IntoIterator<Item = K>,
    ) -> Self {
        assert!(alphabet.len() >= 3 && sticky >= 1 && range >= 1);
        SegmentCodec {
            alphabet,
            marker: Some(0),
            filler: 1,
            sticky,
            seg_len: marked_segment_len(sticky, range),
            table: Self::number(keys),
            sink: SinkCode::NotNeeded,
        }
    }

    fn number(keys: impl IntoIterator<Item = K>) -> BTreeMap<K, usize> {
        let mut table: BTreeMap<K, usize> = keys.into_iter().map(|k| (k, 0)).collect();
        for (idx, v) in table.values_mut().enumerate() {
            *v = idx;
        }
        table
    }

    /// Reserve the sink code: a spare index when one is left, otherwise the
    /// index of `fallback`, which must be a key.
    pub fn with_sink(mut self, fallback: &K) -> Self {
        let used = self.table.len();
        self.sink = if (used as u128) < self.capacity() {
            SinkCode::Spare(used)
        } else {
            SinkCode::Reused(
                *self
                    .table
                    .get(fallback)
                    .expect("a full code space contains every key"),
            )
        };
        self
    }

    pub fn sink(&self) -> SinkCode {
        self.sink
    }

    pub fn marker(&self) -> Option<Symbol> {
        self.marker
    }

    pub fn sticky(&self) -> usize {
        self.sticky
    }

    pub fn segment_len(&self) -> usize {
        self.seg_len
    }

    pub fn keys(&self) -> impl Iterator<Item = (&K, usize)> {
        self.table.iter().map(|(k, &v)| (k, v))
    }

    pub fn key_count(&self) -> usize {
        self.table.len()
    }

    pub fn index_of(&self, key: &K) -> usize {
        self.table[key]
    }

    fn digits(&self) -> (usize, usize) {
        match self.marker {
            None => (self.alphabet.len(), self.sticky),
            Some(_) => (self.alphabet.len() - 1, self.sticky - 1),
        }
    }

    /// Number of distinct code words.
    pub fn capacity(&self) -> u128 {
        let (base, len) = self.digits();
        (base as u128).checked_pow(len as u32).unwrap_or(u128::MAX)
    }

    /// Code word for an index, most significant digit first.
    pub fn code(&self, index: usize) -> Vec<Symbol> {
        assert!((index as u128) < self.capacity(), "code index out of range");
        let (base, len) = self.digits();
        let mut digits = vec![0usize; len];
        let mut rest = index;
        for d in digits.iter_mut().rev() {
            *d = rest % base;
            rest /= base;
        }
        let offset = self.marker.map_or(0, |_| 1);
        let mut out: Vec<Symbol> = self.marker.into_iter().collect();
        out.extend(digits.into_iter().map(|d| (d + offset) as Symbol));
        out
    }

    /// Full segment for an index.
    pub fn segment(&self, index: usize) -> Vec<Symbol> {
        let mut s = self.code(index);
        s.resize(self.seg_len, self.filler);
        s
    }
}

/// `m = D·k + 1` for the least `k ≥ 1` with `m ≥ S`.
pub fn marked_segment_len(sticky: usize, range: usize) -> usize {
    let k = sticky.saturating_sub(1).div_ceil(range).max(1);
    range * k + 1
}
