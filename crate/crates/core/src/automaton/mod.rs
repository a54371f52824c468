//! Benenson automata: a state string over a small alphabet that is cut from
//! the left by input-dependent rules `(i, b, ω, d)`.
//!
//! The semantics here are the reference ones every other module is checked
//! against: `step` is the one-cut relation, `reachable_offsets` its
//! reflexive-transitive closure from offset 0, and `run` the deterministic
//! walk that decides acceptance.

mod format;

pub use format::{parse_ben, write_ben};

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::ops::Range;

use thiserror::Error;

/// Index of a symbol inside its [`Alphabet`].
pub type Symbol = u8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("alphabet must have at least 2 distinct symbols, got {0:?}")]
    AlphabetTooSmall(String),
    #[error("alphabet contains duplicate symbol {0:?}")]
    DuplicateSymbol(char),
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(char),
    #[error("rule {rule}: {reason}")]
    InvalidRule { rule: String, reason: String },
    #[error("accept position {p} exceeds state length {len}")]
    AcceptOutOfRange { p: usize, len: usize },
    #[error("offset {offset} outside [0, {len}]")]
    InvalidOffset { offset: usize, len: usize },
    #[error("input has {got} bits, automaton expects {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("nondeterministic choice at offset {offset}: successors {successors:?}")]
    Nondeterministic {
        offset: usize,
        successors: Vec<usize>,
    },
}

/// Ordered set of distinct symbols. Symbol order defines the canonical
/// ordering of sticky ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: &str) -> Result<Self, AutomatonError> {
        let symbols: Vec<char> = symbols.chars().collect();
        for (k, c) in symbols.iter().enumerate() {
            if symbols[..k].contains(c) {
                return Err(AutomatonError::DuplicateSymbol(*c));
            }
        }
        if symbols.len() < 2 || symbols.len() > Symbol::MAX as usize {
            return Err(AutomatonError::AlphabetTooSmall(symbols.iter().collect()));
        }
        Ok(Alphabet { symbols })
    }

    pub fn dna() -> Self {
        Alphabet::new("ACGT").unwrap()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbol(&self, s: Symbol) -> char {
        self.symbols[s as usize]
    }

    pub fn index_of(&self, c: char) -> Result<Symbol, AutomatonError> {
        self.symbols
            .iter()
            .position(|&x| x == c)
            .map(|k| k as Symbol)
            .ok_or(AutomatonError::UnknownSymbol(c))
    }

    pub fn encode(&self, text: &str) -> Result<Vec<Symbol>, AutomatonError> {
        text.chars().map(|c| self.index_of(c)).collect()
    }

    pub fn decode(&self, word: &[Symbol]) -> String {
        word.iter().map(|&s| self.symbol(s)).collect()
    }

    pub fn chars(&self) -> &[char] {
        &self.symbols
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.symbols {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A cutting rule `(var, bit, sticky, dist)`: when the revealed sticky end is
/// `sticky` and input bit `var` (1-based) equals `bit`, cut `dist` symbols.
///
/// Field order gives the canonical ordering `(ω, i, b, d)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CuttingRule {
    pub sticky: Vec<Symbol>,
    pub var: usize,
    pub bit: bool,
    pub dist: usize,
}

impl CuttingRule {
    pub fn new(var: usize, bit: bool, sticky: Vec<Symbol>, dist: usize) -> Self {
        CuttingRule {
            sticky,
            var,
            bit,
            dist,
        }
    }

    /// The input-independent pair `(1,0,ω,d), (1,1,ω,d)`.
    pub fn input_independent(sticky: Vec<Symbol>, dist: usize) -> [CuttingRule; 2] {
        [
            CuttingRule::new(1, false, sticky.clone(), dist),
            CuttingRule::new(1, true, sticky, dist),
        ]
    }

    fn applies(&self, x: &[bool]) -> bool {
        x[self.var - 1] == self.bit
    }
}

/// Parameters of a Benenson automaton as a plain record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Params {
    pub n: usize,
    pub sticky: usize,
    pub range: usize,
    pub len: usize,
}

/// An `(S, D, L)`-Benenson automaton with `n` inputs and accept position `p`.
///
/// Rules are kept sorted in canonical order and deduplicated, so rules sharing
/// a sticky end form one contiguous block.
#[derive(Debug, Clone)]
pub struct BenensonAutomaton {
    alphabet: Alphabet,
    n: usize,
    sticky_size: usize,
    range: usize,
    state: Vec<Symbol>,
    rules: Vec<CuttingRule>,
    accept_pos: usize,
    by_sticky: HashMap<Vec<Symbol>, Range<usize>>,
}

impl PartialEq for BenensonAutomaton {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.n == other.n
            && self.sticky_size == other.sticky_size
            && self.range == other.range
            && self.state == other.state
            && self.rules == other.rules
            && self.accept_pos == other.accept_pos
    }
}

impl Eq for BenensonAutomaton {}

impl BenensonAutomaton {
    pub fn new(
        alphabet: Alphabet,
        n: usize,
        sticky_size: usize,
        range: usize,
        state: Vec<Symbol>,
        rules: impl IntoIterator<Item = CuttingRule>,
        accept_pos: usize,
    ) -> Result<Self, AutomatonError> {
        if let Some(&bad) = state.iter().find(|&&s| s as usize >= alphabet.len()) {
            return Err(AutomatonError::InvalidRule {
                rule: "state".into(),
                reason: format!("symbol index {bad} outside alphabet"),
            });
        }
        if accept_pos > state.len() {
            return Err(AutomatonError::AcceptOutOfRange {
                p: accept_pos,
                len: state.len(),
            });
        }
        let rules: BTreeSet<CuttingRule> = rules.into_iter().collect();
        for r in &rules {
            let reason = if r.sticky.len() != sticky_size {
                Some(format!(
                    "sticky end has length {}, S = {sticky_size}",
                    r.sticky.len()
                ))
            } else if r.dist == 0 || r.dist > range {
                Some(format!("distance {} outside [1, {range}]", r.dist))
            } else if r.var == 0 || r.var > n {
                Some(format!("variable {} outside [1, {n}]", r.var))
            } else if r.sticky.iter().any(|&s| s as usize >= alphabet.len()) {
                Some("sticky end uses a symbol outside the alphabet".to_string())
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(AutomatonError::InvalidRule {
                    rule: format!(
                        "({}, {}, {}, {})",
                        r.var,
                        r.bit as u8,
                        alphabet.decode(&r.sticky),
                        r.dist
                    ),
                    reason,
                });
            }
        }
        let rules: Vec<CuttingRule> = rules.into_iter().collect();
        let mut by_sticky: HashMap<Vec<Symbol>, Range<usize>> = HashMap::new();
        let mut start = 0;
        for k in 1..=rules.len() {
            if k == rules.len() || rules[k].sticky != rules[start].sticky {
                by_sticky.insert(rules[start].sticky.clone(), start..k);
                start = k;
            }
        }
        Ok(BenensonAutomaton {
            alphabet,
            n,
            sticky_size,
            range,
            state,
            rules,
            accept_pos,
            by_sticky,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sticky-end size `S`.
    pub fn sticky_size(&self) -> usize {
        self.sticky_size
    }

    /// Maximum cutting range `D`.
    pub fn range(&self) -> usize {
        self.range
    }

    /// State length `L`.
    pub fn len(&self) -> usize {
        self.state.len()
    }

    pub fn is_empty(&self) -> bool {
        self.state.is_empty()
    }

    pub fn state(&self) -> &[Symbol] {
        &self.state
    }

    pub fn rules(&self) -> &[CuttingRule] {
        &self.rules
    }

    pub fn accept_pos(&self) -> usize {
        self.accept_pos
    }

    pub fn params(&self) -> Params {
        Params {
            n: self.n,
            sticky: self.sticky_size,
            range: self.range,
            len: self.state.len(),
        }
    }

    /// Rules whose sticky end is exactly `omega`.
    pub fn rules_for(&self, omega: &[Symbol]) -> &[CuttingRule] {
        match self.by_sticky.get(omega) {
            Some(r) => &self.rules[r.clone()],
            None => &[],
        }
    }

    /// The sticky end revealed after cutting `j` symbols, if at least `S`
    /// symbols remain.
    pub fn sticky_end(&self, j: usize) -> Result<Option<&[Symbol]>, AutomatonError> {
        if j > self.len() {
            return Err(AutomatonError::InvalidOffset {
                offset: j,
                len: self.len(),
            });
        }
        Ok(self.state.get(j..j + self.sticky_size))
    }

    fn check_input(&self, x: &[bool]) -> Result<(), AutomatonError> {
        if x.len() != self.n {
            return Err(AutomatonError::InputLength {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Applicable rules at offset `j` under input `x`, restricted to cuts that
    /// stay within the state.
    fn applicable<'a>(
        &'a self,
        x: &'a [bool],
        j: usize,
    ) -> impl Iterator<Item = &'a CuttingRule> + 'a {
        let rules = match self.state.get(j..j + self.sticky_size) {
            Some(omega) => self.rules_for(omega),
            None => &[],
        };
        let len = self.len();
        rules
            .iter()
            .filter(move |r| r.applies(x) && j + r.dist <= len)
    }

    /// Offsets reachable from `j` in one cut. Empty means stuck.
    pub fn step(&self, x: &[bool], j: usize) -> Result<BTreeSet<usize>, AutomatonError> {
        self.check_input(x)?;
        if j > self.len() {
            return Err(AutomatonError::InvalidOffset {
                offset: j,
                len: self.len(),
            });
        }
        Ok(self.applicable(x, j).map(|r| j + r.dist).collect())
    }

    /// Deterministic run from offset 0 until stuck or at/after `p`.
    pub fn run(&self, x: &[bool]) -> Result<CutTrace, AutomatonError> {
        self.check_input(x)?;
        let mut offsets = vec![0];
        let mut applied = Vec::new();
        let mut j = 0;
        while j < self.accept_pos {
            let mut next: Option<&CuttingRule> = None;
            for r in self.applicable(x, j) {
                match next {
                    Some(prev) if prev.dist != r.dist => {
                        let successors: BTreeSet<usize> =
                            self.applicable(x, j).map(|r| j + r.dist).collect();
                        return Err(AutomatonError::Nondeterministic {
                            offset: j,
                            successors: successors.into_iter().collect(),
                        });
                    }
                    Some(_) => {}
                    None => next = Some(r),
                }
            }
            let Some(rule) = next else { break };
            j += rule.dist;
            offsets.push(j);
            applied.push(rule.clone());
        }
        Ok(CutTrace {
            accepted: j == self.accept_pos,
            offsets,
            applied,
        })
    }

    /// Convenience wrapper: does `x` drive the automaton to `p`?
    pub fn accepts(&self, x: &[bool]) -> Result<bool, AutomatonError> {
        Ok(self.run(x)?.accepted)
    }

    /// Least set of offsets containing 0 and closed under `step`. Works for
    /// nondeterministic automata.
    pub fn reachable_offsets(&self, x: &[bool]) -> Result<BTreeSet<usize>, AutomatonError> {
        self.check_input(x)?;
        let mut seen = vec![false; self.len() + 1];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(j) = queue.pop_front() {
            for r in self.applicable(x, j) {
                let k = j + r.dist;
                if !seen[k] {
                    seen[k] = true;
                    queue.push_back(k);
                }
            }
        }
        Ok(seen
            .iter()
            .enumerate()
            .filter_map(|(k, &s)| s.then_some(k))
            .collect())
    }

    /// Every pair of rules violating determinism: same sticky end, different
    /// distances, and not the two bits of one variable.
    pub fn check_determinism(&self) -> Vec<(CuttingRule, CuttingRule)> {
        let mut out = Vec::new();
        for range in self.sticky_blocks() {
            let block = &self.rules[range];
            for (a_idx, a) in block.iter().enumerate() {
                for b in &block[a_idx + 1..] {
                    if a.dist != b.dist && !(a.var == b.var && a.bit != b.bit) {
                        out.push((a.clone(), b.clone()));
                    }
                }
            }
        }
        out
    }

    pub fn is_deterministic(&self) -> bool {
        self.check_determinism().is_empty()
    }

    /// Largest number, over variables `i`, of sticky ends with rules
    /// `(i,0,ω,d)` and `(i,1,ω,d')` where `d != d'`.
    pub fn sparseness(&self) -> usize {
        let mut per_var: HashMap<usize, usize> = HashMap::new();
        for range in self.sticky_blocks() {
            let block = &self.rules[range];
            let mut reading: BTreeSet<usize> = BTreeSet::new();
            for a in block.iter().filter(|r| !r.bit) {
                if block
                    .iter()
                    .any(|b| b.bit && b.var == a.var && b.dist != a.dist)
                {
                    reading.insert(a.var);
                }
            }
            for v in reading {
                *per_var.entry(v).or_default() += 1;
            }
        }
        per_var.values().copied().max().unwrap_or(0)
    }

    fn sticky_blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        let mut blocks: Vec<Range<usize>> = self.by_sticky.values().cloned().collect();
        blocks.sort_by_key(|r| r.start);
        blocks.into_iter()
    }
}

/// The chain of offsets visited by [`BenensonAutomaton::run`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutTrace {
    pub offsets: Vec<usize>,
    pub applied: Vec<CuttingRule>,
    pub accepted: bool,
}

impl CutTrace {
    pub fn last_offset(&self) -> usize {
        *self.offsets.last().unwrap()
    }
}

/// Bit vector for index `idx` of the lexicographic enumeration of `{0,1}^n`:
/// `x_1` is the most significant bit.
pub fn bits_of(idx: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| (idx >> (n - 1 - i)) & 1 == 1).collect()
}

/// Parse a `0101`-style bit string.
pub fn parse_bits(text: &str) -> Option<Vec<bool>> {
    text.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

pub fn format_bits(x: &[bool]) -> String {
    x.iter().map(|&b| if b { '1' } else { '0' }).collect()
}
