//! Branching programs to Benenson automata.
//!
//! Every construction lays the state string out as a sequence of segments,
//! one per program node (two per node for [`compile_sparse1`]), and emits
//! rules keyed by each segment's code word. Layered programs get a segment
//! for every node of the terminal layer too; the accept node is moved to the
//! last terminal position when possible, so rejecting runs stop at least one
//! segment before the accept position.

mod codec;

pub use codec::{ceil_log, marked_segment_len, SegmentCodec, SinkCode};

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::automaton::{Alphabet, AutomatonError, BenensonAutomaton, CuttingRule, Symbol};
use crate::machines::{GeneralBp, LayerNode, LayeredBp, MachineError, PermutationBp};
use crate::perm::Perm;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("alphabet has {0} symbols, this construction needs at least 3")]
    UnsupportedAlphabet(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    General,
    FixedWidth,
    FixedWidthConstD,
    Permutation,
    Sparse1,
}

impl Construction {
    pub const ALL: [Construction; 5] = [
        Construction::General,
        Construction::FixedWidth,
        Construction::FixedWidthConstD,
        Construction::Permutation,
        Construction::Sparse1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Construction::General => "general",
            Construction::FixedWidth => "fixed",
            Construction::FixedWidthConstD => "fixed-constd",
            Construction::Permutation => "perm",
            Construction::Sparse1 => "sparse1",
        }
    }

    pub fn from_name(name: &str) -> Option<Construction> {
        Construction::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Whether the construction uses marked segments and skip rules.
    pub fn is_marked(&self) -> bool {
        matches!(
            self,
            Construction::FixedWidthConstD | Construction::Permutation | Construction::Sparse1
        )
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which skip rules a marked layout gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SkipRules {
    /// One per non-aligned window that occurs in the state string.
    #[default]
    Occurring,
    /// One per length-`S` word not starting with the marker.
    Exhaustive,
}

/// `(S, D, L)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sdl {
    pub s: usize,
    pub d: usize,
    pub l: usize,
}

/// Size parameters of the program a construction was given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProgramShape {
    pub n: usize,
    /// Total node count, terminal layer included.
    pub nodes: usize,
    /// `(J, K)` for layered programs, `K` counting reading layers.
    pub layered: Option<(usize, usize)>,
}

/// Parameters a construction should produce for a program shape and
/// alphabet size, with the length figure that uses `S` in place
/// of the segment length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formula {
    pub sdl: Sdl,
    pub segment_len: usize,
    pub s_based_len: usize,
    pub sparseness_bound: usize,
}

pub fn formula(c: Construction, shape: &ProgramShape, sigma: usize) -> Formula {
    let n = shape.n;
    if c == Construction::General {
        let h = shape.nodes;
        let s = ceil_log(sigma, h);
        return Formula {
            sdl: Sdl {
                s,
                d: (h - 1) * s,
                l: h * s,
            },
            segment_len: s,
            s_based_len: h * s,
            sparseness_bound: h,
        };
    }
    let (j, k) = shape.layered.expect("layered construction");
    let w = 2 * j - 1;
    let node_layers = k + 1;
    let (s, d, per_node, bound) = match c {
        Construction::FixedWidth => {
            let s = ceil_log(sigma, n * w * w);
            (s, w * s, 1, w * w)
        }
        Construction::FixedWidthConstD => (1 + ceil_log(sigma - 1, n * w * w), w, 1, w * w),
        Construction::Permutation => (1 + ceil_log(sigma - 1, n * w), w, 1, w),
        Construction::Sparse1 => (1 + ceil_log(sigma - 1, n + w), (4 * j - 3).max(2 * j), 2, 1),
        Construction::General => unreachable!(),
    };
    let m = if c.is_marked() {
        marked_segment_len(s, d)
    } else {
        s
    };
    Formula {
        sdl: Sdl {
            s,
            d,
            l: per_node * node_layers * j * m,
        },
        segment_len: m,
        s_based_len: per_node * node_layers * j * s,
        sparseness_bound: bound,
    }
}

/// What a compilation produced, next to what the construction's formulas
/// predict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompilationReport {
    pub construction: Construction,
    pub shape: ProgramShape,
    pub alphabet_size: usize,
    pub produced: Sdl,
    pub formula: Formula,
    pub segment_len: usize,
    pub segment_types: usize,
    pub sink: SinkCode,
    pub accept_pos: usize,
    pub accept_relocated: bool,
    /// Rejecting runs halt on a rule-free segment before the accept segment.
    pub reject_convention: bool,
    pub sparseness: usize,
    pub skip_rules: usize,
    pub segment_map: Vec<(String, usize)>,
}

impl CompilationReport {
    pub fn to_text(&self, with_map: bool) -> String {
        let yn = |b: bool| if b { "yes" } else { "no" };
        let mut out = String::new();
        let f = &self.formula;
        let _ = writeln!(out, "construction {}", self.construction);
        let _ = write!(
            out,
            "inputs {} nodes {} alphabet {}",
            self.shape.n, self.shape.nodes, self.alphabet_size
        );
        if let Some((j, k)) = self.shape.layered {
            let _ = write!(out, " width {j} length {k}");
        }
        out.push('\n');
        let _ = writeln!(out, "S {} formula {}", self.produced.s, f.sdl.s);
        let _ = writeln!(out, "D {} formula {}", self.produced.d, f.sdl.d);
        let _ = writeln!(
            out,
            "L {} formula {} s_based {}",
            self.produced.l, f.sdl.l, f.s_based_len
        );
        let sink = match self.sink {
            SinkCode::Spare(_) => "spare",
            SinkCode::Reused(_) => "reused",
            SinkCode::NotNeeded => "none",
        };
        let _ = writeln!(
            out,
            "segment_length {} segments {} types {} sink {sink}",
            self.segment_len,
            self.segment_map.len(),
            self.segment_types
        );
        let _ = writeln!(
            out,
            "accept_pos {} relocated {} reject_convention {}",
            self.accept_pos,
            yn(self.accept_relocated),
            yn(self.reject_convention)
        );
        let _ = writeln!(
            out,
            "sparseness {} bound {}",
            self.sparseness, f.sparseness_bound
        );
        let _ = writeln!(out, "skip_rules {}", self.skip_rules);
        if with_map {
            for (label, off) in &self.segment_map {
                let _ = writeln!(out, "segment {label} {off}");
            }
        }
        out
    }

    pub fn matches_formula(&self) -> bool {
        self.produced == self.formula.sdl && self.sparseness <= self.formula.sparseness_bound
    }
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub automaton: BenensonAutomaton,
    pub report: CompilationReport,
}

/// A segment layout waiting to be turned into a state string.
struct Layout {
    construction: Construction,
    shape: ProgramShape,
    alphabet: Alphabet,
    sticky: usize,
    range: usize,
    seg_len: usize,
    marker: Option<Symbol>,
    segments: Vec<(String, Vec<Symbol>)>,
    rules: Vec<CuttingRule>,
    accept_segment: usize,
    segment_types: usize,
    sink: SinkCode,
    accept_relocated: bool,
    reject_convention: bool,
}

fn assemble(lay: Layout, skip: SkipRules) -> Result<Compiled, CompileError> {
    let mut state = Vec::with_capacity(lay.segments.len() * lay.seg_len);
    let mut segment_map = Vec::with_capacity(lay.segments.len());
    for (label, seg) in &lay.segments {
        segment_map.push((label.clone(), state.len()));
        state.extend_from_slice(seg);
    }
    let len = state.len();
    let mut rules = lay.rules;
    let mut skip_rules = 0;
    if let Some(iota) = lay.marker {
        let windows: BTreeSet<Vec<Symbol>> = match skip {
            SkipRules::Occurring => (0..len.saturating_sub(lay.sticky) + 1)
                .filter(|o| o % lay.seg_len != 0 && o + lay.sticky <= len)
                .map(|o| state[o..o + lay.sticky].to_vec())
                .collect(),
            SkipRules::Exhaustive => all_words(lay.alphabet.len(), lay.sticky)?
                .into_iter()
                .filter(|w| w[0] != iota)
                .collect(),
        };
        skip_rules = windows.len();
        for w in windows {
            debug_assert_ne!(w[0], iota);
            rules.extend(CuttingRule::input_independent(w, lay.range));
        }
    }
    let accept_pos = lay.accept_segment * lay.seg_len;
    let automaton = BenensonAutomaton::new(
        lay.alphabet.clone(),
        lay.shape.n,
        lay.sticky,
        lay.range,
        state,
        rules,
        accept_pos,
    )?;
    let report = CompilationReport {
        construction: lay.construction,
        shape: lay.shape,
        alphabet_size: lay.alphabet.len(),
        produced: Sdl {
            s: lay.sticky,
            d: lay.range,
            l: len,
        },
        formula: formula(lay.construction, &lay.shape, lay.alphabet.len()),
        segment_len: lay.seg_len,
        segment_types: lay.segment_types,
        sink: lay.sink,
        accept_pos,
        accept_relocated: lay.accept_relocated,
        reject_convention: lay.reject_convention,
        sparseness: automaton.sparseness(),
        skip_rules,
        segment_map,
    };
    Ok(Compiled { automaton, report })
}

fn all_words(sigma: usize, len: usize) -> Result<Vec<Vec<Symbol>>, CompileError> {
    let count = (sigma as u128).pow(len as u32);
    if count > 1 << 20 {
        return Err(CompileError::Precondition(format!(
            "exhaustive skip rules would need {count} words"
        )));
    }
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w: Vec<Symbol>| {
                (0..sigma as Symbol).map(move |s| {
                    let mut w = w.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    Ok(out)
}

fn require_marked_alphabet(alphabet: &Alphabet) -> Result<(), CompileError> {
    if alphabet.len() < 3 {
        return Err(CompileError::UnsupportedAlphabet(alphabet.len()));
    }
    Ok(())
}

/// General program: one segment of length `S` per node, the node index as
/// code word, and rules `(var(q), b, σ_q, (goto_b(q) − q)·S)`.
///
/// The program is topologically indexed, reduced to one accept node and the
/// accept node is moved last when needed.
pub fn compile_general(bp: &GeneralBp, alphabet: &Alphabet) -> Result<Compiled, CompileError> {
    let mut prep = bp.clone();
    let mut relocated = false;
    if !prep.is_topologically_indexed() {
        prep = prep.topo_index()?;
        relocated = true;
    }
    if prep.accept_nodes().len() != 1 {
        prep = prep.normalize_single_accept()?;
        relocated = true;
    }
    let (prep, moved) = prep.relocate_accept_last()?;
    relocated |= moved;
    let h = prep.len();
    let shape = ProgramShape {
        n: prep.n(),
        nodes: h,
        layered: None,
    };
    let s = ceil_log(alphabet.len(), h);
    let codec = SegmentCodec::plain(alphabet.clone(), s, 0..h);
    let mut rules = Vec::new();
    for (q, node) in prep.nodes().iter().enumerate() {
        if let crate::machines::BpNode::Var { var, goto0, goto1 } = *node {
            for (bit, target) in [(false, goto0), (true, goto1)] {
                rules.push(CuttingRule::new(var, bit, codec.code(q), (target - q) * s));
            }
        }
    }
    let segments = (0..h)
        .map(|q| (format!("q{}", q + 1), codec.segment(q)))
        .collect();
    assemble(
        Layout {
            construction: Construction::General,
            shape,
            alphabet: alphabet.clone(),
            sticky: s,
            range: (h - 1) * s,
            seg_len: s,
            marker: None,
            segments,
            rules,
            accept_segment: h - 1,
            segment_types: h,
            sink: SinkCode::NotNeeded,
            accept_relocated: relocated,
            reject_convention: true,
        },
        SkipRules::Occurring,
    )
}

/// Layered program with every accepting terminal merged into the last
/// terminal position. Returns whether anything moved.
pub fn place_accept_last(bp: &LayeredBp) -> Result<(LayeredBp, bool), CompileError> {
    let j = bp.width();
    if bp.length() == 0 {
        return Err(CompileError::Precondition(
            "program has no reading layer".into(),
        ));
    }
    if bp.accept() == [j - 1] {
        return Ok((bp.clone(), false));
    }
    if j == 1 {
        return Err(CompileError::Precondition(
            "width-1 program without an accepting node".into(),
        ));
    }
    let target = |t: usize| {
        if bp.accept().contains(&t) {
            j - 1
        } else if t == j - 1 {
            0
        } else {
            t
        }
    };
    let mut layers = bp.layers().to_vec();
    for nd in layers.last_mut().unwrap() {
        nd.goto0 = target(nd.goto0);
        nd.goto1 = target(nd.goto1);
    }
    Ok((LayeredBp::new(bp.n(), j, layers, vec![j - 1])?, true))
}

fn layered_shape(bp: &LayeredBp) -> ProgramShape {
    ProgramShape {
        n: bp.n(),
        nodes: (bp.length() + 1) * bp.width(),
        layered: Some((bp.width(), bp.length())),
    }
}

fn label(k: usize, j: usize) -> String {
    format!("L{}N{}", k + 1, j + 1)
}

/// Segments for the nodes of a layered program in index order, the terminal
/// layer carrying the sink code.
fn layered_segments<K: Ord + Clone>(
    codec: &SegmentCodec<K>,
    layers: &[Vec<LayerNode>],
    width: usize,
    key: impl Fn(usize, &LayerNode) -> K,
) -> Vec<(String, Vec<Symbol>)> {
    let mut out = Vec::with_capacity((layers.len() + 1) * width);
    for (k, layer) in layers.iter().enumerate() {
        for (j, nd) in layer.iter().enumerate() {
            out.push((label(k, j), codec.segment(codec.index_of(&key(j, nd)))));
        }
    }
    let sink = codec.sink().index().expect("sink reserved");
    for j in 0..width {
        out.push((label(layers.len(), j), codec.segment(sink)));
    }
    out
}

fn compile_fixed(
    bp: &LayeredBp,
    alphabet: &Alphabet,
    marked: bool,
    skip: SkipRules,
) -> Result<Compiled, CompileError> {
    if marked {
        require_marked_alphabet(alphabet)?;
    }
    let (prep, relocated) = place_accept_last(bp)?;
    let j = prep.width();
    let w = 2 * j - 1;
    let n = prep.n();
    let key = |pos: usize, nd: &LayerNode| (nd.var, j + nd.goto0 - pos, j + nd.goto1 - pos);
    let keys: BTreeSet<_> = prep
        .layers()
        .iter()
        .flat_map(|layer| layer.iter().enumerate().map(move |(p, nd)| key(p, nd)))
        .collect();
    let fallback = (1, w, w);
    let (s, d, unit, codec) = if marked {
        let s = 1 + ceil_log(alphabet.len() - 1, n * w * w);
        let codec = SegmentCodec::marked(alphabet.clone(), s, w, keys);
        (s, w, 1, codec.with_sink(&fallback))
    } else {
        let s = ceil_log(alphabet.len(), n * w * w);
        let codec = SegmentCodec::plain(alphabet.clone(), s, keys);
        (s, w * s, s, codec.with_sink(&fallback))
    };
    let mut rules = Vec::new();
    if unit > 0 {
        for (&(var, d0, d1), idx) in codec.keys() {
            rules.push(CuttingRule::new(var, false, codec.code(idx), d0 * unit));
            rules.push(CuttingRule::new(var, true, codec.code(idx), d1 * unit));
        }
    }
    let segments = layered_segments(&codec, prep.layers(), j, key);
    let k = prep.length();
    assemble(
        Layout {
            construction: if marked {
                Construction::FixedWidthConstD
            } else {
                Construction::FixedWidth
            },
            shape: layered_shape(&prep),
            alphabet: alphabet.clone(),
            sticky: s,
            range: d,
            seg_len: codec.segment_len(),
            marker: codec.marker(),
            segments,
            rules,
            accept_segment: k * j + j - 1,
            segment_types: codec.key_count(),
            sink: codec.sink(),
            accept_relocated: relocated,
            reject_convention: matches!(codec.sink(), SinkCode::Spare(_)),
        },
        skip,
    )
}

/// Width-`J` layered program with segments of length `S` keyed by
/// `(i, Δq₀, Δq₁)` and cuts of `Δq·S` symbols.
pub fn compile_fixed_width(bp: &LayeredBp, alphabet: &Alphabet) -> Result<Compiled, CompileError> {
    compile_fixed(bp, alphabet, false, SkipRules::Occurring)
}

/// Width-`J` layered program with cutting range `2J − 1`: marked segments
/// keyed by `(i, Δq₀, Δq₁)`, segment rules cutting `Δq` symbols and skip
/// rules cutting `D` on every non-aligned window.
pub fn compile_fixed_width_constd(
    bp: &LayeredBp,
    alphabet: &Alphabet,
    skip: SkipRules,
) -> Result<Compiled, CompileError> {
    compile_fixed(bp, alphabet, true, skip)
}

/// Permutation program prepared for the marked constructions: 0-edges must be
/// the identity. The accept node is moved to the last terminal position by a
/// uniform relabeling, which is impossible when it sits at position 0.
fn prepare_permutation(pbp: &PermutationBp) -> Result<(PermutationBp, bool, bool), CompileError> {
    if !pbp.is_goto0_identity() {
        return Err(CompileError::Precondition(
            "goto0 must be the identity in every layer; normalize first".into(),
        ));
    }
    if pbp.length() == 0 {
        return Err(CompileError::Precondition(
            "program has no reading layer".into(),
        ));
    }
    let j = pbp.width();
    let a = pbp.accept_node();
    if a == j - 1 {
        Ok((pbp.clone(), false, true))
    } else if a == 0 {
        Ok((pbp.clone(), false, false))
    } else {
        let swap = Perm::from_cycles(j, &[&[a + 1, j]]);
        Ok((pbp.relabel_uniform(&swap), true, true))
    }
}

/// Width-`J` permutation program with identity 0-edges: segments keyed by
/// `(i, Δq₁)`, rules `(i, 0, ω, J)` and `(i, 1, ω, Δq₁)`.
pub fn compile_permutation(
    pbp: &PermutationBp,
    alphabet: &Alphabet,
    skip: SkipRules,
) -> Result<Compiled, CompileError> {
    require_marked_alphabet(alphabet)?;
    let (prep, relocated, accept_last) = prepare_permutation(pbp)?;
    let j = prep.width();
    let w = 2 * j - 1;
    let n = prep.n();
    let layers = prep.as_layered().layers();
    let key = |pos: usize, nd: &LayerNode| (nd.var, j + nd.goto1 - pos);
    let keys: BTreeSet<_> = layers
        .iter()
        .flat_map(|layer| layer.iter().enumerate().map(move |(p, nd)| key(p, nd)))
        .collect();
    let s = 1 + ceil_log(alphabet.len() - 1, n * w);
    let codec = SegmentCodec::marked(alphabet.clone(), s, w, keys).with_sink(&(1, w));
    let mut rules = Vec::new();
    for (&(var, d1), idx) in codec.keys() {
        rules.push(CuttingRule::new(var, false, codec.code(idx), j));
        rules.push(CuttingRule::new(var, true, codec.code(idx), d1));
    }
    let segments = layered_segments(&codec, layers, j, key);
    assemble(
        Layout {
            construction: Construction::Permutation,
            shape: layered_shape(prep.as_layered()),
            alphabet: alphabet.clone(),
            sticky: s,
            range: w,
            seg_len: codec.segment_len(),
            marker: codec.marker(),
            segments,
            rules,
            accept_segment: prep.length() * j + prep.accept_node(),
            segment_types: codec.key_count(),
            sink: codec.sink(),
            accept_relocated: relocated,
            reject_convention: accept_last && matches!(codec.sink(), SinkCode::Spare(_)),
        },
        skip,
    )
}

/// Segment types of the 1-sparse layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sparse1Key {
    /// Reading segment for variable `i`.
    Read(usize),
    /// Skip segment forwarding `2Δ − 1` segments.
    Skip(usize),
}

/// Width-`J` permutation program with identity 0-edges as a 1-sparse
/// automaton: every node gets a reading segment (`x_i = 0` skips `2J`
/// segments, `x_i = 1` moves to the next one) followed by a skip segment
/// forwarding `2Δq₁ − 1` segments.
pub fn compile_sparse1(
    pbp: &PermutationBp,
    alphabet: &Alphabet,
    skip: SkipRules,
) -> Result<Compiled, CompileError> {
    require_marked_alphabet(alphabet)?;
    let (prep, relocated, accept_last) = prepare_permutation(pbp)?;
    let j = prep.width();
    let w = 2 * j - 1;
    let n = prep.n();
    let d = (4 * j - 3).max(2 * j);
    let layers = prep.as_layered().layers();
    let keys: BTreeSet<Sparse1Key> = layers
        .iter()
        .flat_map(|layer| {
            layer.iter().enumerate().flat_map(move |(p, nd)| {
                [Sparse1Key::Read(nd.var), Sparse1Key::Skip(j + nd.goto1 - p)]
            })
        })
        .collect();
    let s = 1 + ceil_log(alphabet.len() - 1, n + w);
    let codec = SegmentCodec::marked(alphabet.clone(), s, d, keys).with_sink(&Sparse1Key::Skip(w));
    let mut rules = Vec::new();
    for (&key, idx) in codec.keys() {
        let code = codec.code(idx);
        match key {
            Sparse1Key::Read(var) => {
                rules.push(CuttingRule::new(var, false, code.clone(), 2 * j));
                rules.push(CuttingRule::new(var, true, code, 1));
            }
            Sparse1Key::Skip(delta) => {
                rules.extend(CuttingRule::input_independent(code, 2 * delta - 1));
            }
        }
    }
    let sink = codec.segment(codec.sink().index().expect("sink reserved"));
    let mut segments = Vec::with_capacity(2 * (layers.len() + 1) * j);
    for (k, layer) in layers.iter().enumerate() {
        for (p, nd) in layer.iter().enumerate() {
            let read = codec.segment(codec.index_of(&Sparse1Key::Read(nd.var)));
            let fwd = codec.segment(codec.index_of(&Sparse1Key::Skip(j + nd.goto1 - p)));
            segments.push((format!("{}r", label(k, p)), read));
            segments.push((format!("{}s", label(k, p)), fwd));
        }
    }
    for p in 0..j {
        segments.push((format!("{}r", label(layers.len(), p)), sink.clone()));
        segments.push((format!("{}s", label(layers.len(), p)), sink.clone()));
    }
    assemble(
        Layout {
            construction: Construction::Sparse1,
            shape: layered_shape(prep.as_layered()),
            alphabet: alphabet.clone(),
            sticky: s,
            range: d,
            seg_len: codec.segment_len(),
            marker: codec.marker(),
            segments,
            rules,
            accept_segment: 2 * (prep.length() * j + prep.accept_node()),
            segment_types: codec.key_count(),
            sink: codec.sink(),
            accept_relocated: relocated,
            reject_convention: accept_last && matches!(codec.sink(), SinkCode::Spare(_)),
        },
        skip,
    )
}

#[cfg(test)]
mod tests;
