//! Automata back to circuits.
//!
//! The state string is cut into segments of length `D`. For each segment a
//! table records, for every entry offset `j`, the last offset the automaton
//! reaches in the following segment. Tables depend on few input bits, so
//! each is produced by a selector over hardwired values (gadget A). A
//! balanced tree of composition gadgets (B) folds them together and a final
//! comparison (C) checks that the composed table sends 0 to the accept
//! offset.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::automaton::BenensonAutomaton;
use crate::machines::{Circuit, CircuitBuilder, Wire};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    #[error("automaton is nondeterministic; extraction needs a deterministic automaton")]
    Nondeterministic,
    #[error("segment {q} outside [1, {segments}]")]
    SegmentOutOfRange { q: usize, segments: usize },
    #[error("input has {got} bits, automaton expects {expected}")]
    InputLength { expected: usize, got: usize },
}

/// A function `{0..D−1, ⊥} → {0..D−1, ⊥}` stored as `D` rows; `None` is ⊥.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhiTable {
    rows: Vec<Option<usize>>,
}

impl PhiTable {
    pub fn new(rows: Vec<Option<usize>>) -> Self {
        let d = rows.len();
        assert!(
            rows.iter().flatten().all(|&h| h < d),
            "row value out of range"
        );
        PhiTable { rows }
    }

    pub fn identity(d: usize) -> Self {
        PhiTable {
            rows: (0..d).map(Some).collect(),
        }
    }

    pub fn bottom(d: usize) -> Self {
        PhiTable {
            rows: vec![None; d],
        }
    }

    pub fn range(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Option<usize>] {
        &self.rows
    }

    pub fn apply(&self, j: Option<usize>) -> Option<usize> {
        j.and_then(|j| self.rows[j])
    }

    /// Bits per row: `⌈log₂(D + 1)⌉`.
    pub fn row_bits(d: usize) -> usize {
        (usize::BITS - d.leading_zeros()) as usize
    }

    /// Rows in order, each most significant bit first, ⊥ written as `D`.
    pub fn encode(&self) -> Vec<bool> {
        let d = self.range();
        let w = Self::row_bits(d);
        self.rows
            .iter()
            .flat_map(|r| {
                let v = r.unwrap_or(d);
                (0..w).rev().map(move |b| v >> b & 1 == 1)
            })
            .collect()
    }

    /// Inverse of [`encode`](Self::encode); any row value `≥ D` reads as ⊥.
    pub fn decode(bits: &[bool], d: usize) -> Self {
        let w = Self::row_bits(d);
        assert_eq!(bits.len(), d * w);
        let rows = bits
            .chunks(w)
            .map(|row| {
                let v = row.iter().fold(0, |acc, &b| acc << 1 | b as usize);
                (v < d).then_some(v)
            })
            .collect();
        PhiTable { rows }
    }
}

/// Row `j` of the result is `second(first(j))`, ⊥ absorbing.
pub fn compose_tables(first: &PhiTable, second: &PhiTable) -> PhiTable {
    assert_eq!(first.range(), second.range());
    PhiTable {
        rows: first.rows.iter().map(|&r| second.apply(r)).collect(),
    }
}

/// Number of length-`D` segments, the last one possibly shorter.
pub fn segment_count(aut: &BenensonAutomaton) -> usize {
    aut.len().div_ceil(aut.range().max(1))
}

/// Table of segment `q` (1-based) for input `x`: row `j` is the largest `h`
/// such that offset `q·D + h` is reachable from offset `(q−1)·D + j`.
pub fn compute_phi(
    aut: &BenensonAutomaton,
    q: usize,
    x: &[bool],
) -> Result<PhiTable, ExtractError> {
    phi_with_cap(aut, q, x, aut.len())
}

/// As [`compute_phi`], with every cut that lands past `cap` disallowed.
pub fn compute_phi_capped(
    aut: &BenensonAutomaton,
    q: usize,
    x: &[bool],
    cap: usize,
) -> Result<PhiTable, ExtractError> {
    phi_with_cap(aut, q, x, cap)
}

fn phi_with_cap(
    aut: &BenensonAutomaton,
    q: usize,
    x: &[bool],
    cap: usize,
) -> Result<PhiTable, ExtractError> {
    let d = aut.range();
    let segments = segment_count(aut);
    if q == 0 || q > segments {
        return Err(ExtractError::SegmentOutOfRange { q, segments });
    }
    if x.len() != aut.n() {
        return Err(ExtractError::InputLength {
            expected: aut.n(),
            got: x.len(),
        });
    }
    let next = q * d;
    let end = next + d;
    let limit = cap.min(aut.len());
    let rows = (0..d)
        .map(|j| {
            let start = (q - 1) * d + j;
            if start > limit {
                return None;
            }
            let mut seen = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(o) = queue.pop_front() {
                for t in aut.step(x, o).expect("offset and input validated") {
                    if t < end && t <= limit && seen.insert(t) {
                        queue.push_back(t);
                    }
                }
            }
            seen.range(next..end).next_back().map(|o| o - next)
        })
        .collect();
    Ok(PhiTable { rows })
}

/// Input variables that can change which cuts happen at offsets in
/// `[lo, hi)`: variable `i` counts at sticky end `ω` when, for some `d`,
/// exactly one of `(i, 0, ω, d)` and `(i, 1, ω, d)` is a rule.
pub fn relevant_vars(aut: &BenensonAutomaton, lo: usize, hi: usize) -> Vec<usize> {
    let mut out = BTreeSet::new();
    for o in lo..hi.min(aut.len() + 1) {
        let Ok(Some(omega)) = aut.sticky_end(o) else {
            continue;
        };
        let rules = aut.rules_for(omega);
        for r in rules {
            let twin = rules
                .iter()
                .any(|t| t.var == r.var && t.dist == r.dist && t.bit != r.bit);
            if !twin {
                out.insert(r.var);
            }
        }
    }
    out.into_iter().collect()
}

/// Assignment number `idx` of `vars` (first variable most significant)
/// spread into a full input vector with every other bit 0.
fn spread(n: usize, vars: &[usize], idx: usize) -> Vec<bool> {
    let mut x = vec![false; n];
    for (t, &v) in vars.iter().enumerate() {
        x[v - 1] = idx >> (vars.len() - 1 - t) & 1 == 1;
    }
    x
}

fn constant_bits(b: &mut CircuitBuilder, bits: &[bool]) -> Vec<Wire> {
    bits.iter().map(|&v| b.constant(v)).collect()
}

/// Gadget A for segment `q`: the encoding of its table as a function of the
/// relevant variables, one selector per output bit.
pub fn build_gadget_a(
    b: &mut CircuitBuilder,
    aut: &BenensonAutomaton,
    q: usize,
    cap: usize,
) -> Result<(Vec<Wire>, Vec<usize>), ExtractError> {
    let d = aut.range();
    let vars = relevant_vars(aut, (q - 1) * d, (q + 1) * d);
    let encodings: Vec<Vec<bool>> = (0..1usize << vars.len())
        .map(|idx| {
            compute_phi_capped(aut, q, &spread(aut.n(), &vars, idx), cap).map(|t| t.encode())
        })
        .collect::<Result<_, _>>()?;
    let sel: Vec<Wire> = vars.iter().map(|&v| b.input(v)).collect();
    let fill = b.constant(false);
    let out = (0..encodings[0].len())
        .map(|bit| {
            let leaves: Vec<Wire> = encodings.iter().map(|e| b.constant(e[bit])).collect();
            b.select(&sel, &leaves, fill)
        })
        .collect();
    Ok((out, vars))
}

/// Gadget B: encoding of `compose_tables(first, second)` from the encodings
/// of `first` and `second`.
pub fn build_gadget_b(
    b: &mut CircuitBuilder,
    d: usize,
    first: &[Wire],
    second: &[Wire],
) -> Vec<Wire> {
    let w = PhiTable::row_bits(d);
    let bottom: Vec<bool> = (0..w).rev().map(|k| d >> k & 1 == 1).collect();
    let bottom = constant_bits(b, &bottom);
    let mut out = Vec::with_capacity(d * w);
    for j in 0..d {
        let sel = &first[j * w..(j + 1) * w];
        for bit in 0..w {
            let leaves: Vec<Wire> = (0..d).map(|h| second[h * w + bit]).collect();
            out.push(b.select(sel, &leaves, bottom[bit]));
        }
    }
    out
}

/// Gadget C: 1 iff row 0 of the encoded table equals `j_star`.
pub fn build_gadget_c(b: &mut CircuitBuilder, d: usize, table: &[Wire], j_star: usize) -> Wire {
    let w = PhiTable::row_bits(d);
    let lits: Vec<Wire> = (0..w)
        .map(|k| {
            let want = j_star >> (w - 1 - k) & 1 == 1;
            if want {
                table[k]
            } else {
                b.not(table[k])
            }
        })
        .collect();
    b.and_all(&lits)
}

/// Shape of an extracted circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionReport {
    pub range: usize,
    pub segments: usize,
    pub q_star: usize,
    pub j_star: usize,
    /// Number of tables composed, after padding to a power of two.
    pub padded: usize,
    pub b_levels: usize,
    /// Segments whose relevant-variable count exceeds `D`.
    pub over_budget: Vec<(usize, usize)>,
    pub max_relevant: usize,
    pub depth: usize,
    pub size: usize,
}

/// Circuit computing the automaton's acceptance, with its shape.
///
/// The accept position `p` lies in segment `q* = ⌊p/D⌋ + 1` at offset
/// `j* = p mod D`. Cuts past `p` are ignored while building tables, as a run
/// stops once it reaches `p`.
pub fn extract_circuit(
    aut: &BenensonAutomaton,
) -> Result<(Circuit, ExtractionReport), ExtractError> {
    if !aut.is_deterministic() {
        return Err(ExtractError::Nondeterministic);
    }
    let n = aut.n();
    let d = aut.range();
    let p = aut.accept_pos();
    let mut b = CircuitBuilder::new(n);
    let mut report = ExtractionReport {
        range: d,
        segments: segment_count(aut),
        q_star: 0,
        j_star: 0,
        padded: 0,
        b_levels: 0,
        over_budget: vec![],
        max_relevant: 0,
        depth: 0,
        size: 0,
    };
    let out = if p == 0 {
        b.constant(true)
    } else if let Some(q) = p.checked_div(d) {
        let q_star = q + 1;
        let j_star = p % d;
        report.q_star = q_star;
        report.j_star = j_star;
        if q_star == 1 {
            // p is inside the first segment: select reachability directly
            b.set_prefix("A1_");
            let vars = relevant_vars(aut, 0, 2 * d);
            report.max_relevant = vars.len();
            if vars.len() > d {
                report.over_budget.push((1, vars.len()));
            }
            let leaves: Vec<Wire> = (0..1usize << vars.len())
                .map(|idx| {
                    let x = spread(n, &vars, idx);
                    let hit = reaches_within(aut, &x, p);
                    b.constant(hit)
                })
                .collect();
            let sel: Vec<Wire> = vars.iter().map(|&v| b.input(v)).collect();
            let fill = b.constant(false);
            b.select(&sel, &leaves, fill)
        } else {
            let mut level: Vec<Vec<Wire>> = Vec::with_capacity(q_star - 1);
            for q in 1..q_star {
                b.set_prefix(format!("A{q}_"));
                let (wires, vars) = build_gadget_a(&mut b, aut, q, p)?;
                report.max_relevant = report.max_relevant.max(vars.len());
                if vars.len() > d {
                    report.over_budget.push((q, vars.len()));
                }
                level.push(wires);
            }
            let padded = level.len().next_power_of_two();
            let ident = PhiTable::identity(d).encode();
            while level.len() < padded {
                level.push(constant_bits(&mut b, &ident));
            }
            report.padded = padded;
            let mut depth = 0;
            while level.len() > 1 {
                depth += 1;
                let mut next = Vec::with_capacity(level.len() / 2);
                for (idx, pair) in level.chunks(2).enumerate() {
                    b.set_prefix(format!("B{depth}_{}_", idx + 1));
                    next.push(build_gadget_b(&mut b, d, &pair[0], &pair[1]));
                }
                level = next;
            }
            report.b_levels = depth;
            b.set_prefix("C_");
            build_gadget_c(&mut b, d, &level[0], j_star)
        }
    } else {
        // D = 0: nothing ever cuts
        b.constant(false)
    };
    let circuit = b.finish(out);
    report.depth = circuit.depth();
    report.size = circuit.size();
    Ok((circuit, report))
}

/// Whether offset `target` is reachable from 0 through offsets `≤ target`.
fn reaches_within(aut: &BenensonAutomaton, x: &[bool], target: usize) -> bool {
    let mut seen = BTreeSet::from([0]);
    let mut queue = VecDeque::from([0]);
    while let Some(o) = queue.pop_front() {
        if o == target {
            return true;
        }
        for t in aut.step(x, o).expect("input validated") {
            if t <= target && seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    false
}
