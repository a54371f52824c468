//! DNA rendering of automata for a type IIS restriction enzyme.
//!
//! Symbols become bases through a [`BaseMap`]. The state is a duplex whose
//! top strand carries the first `S` bases as a single-stranded overhang. A
//! rule `(i, b, ω, d)` becomes recognition site, `top_cut − d` spacer bases
//! and an overhang complementary to `ω`, so the enzyme bound to it cuts `d`
//! bases into the state.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use thiserror::Error;

use crate::automaton::{bits_of, Alphabet, BenensonAutomaton, CuttingRule, Symbol};
use crate::text::ParseError;
use crate::verify::InputSampler;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WetlabError {
    #[error("invalid enzyme profile: {0}")]
    BadProfile(String),
    #[error("base map: {0}")]
    BadBaseMap(String),
    #[error("sticky end size {automaton} does not match the enzyme's {enzyme}")]
    ProfileMismatch { automaton: usize, enzyme: usize },
    #[error("cut distance {dist} exceeds the enzyme's top-strand reach {top_cut}")]
    Infeasible { dist: usize, top_cut: usize },
    #[error("stem margin needs a deterministic automaton")]
    Nondeterministic,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

fn is_base(c: char) -> bool {
    matches!(c, 'A' | 'C' | 'G' | 'T')
}

pub fn complement_base(c: char) -> char {
    match c {
        'A' => 'T',
        'T' => 'A',
        'C' => 'G',
        'G' => 'C',
        other => other,
    }
}

pub fn reverse_complement(seq: &str) -> String {
    seq.chars().rev().map(complement_base).collect()
}

/// Enzyme geometry: the top strand is cut `top_cut` bases past the
/// recognition site and the bottom strand `bottom_cut` bases past it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnzymeProfile {
    pub name: String,
    pub recognition: String,
    pub top_cut: usize,
    pub bottom_cut: usize,
}

impl EnzymeProfile {
    pub fn new(
        name: impl Into<String>,
        recognition: impl Into<String>,
        top_cut: usize,
        bottom_cut: usize,
    ) -> Result<Self, WetlabError> {
        let p = EnzymeProfile {
            name: name.into(),
            recognition: recognition.into(),
            top_cut,
            bottom_cut,
        };
        if p.name.is_empty() || p.name.contains(char::is_whitespace) {
            return Err(WetlabError::BadProfile("name must be one word".into()));
        }
        if p.recognition.is_empty() || !p.recognition.chars().all(is_base) {
            return Err(WetlabError::BadProfile(format!(
                "recognition {:?} is not a base sequence",
                p.recognition
            )));
        }
        if top_cut < 1 || bottom_cut <= top_cut {
            return Err(WetlabError::BadProfile(format!(
                "need 1 ≤ top_cut < bottom_cut, got {top_cut} and {bottom_cut}"
            )));
        }
        Ok(p)
    }

    pub fn foki() -> Self {
        EnzymeProfile::new("FokI", "GGATG", 9, 13).unwrap()
    }

    pub fn sticky_size(&self) -> usize {
        self.bottom_cut - self.top_cut
    }

    /// Spacer length placing the cut `dist` bases into the state.
    pub fn spacer(&self, dist: usize) -> Result<usize, WetlabError> {
        self.top_cut
            .checked_sub(dist)
            .ok_or(WetlabError::Infeasible {
                dist,
                top_cut: self.top_cut,
            })
    }

    /// `key value` lines for `name`, `recognition`, `top_cut`, `bottom_cut`.
    pub fn parse(text: &str) -> Result<Self, WetlabError> {
        let (mut name, mut rec, mut top, mut bottom) = (None, None, None, None);
        for (line, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once(char::is_whitespace)
                .map(|(k, v)| (k, v.trim()))
                .ok_or_else(|| ParseError::new(line + 1, "expected `key value`"))?;
            let num = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| ParseError::new(line + 1, format!("expected integer, got {v:?}")))
            };
            match key {
                "name" => name = Some(value.to_string()),
                "recognition" => rec = Some(value.to_string()),
                "top_cut" => top = Some(num(value)?),
                "bottom_cut" => bottom = Some(num(value)?),
                other => {
                    return Err(ParseError::new(line + 1, format!("unknown key `{other}`")).into())
                }
            }
        }
        let missing = |k: &str| WetlabError::BadProfile(format!("missing `{k}`"));
        EnzymeProfile::new(
            name.ok_or_else(|| missing("name"))?,
            rec.ok_or_else(|| missing("recognition"))?,
            top.ok_or_else(|| missing("top_cut"))?,
            bottom.ok_or_else(|| missing("bottom_cut"))?,
        )
    }

    pub fn to_text(&self) -> String {
        format!(
            "name {}\nrecognition {}\ntop_cut {}\nbottom_cut {}\n",
            self.name, self.recognition, self.top_cut, self.bottom_cut
        )
    }
}

/// Bijection from alphabet symbols to bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseMap {
    bases: Vec<char>,
}

impl BaseMap {
    /// Symbol `k` goes to `bases[k]`.
    pub fn new(alphabet: &Alphabet, bases: &str) -> Result<Self, WetlabError> {
        let bases: Vec<char> = bases.chars().collect();
        if alphabet.len() != 4 {
            return Err(WetlabError::BadBaseMap(format!(
                "alphabet has {} symbols, DNA has 4",
                alphabet.len()
            )));
        }
        let distinct: BTreeSet<char> = bases.iter().copied().collect();
        if bases.len() != 4 || distinct.len() != 4 || !bases.iter().all(|&c| is_base(c)) {
            return Err(WetlabError::BadBaseMap(format!(
                "{:?} is not a permutation of ACGT",
                bases.iter().collect::<String>()
            )));
        }
        Ok(BaseMap { bases })
    }

    /// Symbol order onto `A, C, G, T`.
    pub fn default_for(alphabet: &Alphabet) -> Result<Self, WetlabError> {
        BaseMap::new(alphabet, "ACGT")
    }

    pub fn bases(&self) -> String {
        self.bases.iter().collect()
    }

    pub fn base(&self, s: Symbol) -> char {
        self.bases[s as usize]
    }

    pub fn symbol(&self, base: char) -> Option<Symbol> {
        self.bases
            .iter()
            .position(|&b| b == base)
            .map(|k| k as Symbol)
    }

    pub fn render(&self, word: &[Symbol]) -> String {
        word.iter().map(|&s| self.base(s)).collect()
    }

    pub fn read(&self, seq: &str) -> Option<Vec<Symbol>> {
        seq.chars().map(|c| self.symbol(c)).collect()
    }
}

/// Top strand of a rule molecule, 5′ to 3′.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleMolecule {
    pub rule: CuttingRule,
    pub spacer: usize,
    pub sequence: String,
}

fn spacer_bases(len: usize) -> String {
    "ACGT".chars().cycle().take(len).collect()
}

pub fn rule_molecule(
    rule: &CuttingRule,
    profile: &EnzymeProfile,
    map: &BaseMap,
) -> Result<RuleMolecule, WetlabError> {
    let spacer = profile.spacer(rule.dist)?;
    let overhang: String = map
        .render(&rule.sticky)
        .chars()
        .map(complement_base)
        .collect();
    Ok(RuleMolecule {
        rule: rule.clone(),
        spacer,
        sequence: format!(
            "{}{}{}",
            profile.recognition,
            spacer_bases(spacer),
            overhang
        ),
    })
}

fn check_emittable(aut: &BenensonAutomaton, profile: &EnzymeProfile) -> Result<(), WetlabError> {
    if aut.sticky_size() != profile.sticky_size() {
        return Err(WetlabError::ProfileMismatch {
            automaton: aut.sticky_size(),
            enzyme: profile.sticky_size(),
        });
    }
    if let Some(r) = aut.rules().iter().find(|r| r.dist > profile.top_cut) {
        return Err(WetlabError::Infeasible {
            dist: r.dist,
            top_cut: profile.top_cut,
        });
    }
    if aut.range() > profile.top_cut {
        return Err(WetlabError::Infeasible {
            dist: aut.range(),
            top_cut: profile.top_cut,
        });
    }
    Ok(())
}

/// Text bundle: header comments, then `>state_top`, `>state_bottom` and one
/// `>rule_<i>_<b>_<omega>_<d>` record per rule.
///
/// The bottom strand is written 3′ to 5′ under the top strand, with `-` over
/// the overhang.
pub fn emit_molecules(
    aut: &BenensonAutomaton,
    profile: &EnzymeProfile,
    map: &BaseMap,
) -> Result<String, WetlabError> {
    check_emittable(aut, profile)?;
    let sigma = aut.alphabet();
    let molecules: Vec<RuleMolecule> = aut
        .rules()
        .par_iter()
        .map(|r| rule_molecule(r, profile, map))
        .collect::<Result<_, _>>()?;
    let mut out = String::new();
    let _ = writeln!(out, "# enzyme {}", profile.name);
    let _ = writeln!(out, "# recognition {}", profile.recognition);
    let _ = writeln!(out, "# top_cut {}", profile.top_cut);
    let _ = writeln!(out, "# bottom_cut {}", profile.bottom_cut);
    let _ = writeln!(out, "# sticky_size {}", profile.sticky_size());
    let _ = writeln!(out, "# sigma {sigma}");
    let _ = writeln!(out, "# base_map {}", map.bases());
    let _ = writeln!(out, "# n {}", aut.n());
    let _ = writeln!(out, "# D {}", aut.range());
    let _ = writeln!(out, "# accept_pos {}", aut.accept_pos());
    let top = map.render(aut.state());
    let s = aut.sticky_size().min(top.len());
    let bottom: String = "-"
        .repeat(s)
        .chars()
        .chain(top.chars().skip(s).map(complement_base))
        .collect();
    let _ = writeln!(out, ">state_top\n{top}");
    let _ = writeln!(out, ">state_bottom\n{bottom}");
    for m in &molecules {
        let r = &m.rule;
        let _ = writeln!(
            out,
            ">rule_{}_{}_{}_{}\n{}",
            r.var,
            r.bit as u8,
            sigma.decode(&r.sticky),
            r.dist,
            m.sequence
        );
    }
    Ok(out)
}

/// Everything recovered from a bundle.
#[derive(Debug, Clone)]
pub struct ParsedBundle {
    pub profile: EnzymeProfile,
    pub map: BaseMap,
    pub automaton: BenensonAutomaton,
}

/// Re-read a bundle. Each rule's `ω` and `d` come from its sequence; the
/// record name only supplies `(i, b)` and must agree with the sequence.
pub fn parse_molecules(text: &str) -> Result<ParsedBundle, WetlabError> {
    let mut header: Vec<(usize, String, String)> = Vec::new();
    let mut records: Vec<(usize, String, String)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#') {
            let c = c.trim();
            if let Some((key, value)) = c.split_once(' ') {
                header.push((line, key.to_string(), value.trim().to_string()));
            }
        } else if let Some(name) = t.strip_prefix('>') {
            records.push((line, name.to_string(), String::new()));
        } else {
            let Some(last) = records.last_mut() else {
                return Err(ParseError::new(line, "sequence before any record").into());
            };
            last.2.push_str(t);
        }
    }
    let get = |key: &str| -> Result<(usize, &str), WetlabError> {
        header
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(l, _, v)| (*l, v.as_str()))
            .ok_or_else(|| ParseError::new(0, format!("missing header `{key}`")).into())
    };
    let num = |key: &str| -> Result<usize, WetlabError> {
        let (line, v) = get(key)?;
        v.parse()
            .map_err(|_| ParseError::new(line, format!("expected integer for {key}")).into())
    };
    let profile = EnzymeProfile::new(
        get("enzyme")?.1,
        get("recognition")?.1,
        num("top_cut")?,
        num("bottom_cut")?,
    )?;
    let (sline, sigma) = get("sigma")?;
    let sigma = Alphabet::new(sigma).map_err(|e| ParseError::new(sline, e.to_string()))?;
    let map = BaseMap::new(&sigma, get("base_map")?.1)?;
    let n = num("n")?;
    let range = num("D")?;
    let p = num("accept_pos")?;
    let s = profile.sticky_size();

    let record = |name: &str| records.iter().find(|r| r.1 == name);
    let (tline, _, top) =
        record("state_top").ok_or_else(|| ParseError::new(0, "missing `>state_top`"))?;
    let state = map
        .read(top)
        .ok_or_else(|| ParseError::new(*tline, "state contains a non-base"))?;
    if let Some((bline, _, bottom)) = record("state_bottom") {
        let want: String = "-"
            .repeat(s.min(top.len()))
            .chars()
            .chain(top.chars().skip(s).map(complement_base))
            .collect();
        if *bottom != want {
            return Err(
                ParseError::new(*bline, "bottom strand does not pair with top strand").into(),
            );
        }
    }

    let mut rules = Vec::new();
    for (line, name, seq) in records.iter().filter(|r| r.1.starts_with("rule_")) {
        let err = |m: &str| WetlabError::from(ParseError::new(*line, m.to_string()));
        let fields: Vec<&str> = name.splitn(5, '_').collect();
        if fields.len() != 5 {
            return Err(err("rule name must be rule_<i>_<b>_<omega>_<d>"));
        }
        let var: usize = fields[1].parse().map_err(|_| err("bad variable"))?;
        let bit = match fields[2] {
            "0" => false,
            "1" => true,
            _ => return Err(err("bad bit")),
        };
        let body = seq
            .strip_prefix(profile.recognition.as_str())
            .ok_or_else(|| err("rule molecule does not start with the recognition site"))?;
        if body.len() < s {
            return Err(err("rule molecule shorter than its overhang"));
        }
        let spacer = body.len() - s;
        let dist = profile
            .top_cut
            .checked_sub(spacer)
            .ok_or_else(|| err("spacer longer than the enzyme reach"))?;
        let overhang: String = body[spacer..].chars().map(complement_base).collect();
        let sticky = map
            .read(&overhang)
            .ok_or_else(|| err("overhang contains a non-base"))?;
        // the name carries ω and d too; they must agree with the sequence
        let (name_omega, name_dist) = fields[3..]
            .join("_")
            .rsplit_once('_')
            .map_or((String::new(), String::new()), |(o, d)| {
                (o.to_string(), d.to_string())
            });
        if name_omega != sigma.decode(&sticky) || name_dist != dist.to_string() {
            return Err(err("record name disagrees with the molecule sequence"));
        }
        rules.push(CuttingRule::new(var, bit, sticky, dist));
    }
    let automaton = BenensonAutomaton::new(sigma, n, s, range, state, rules, p)
        .map_err(|e| ParseError::new(0, e.to_string()))?;
    Ok(ParsedBundle {
        profile,
        map,
        automaton,
    })
}

/// Rules the enzyme chemistry is unlikely to carry out as modelled.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlausibilityReport {
    /// `d = 1`: the cut leaves a single base next to a nick.
    pub short_cuts: Vec<CuttingRule>,
    /// `d` beyond the enzyme's reach.
    pub infeasible: Vec<CuttingRule>,
    /// Sticky ends equal to their own reverse complement, which can pair
    /// with each other.
    pub self_complementary: Vec<String>,
    pub notes: Vec<String>,
}

impl PlausibilityReport {
    pub fn is_clean(&self) -> bool {
        self.short_cuts.is_empty() && self.infeasible.is_empty()
    }
}

impl fmt::Display for PlausibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "short_cuts {}", self.short_cuts.len())?;
        for r in &self.short_cuts {
            writeln!(
                f,
                "  d=1 rule ({}, {}, {:?}, {})",
                r.var, r.bit as u8, r.sticky, r.dist
            )?;
        }
        writeln!(f, "infeasible {}", self.infeasible.len())?;
        for r in &self.infeasible {
            writeln!(
                f,
                "  rule ({}, {}, {:?}, {})",
                r.var, r.bit as u8, r.sticky, r.dist
            )?;
        }
        writeln!(f, "self_complementary {}", self.self_complementary.len())?;
        for s in &self.self_complementary {
            writeln!(f, "  {s}")?;
        }
        for n in &self.notes {
            writeln!(f, "note {n}")?;
        }
        Ok(())
    }
}

pub fn plausibility_check(
    aut: &BenensonAutomaton,
    profile: &EnzymeProfile,
    map: Option<&BaseMap>,
) -> PlausibilityReport {
    let mut report = PlausibilityReport {
        short_cuts: aut
            .rules()
            .iter()
            .filter(|r| r.dist == 1)
            .cloned()
            .collect(),
        infeasible: aut
            .rules()
            .iter()
            .filter(|r| r.dist > profile.top_cut)
            .cloned()
            .collect(),
        ..Default::default()
    };
    match map {
        Some(map) => {
            let ends: BTreeSet<&[Symbol]> =
                aut.rules().iter().map(|r| r.sticky.as_slice()).collect();
            report.self_complementary = ends
                .into_iter()
                .map(|w| map.render(w))
                .filter(|s| !s.is_empty() && *s == reverse_complement(s))
                .collect();
        }
        None => report
            .notes
            .push("no base map; self-complementarity not checked".into()),
    }
    report
        .notes
        .push("recognition sites inside the state molecule are not scanned".into());
    report
}

/// Sampled inputs used past the exhaustive limit.
pub const STEM_SAMPLES: u64 = 1 << 16;
pub const STEM_EXHAUSTIVE_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StemMargin {
    /// Smallest `p − max offset` over rejecting inputs, with one input
    /// attaining it.
    Defined {
        margin: i64,
        witness: Vec<bool>,
        exhaustive: bool,
        inputs: u64,
    },
    /// Every examined input is accepted.
    Undefined { exhaustive: bool, inputs: u64 },
}

impl StemMargin {
    pub fn margin(&self) -> Option<i64> {
        match self {
            StemMargin::Defined { margin, .. } => Some(*margin),
            StemMargin::Undefined { .. } => None,
        }
    }
}

impl fmt::Display for StemMargin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StemMargin::Defined {
                margin,
                witness,
                exhaustive,
                inputs,
            } => write!(
                f,
                "{margin} (x={}, {} over {inputs} inputs)",
                crate::automaton::format_bits(witness),
                if *exhaustive { "exhaustive" } else { "sampled" }
            ),
            StemMargin::Undefined { .. } => write!(f, "margin undefined (f ≡ 1)"),
        }
    }
}

/// How far short of the accept position rejecting runs stop. Exhaustive up
/// to 16 inputs, otherwise [`STEM_SAMPLES`] inputs drawn with `seed`.
pub fn stem_margin(aut: &BenensonAutomaton, seed: u64) -> Result<StemMargin, WetlabError> {
    if !aut.is_deterministic() {
        return Err(WetlabError::Nondeterministic);
    }
    let n = aut.n();
    let exhaustive = n <= STEM_EXHAUSTIVE_LIMIT;
    let inputs: Vec<Vec<bool>> = if exhaustive {
        (0..1u64 << n).map(|idx| bits_of(idx, n)).collect()
    } else {
        let mut rng = InputSampler::new(seed);
        (0..STEM_SAMPLES).map(|_| rng.next_bits(n)).collect()
    };
    let count = inputs.len() as u64;
    let p = aut.accept_pos() as i64;
    // (margin, input position) so ties resolve to the earliest input
    let best = inputs
        .par_iter()
        .enumerate()
        .filter_map(|(k, x)| {
            let run = aut.run(x).expect("input length is n");
            (!run.accepted).then(|| (p - run.last_offset() as i64, k))
        })
        .min();
    Ok(match best {
        Some((margin, k)) => StemMargin::Defined {
            margin,
            witness: inputs[k].clone(),
            exhaustive,
            inputs: count,
        },
        None => StemMargin::Undefined {
            exhaustive,
            inputs: count,
        },
    })
}
