//! Equivalence checks between evaluators and an independent audit of
//! compilation parameters.

use std::fmt;

use rand::RngCore;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use thiserror::Error;

use crate::automaton::{bits_of, format_bits, BenensonAutomaton};
use crate::compiler::{CompilationReport, Construction};
use crate::machines::{AnyBp, Circuit, GeneralBp, LayeredBp, PermutationBp};

pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("input counts differ: {a} and {b}")]
    InputMismatch { a: usize, b: usize },
    #[error("{n} inputs exceeds the exhaustive limit {limit}; use random sampling")]
    TooManyInputs { n: usize, limit: usize },
    #[error("evaluation failed on x={x}: {message}")]
    Eval { x: String, message: String },
    #[error("counterexample x={0} did not reproduce")]
    Unstable(String),
}

/// Anything with a Boolean function of `n` inputs.
#[derive(Debug, Clone)]
pub enum Evaluator {
    Circuit(Circuit),
    General(GeneralBp),
    Layered(LayeredBp),
    Permutation(PermutationBp),
    Automaton(BenensonAutomaton),
}

impl Evaluator {
    pub fn n(&self) -> usize {
        match self {
            Evaluator::Circuit(c) => c.n(),
            Evaluator::General(b) => b.n(),
            Evaluator::Layered(b) => b.n(),
            Evaluator::Permutation(b) => b.n(),
            Evaluator::Automaton(a) => a.n(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Evaluator::Circuit(_) => "circuit",
            Evaluator::General(_) => "general-bp",
            Evaluator::Layered(_) => "layered-bp",
            Evaluator::Permutation(_) => "permutation-bp",
            Evaluator::Automaton(_) => "automaton",
        }
    }

    pub fn eval(&self, x: &[bool]) -> Result<bool, VerifyError> {
        let r = match self {
            Evaluator::Circuit(c) => c.eval(x).map_err(|e| e.to_string()),
            Evaluator::General(b) => b.eval(x).map_err(|e| e.to_string()),
            Evaluator::Layered(b) => b.eval(x).map_err(|e| e.to_string()),
            Evaluator::Permutation(b) => b.eval(x).map_err(|e| e.to_string()),
            Evaluator::Automaton(a) => a.accepts(x).map_err(|e| e.to_string()),
        };
        r.map_err(|message| VerifyError::Eval {
            x: format_bits(x),
            message,
        })
    }
}

impl From<Circuit> for Evaluator {
    fn from(c: Circuit) -> Self {
        Evaluator::Circuit(c)
    }
}

impl From<BenensonAutomaton> for Evaluator {
    fn from(a: BenensonAutomaton) -> Self {
        Evaluator::Automaton(a)
    }
}

impl From<GeneralBp> for Evaluator {
    fn from(b: GeneralBp) -> Self {
        Evaluator::General(b)
    }
}

impl From<LayeredBp> for Evaluator {
    fn from(b: LayeredBp) -> Self {
        Evaluator::Layered(b)
    }
}

impl From<PermutationBp> for Evaluator {
    fn from(b: PermutationBp) -> Self {
        Evaluator::Permutation(b)
    }
}

impl From<AnyBp> for Evaluator {
    fn from(b: AnyBp) -> Self {
        match b {
            AnyBp::General(b) => Evaluator::General(b),
            AnyBp::Layered(b) => Evaluator::Layered(b),
            AnyBp::Permutation(b) => Evaluator::Permutation(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equal { inputs: u64 },
    Counterexample { x: Vec<bool>, a: bool, b: bool },
}

impl Equivalence {
    pub fn is_equal(&self) -> bool {
        matches!(self, Equivalence::Equal { .. })
    }
}

impl fmt::Display for Equivalence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Equivalence::Equal { .. } => f.write_str("PASS"),
            Equivalence::Counterexample { x, a, b } => {
                write!(f, "FAIL x={} a={} b={}", format_bits(x), *a as u8, *b as u8)
            }
        }
    }
}

fn same_n(a: &Evaluator, b: &Evaluator) -> Result<usize, VerifyError> {
    if a.n() != b.n() {
        return Err(VerifyError::InputMismatch { a: a.n(), b: b.n() });
    }
    Ok(a.n())
}

/// Evaluate both sides on every candidate in parallel and return the first
/// disagreement in candidate order, checked again before it is reported.
fn first_difference(
    a: &Evaluator,
    b: &Evaluator,
    count: u64,
    input: impl Fn(u64) -> Vec<bool> + Sync,
) -> Result<Equivalence, VerifyError> {
    let found = (0..count)
        .into_par_iter()
        .map(|k| {
            let x = input(k);
            let (va, vb) = (a.eval(&x)?, b.eval(&x)?);
            Ok((va != vb).then_some((x, va, vb)))
        })
        .find_map_first(|r: Result<_, VerifyError>| match r {
            Ok(None) => None,
            other => Some(other),
        });
    match found {
        None => Ok(Equivalence::Equal { inputs: count }),
        Some(Err(e)) => Err(e),
        Some(Ok(None)) => unreachable!(),
        Some(Ok(Some((x, va, vb)))) => {
            if a.eval(&x)? == b.eval(&x)? {
                return Err(VerifyError::Unstable(format_bits(&x)));
            }
            Ok(Equivalence::Counterexample { x, a: va, b: vb })
        }
    }
}

/// Compare on all `2ⁿ` inputs; a counterexample is the lexicographically
/// first one.
pub fn equivalence_exhaustive(
    a: &Evaluator,
    b: &Evaluator,
    limit: usize,
) -> Result<Equivalence, VerifyError> {
    let n = same_n(a, b)?;
    if n > limit || n >= 64 {
        return Err(VerifyError::TooManyInputs { n, limit });
    }
    first_difference(a, b, 1u64 << n, |k| bits_of(k, n))
}

/// Compare on `trials` inputs from [`InputSampler`] seeded with `seed`.
pub fn equivalence_random(
    a: &Evaluator,
    b: &Evaluator,
    trials: u64,
    seed: u64,
) -> Result<Equivalence, VerifyError> {
    let n = same_n(a, b)?;
    let inputs = InputSampler::new(seed).take_inputs(n, trials);
    first_difference(a, b, trials, |k| inputs[k as usize].clone())
}

/// Reproducible input vectors from SplitMix64. Each vector takes
/// `⌈n/64⌉` outputs; bit `x_{64t+k+1}` is bit `63 − k` of output `t`.
#[derive(Debug, Clone)]
pub struct InputSampler {
    rng: SplitMix64,
}

impl InputSampler {
    pub fn new(seed: u64) -> Self {
        InputSampler {
            rng: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn next_bits(&mut self, n: usize) -> Vec<bool> {
        let mut x = Vec::with_capacity(n);
        while x.len() < n {
            let word = self.rng.next_u64();
            let take = (n - x.len()).min(64);
            x.extend((0..take).map(|k| word >> (63 - k) & 1 == 1));
        }
        x
    }

    pub fn take_inputs(&mut self, n: usize, count: u64) -> Vec<Vec<bool>> {
        (0..count).map(|_| self.next_bits(n)).collect()
    }
}

/// Differences between a report and the parameters recomputed from scratch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Audit {
    pub discrepancies: Vec<String>,
}

impl Audit {
    pub fn passed(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

impl fmt::Display for Audit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return f.write_str("PASS");
        }
        for d in &self.discrepancies {
            writeln!(f, "FAIL {d}")?;
        }
        Ok(())
    }
}

/// Least `e` with `base^e ≥ x`, by repeated division.
fn log_up(base: usize, x: usize) -> usize {
    let mut e = 0;
    let mut rest = x;
    while rest > 1 {
        rest = rest.div_ceil(base);
        e += 1;
    }
    e
}

/// Recompute `S`, `D`, `L`, the segment length and the sparseness bound from
/// the program shape and alphabet size alone, and compare.
pub fn audit_parameters(report: &CompilationReport) -> Audit {
    let sigma = report.alphabet_size;
    let n = report.shape.n;
    let mut expected: Vec<(&str, usize, usize)> = Vec::new();
    let bound;
    match (report.construction, report.shape.layered) {
        (Construction::General, _) => {
            let h = report.shape.nodes;
            let s = log_up(sigma, h);
            expected.push(("S", report.produced.s, s));
            expected.push(("D", report.produced.d, (h - 1) * s));
            expected.push(("L", report.produced.l, h * s));
            expected.push(("segment_len", report.segment_len, s));
            bound = h;
        }
        (c, Some((j, k))) => {
            let w = 2 * j - 1;
            let (s, d) = match c {
                Construction::FixedWidth => {
                    let s = log_up(sigma, n * w * w);
                    (s, w * s)
                }
                Construction::FixedWidthConstD => (1 + log_up(sigma - 1, n * w * w), w),
                Construction::Permutation => (1 + log_up(sigma - 1, n * w), w),
                _ => (1 + log_up(sigma - 1, n + w), (4 * j - 3).max(2 * j)),
            };
            let m = if c == Construction::FixedWidth {
                s
            } else {
                // least D·k + 1 reaching S, k ≥ 1
                (1..).map(|k| d * k + 1).find(|&m| m >= s).unwrap()
            };
            let per_node = if c == Construction::Sparse1 { 2 } else { 1 };
            expected.push(("S", report.produced.s, s));
            expected.push(("D", report.produced.d, d));
            expected.push(("L", report.produced.l, per_node * (k + 1) * j * m));
            expected.push(("segment_len", report.segment_len, m));
            expected.push((
                "s_based_L",
                report.formula.s_based_len,
                per_node * (k + 1) * j * s,
            ));
            bound = match c {
                Construction::FixedWidth | Construction::FixedWidthConstD => w * w,
                Construction::Permutation => w,
                _ => 1,
            };
        }
        (c, None) => {
            return Audit {
                discrepancies: vec![format!("{c} report without a layered shape")],
            }
        }
    }
    let mut discrepancies: Vec<String> = expected
        .into_iter()
        .filter(|(_, got, want)| got != want)
        .map(|(what, got, want)| format!("{what} produced {got} expected {want}"))
        .collect();
    if report.sparseness > bound {
        discrepancies.push(format!(
            "sparseness {} exceeds bound {bound}",
            report.sparseness
        ));
    }
    Audit { discrepancies }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::Alphabet;
    use crate::barrington::barrington_compile;
    use crate::compiler::{compile_general, compile_sparse1, SkipRules};
    use crate::fixtures::{and2, nine_node_general, toy_automaton};
    use crate::machines::{parse_circuit, Circuit, Gate};
    use proptest::prelude::*;

    fn constant(b: bool) -> Evaluator {
        Circuit::new(2, vec![Gate::Const(b)], 0).unwrap().into()
    }

    #[test]
    fn splitmix_reference_values() {
        // published SplitMix64 outputs for seed 0
        let mut s = InputSampler::new(0);
        assert_eq!(s.next_u64(), 0xe220a8397b1dcdaf);
        assert_eq!(s.next_u64(), 0x6e789e6aa1b965f4);
        assert_eq!(s.next_u64(), 0x06c45d188009454f);
    }

    #[test]
    fn bit_order_is_msb_first() {
        let mut a = InputSampler::new(9);
        let mut b = InputSampler::new(9);
        let word = a.next_u64();
        let bits = b.next_bits(70);
        assert_eq!(bits[0], word >> 63 == 1);
        assert_eq!(bits[63], word & 1 == 1);
        assert_eq!(bits.len(), 70);
    }

    #[test]
    fn self_and_cross_equivalence() {
        let c: Evaluator = and2().into();
        assert_eq!(
            equivalence_exhaustive(&c, &c, 20).unwrap().to_string(),
            "PASS"
        );
        let bp: Evaluator = barrington_compile(&and2()).unwrap().into();
        assert!(equivalence_exhaustive(&c, &bp, 20).unwrap().is_equal());
        let x1: Evaluator = parse_circuit("circuit v1\ninputs 1\nlet a = INPUT 1\noutput a\n")
            .unwrap()
            .into();
        let toy: Evaluator = toy_automaton().into();
        assert!(equivalence_exhaustive(&toy, &x1, 20).unwrap().is_equal());
    }

    #[test]
    fn constant_counterexample() {
        let r = equivalence_exhaustive(&constant(false), &constant(true), 20).unwrap();
        assert_eq!(r.to_string(), "FAIL x=00 a=0 b=1");
        let r = equivalence_random(&constant(false), &constant(true), 5, 3).unwrap();
        let Equivalence::Counterexample { x, .. } = r else {
            panic!()
        };
        assert_eq!(x, InputSampler::new(3).next_bits(2));
    }

    #[test]
    fn first_counterexample_is_lexicographic() {
        // x1 AND x3 vs x1
        let a: Evaluator = parse_circuit(
            "circuit v1\ninputs 3\nlet a = INPUT 1\nlet c = INPUT 3\nlet g = AND a c\noutput g\n",
        )
        .unwrap()
        .into();
        let b: Evaluator = parse_circuit("circuit v1\ninputs 3\nlet a = INPUT 1\noutput a\n")
            .unwrap()
            .into();
        let r = equivalence_exhaustive(&a, &b, 20).unwrap();
        assert_eq!(r.to_string(), "FAIL x=100 a=0 b=1");
    }

    #[test]
    fn refusals() {
        let big: Evaluator = Circuit::new(21, vec![Gate::Const(true)], 0).unwrap().into();
        assert!(matches!(
            equivalence_exhaustive(&big, &big, 20),
            Err(VerifyError::TooManyInputs { .. })
        ));
        assert!(matches!(
            equivalence_exhaustive(&big, &constant(true), 20),
            Err(VerifyError::InputMismatch { .. })
        ));
    }

    #[test]
    fn audit_examples() {
        let sigma = Alphabet::dna();
        let nine = compile_general(&nine_node_general(), &sigma).unwrap();
        let a = audit_parameters(&nine.report);
        assert!(a.passed(), "{a}");
        assert_eq!(
            (
                nine.report.produced.s,
                nine.report.produced.d,
                nine.report.produced.l
            ),
            (2, 16, 18)
        );
        let mut bad = nine.report.clone();
        bad.produced.d = 15;
        assert_eq!(
            audit_parameters(&bad).to_string(),
            "FAIL D produced 15 expected 16\n"
        );
    }

    #[test]
    fn audit_sparse1_width5() {
        let mut rng = <rand_chacha::ChaCha8Rng as SeedableRng>::seed_from_u64(1);
        let pbp = crate::gen::random_pbp(&mut rng, 18, 5, 4).normalize_goto0_identity();
        let c = compile_sparse1(&pbp, &Alphabet::dna(), SkipRules::Occurring).unwrap();
        assert!(audit_parameters(&c.report).passed());
        assert_eq!((c.report.produced.s, c.report.produced.d), (4, 17));
    }

    proptest! {
        #[test]
        fn log_up_is_least(base in 2usize..6, x in 1usize..5000) {
            let e = log_up(base, x);
            prop_assert!(base.pow(e as u32) >= x);
            prop_assert!(e == 0 || base.pow(e as u32 - 1) < x);
        }

        #[test]
        fn sampling_is_reproducible(seed in any::<u64>(), n in 1usize..130) {
            let a = InputSampler::new(seed).take_inputs(n, 4);
            prop_assert_eq!(a, InputSampler::new(seed).take_inputs(n, 4));
        }
    }
}
