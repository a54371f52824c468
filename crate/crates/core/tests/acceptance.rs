//! Acceptance checks, one line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use benenson::automaton::{bits_of, write_ben, Alphabet, BenensonAutomaton, CuttingRule};
use benenson::barrington::{barrington_compile, compile_layers, WIDTH};
use benenson::compiler::{
    compile_fixed_width, compile_fixed_width_constd, compile_general, compile_permutation,
    compile_sparse1, formula, Compiled, Construction, SkipRules,
};
use benenson::extractor::extract_circuit;
use benenson::gen::{random_formula, random_general, random_layered, random_pbp};
use benenson::machines::{Circuit, LayerNode, LayeredBp, PermutationBp};
use benenson::verify::{audit_parameters, equivalence_exhaustive, equivalence_random, Evaluator};
use benenson::wetlab::{
    emit_molecules, parse_molecules, plausibility_check, rule_molecule, stem_margin, BaseMap,
    EnzymeProfile, StemMargin,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn exhaustive(a: impl Into<Evaluator>, b: impl Into<Evaluator>) -> Result<(), String> {
    let r = equivalence_exhaustive(&a.into(), &b.into(), 20).map_err(|e| e.to_string())?;
    ensure!(r.is_equal(), "{r}");
    Ok(())
}

/// Automaton verdicts on every input, in lexicographic order.
fn automaton_table(aut: &BenensonAutomaton) -> Vec<bool> {
    (0..1u64 << aut.n())
        .into_par_iter()
        .map(|k| aut.accepts(&bits_of(k, aut.n())).unwrap())
        .collect()
}

fn dna() -> Alphabet {
    Alphabet::dna()
}

/// Twenty 3-input formulas of depth 1 to 3 through the width-5 permutation
/// pipeline.
fn three_input_corpus() -> Vec<(Circuit, Compiled)> {
    let mut r = rng(1001);
    (0..20)
        .map(|k| {
            let c = random_formula(&mut r, 3, 1 + k % 3, false);
            let pbp = barrington_compile(&c).unwrap().normalize_goto0_identity();
            let compiled = compile_permutation(&pbp, &dna(), SkipRules::Occurring).unwrap();
            (c, compiled)
        })
        .collect()
}

/// Width-3 programs over 22 inputs with up to 64 layers; the last has
/// exactly 64.
fn wide_programs() -> Vec<PermutationBp> {
    let mut r = rng(2002);
    (0..10)
        .map(|k| {
            let len = if k == 9 { 64 } else { r.gen_range(1..=64) };
            random_pbp(&mut r, 22, 3, len)
        })
        .collect()
}

/// Same layers with variable `i` read as `((i − 1) mod n) + 1`.
fn truncate(pbp: &PermutationBp, n: usize) -> PermutationBp {
    let layers: Vec<_> = (0..pbp.length())
        .map(|k| {
            let var = pbp.as_layered().layers()[k][0].var;
            (
                (var - 1) % n + 1,
                pbp.layer_perm(k, false),
                pbp.layer_perm(k, true),
            )
        })
        .collect();
    PermutationBp::from_perms(n, pbp.width(), &layers, pbp.accept_node()).unwrap()
}

fn truncated_corpus() -> Vec<(PermutationBp, Compiled)> {
    wide_programs()
        .iter()
        .map(|p| {
            let t = truncate(p, 10);
            let c = compile_sparse1(&t.normalize_goto0_identity(), &dna(), SkipRules::Occurring)
                .unwrap();
            (t, c)
        })
        .collect()
}

fn c1_permutation_constants() -> Outcome {
    let corpus = three_input_corpus();
    for (k, (c, compiled)) in corpus.iter().enumerate() {
        let a = &compiled.automaton;
        ensure!(
            (a.sticky_size(), a.range()) == (4, 9),
            "circuit {k}: S={} D={}",
            a.sticky_size(),
            a.range()
        );
        ensure!(a.is_deterministic(), "circuit {k}: nondeterministic");
        exhaustive(c.clone(), a.clone()).map_err(|e| format!("circuit {k}: {e}"))?;
    }
    Ok(format!(
        "{} circuits, S=4 D=9, all 8 inputs agree",
        corpus.len()
    ))
}

fn c2_sparse_wide() -> Outcome {
    let programs = wide_programs();
    for (k, p) in programs.iter().enumerate() {
        let c = compile_sparse1(&p.normalize_goto0_identity(), &dna(), SkipRules::Occurring)
            .map_err(|e| e.to_string())?;
        let a = &c.automaton;
        ensure!(
            (a.sticky_size(), a.range(), a.sparseness()) == (4, 9, 1),
            "program {k}: S={} D={} sparseness={}",
            a.sticky_size(),
            a.range(),
            a.sparseness()
        );
        let r = equivalence_random(&p.clone().into(), &a.clone().into(), 10_000, 77 + k as u64)
            .map_err(|e| e.to_string())?;
        ensure!(r.is_equal(), "program {k}: {r}");
    }
    let truncated = truncated_corpus();
    for (k, (t, c)) in truncated.iter().enumerate() {
        let a = &c.automaton;
        ensure!(
            (a.sticky_size(), a.range(), a.sparseness()) == (4, 9, 1),
            "truncation {k}: S={} D={} sparseness={}",
            a.sticky_size(),
            a.range(),
            a.sparseness()
        );
        exhaustive(t.clone(), a.clone()).map_err(|e| format!("truncation {k}: {e}"))?;
    }
    Ok(format!(
        "{} programs n=22 (10^4 samples each), {} truncations n=10 exhaustive",
        programs.len(),
        truncated.len()
    ))
}

fn c3_width5_sparse() -> Outcome {
    let mut r = rng(3003);
    let mut lens = Vec::new();
    for n in 1..=18 {
        let c = random_formula(&mut r, n, 2, false);
        let pbp = barrington_compile(&c).unwrap().normalize_goto0_identity();
        let compiled =
            compile_sparse1(&pbp, &dna(), SkipRules::Occurring).map_err(|e| e.to_string())?;
        let a = &compiled.automaton;
        ensure!(
            (a.sticky_size(), a.range()) == (4, 17),
            "n={n}: S={} D={}",
            a.sticky_size(),
            a.range()
        );
        let audit = audit_parameters(&compiled.report);
        ensure!(audit.passed(), "n={n}: {audit}");
        ensure!(a.sparseness() == 1, "n={n}: sparseness {}", a.sparseness());
        if n <= 12 {
            exhaustive(c, a.clone()).map_err(|e| format!("n={n}: {e}"))?;
        } else {
            let res = equivalence_random(&c.into(), &a.clone().into(), 2000, n as u64)
                .map_err(|e| e.to_string())?;
            ensure!(res.is_equal(), "n={n}: {res}");
        }
        lens.push((
            compiled.report.produced.l,
            compiled.report.formula.s_based_len,
        ));
    }
    let (l, s_based) = lens[0];
    Ok(format!(
        "n=1..18 give S=4 D=17, audits pass; depth 2: L={l} (S-based figure {s_based})"
    ))
}

fn c4_formula_grid() -> Outcome {
    let mut r = rng(4004);
    let mut checked = 0;
    for j in [2usize, 3, 5] {
        for k in [2usize, 8, 32] {
            for n in [2usize, 4, 22] {
                for sigma in [3usize, 4] {
                    let alphabet = Alphabet::new(&"ACGT"[..sigma]).unwrap();
                    let pbp = random_pbp(&mut r, n, j, k);
                    let norm = pbp.normalize_goto0_identity();
                    let layered = random_layered(&mut r, n, j, k);
                    let general = random_general(&mut r, n, (j * (k + 1)).max(3));
                    let runs: Vec<(Construction, Compiled, Evaluator)> = vec![
                        (
                            Construction::General,
                            compile_general(&general, &alphabet).map_err(|e| e.to_string())?,
                            general.clone().into(),
                        ),
                        (
                            Construction::FixedWidth,
                            compile_fixed_width(&layered, &alphabet).map_err(|e| e.to_string())?,
                            layered.clone().into(),
                        ),
                        (
                            Construction::FixedWidthConstD,
                            compile_fixed_width_constd(&layered, &alphabet, SkipRules::Occurring)
                                .map_err(|e| e.to_string())?,
                            layered.clone().into(),
                        ),
                        (
                            Construction::Permutation,
                            compile_permutation(&norm, &alphabet, SkipRules::Occurring)
                                .map_err(|e| e.to_string())?,
                            pbp.clone().into(),
                        ),
                        (
                            Construction::Sparse1,
                            compile_sparse1(&norm, &alphabet, SkipRules::Occurring)
                                .map_err(|e| e.to_string())?,
                            pbp.clone().into(),
                        ),
                    ];
                    for (c, compiled, source) in runs {
                        let rep = &compiled.report;
                        let a = &compiled.automaton;
                        let at = format!("{c} J={j} K={k} n={n} |Σ|={sigma}");
                        let f = formula(c, &rep.shape, sigma);
                        ensure!(
                            rep.produced == f.sdl,
                            "{at}: produced {:?} formula {:?}",
                            rep.produced,
                            f.sdl
                        );
                        ensure!(
                            (a.sticky_size(), a.range(), a.len()) == (f.sdl.s, f.sdl.d, f.sdl.l),
                            "{at}: automaton disagrees with its report"
                        );
                        ensure!(
                            a.sparseness() == rep.sparseness,
                            "{at}: sparseness misreported"
                        );
                        ensure!(
                            a.sparseness() <= f.sparseness_bound,
                            "{at}: sparseness {} over bound {}",
                            a.sparseness(),
                            f.sparseness_bound
                        );
                        let audit = audit_parameters(rep);
                        ensure!(audit.passed(), "{at}: {audit}");
                        if c != Construction::General {
                            ensure!(
                                rep.shape.layered == Some((j, k)),
                                "{at}: shape {:?}",
                                rep.shape.layered
                            );
                        }
                        let target: Evaluator = a.clone().into();
                        let res = if n <= 4 {
                            equivalence_exhaustive(&source, &target, 20)
                        } else {
                            equivalence_random(&source, &target, 200, checked as u64)
                        }
                        .map_err(|e| e.to_string())?;
                        ensure!(res.is_equal(), "{at}: {res}");
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(format!(
        "{checked} compilations match their formulas exactly"
    ))
}

fn c5_skip_chain() -> Outcome {
    let nd = |var, goto0, goto1| LayerNode { var, goto0, goto1 };
    let bp = LayeredBp::new(
        3,
        3,
        vec![
            vec![nd(1, 1, 1), nd(2, 0, 2), nd(3, 2, 0)],
            vec![nd(2, 2, 1), nd(3, 0, 0), nd(1, 1, 2)],
            vec![nd(1, 2, 1), nd(2, 0, 2), nd(3, 1, 0)],
        ],
        vec![2],
    )
    .unwrap();
    let sigma = Alphabet::new("abc").unwrap();
    let c =
        compile_fixed_width_constd(&bp, &sigma, SkipRules::Occurring).map_err(|e| e.to_string())?;
    let rep = &c.report;
    let m = rep.segment_len;
    ensure!(
        (rep.produced.d, m) == (5, 11),
        "D={} m={}",
        rep.produced.d,
        m
    );
    let aut = &c.automaton;
    // node 2 of layer 2 sits in segment 4 and cuts 2 on every input
    let base = 4 * m;
    let segment_rule = |o: usize| {
        let omega = aut.sticky_end(o).unwrap().unwrap();
        omega[0] == 0 && !aut.rules_for(omega).is_empty()
    };
    for idx in 0..8 {
        let x = bits_of(idx, 3);
        let offs = aut.reachable_offsets(&x).unwrap();
        ensure!(offs.contains(&base), "x={x:?}: segment 4 not reached");
        let chain: Vec<usize> = offs.range(base..=base + 22).map(|o| o - base).collect();
        ensure!(chain == [0, 2, 7, 12, 17, 22], "x={x:?}: chain {chain:?}");
        for rel in [2, 7, 12, 17] {
            ensure!(
                !segment_rule(base + rel),
                "segment rule applicable at +{rel}"
            );
            let omega = aut.sticky_end(base + rel).unwrap().unwrap();
            ensure!(
                aut.rules_for(omega).iter().all(|r| r.dist == 5),
                "non-skip rule at +{rel}"
            );
        }
        ensure!(segment_rule(base + 22), "no segment rule at +22");
    }
    Ok("D=5 k=2 m=11, chain +2 +7 +12 +17 +22 on all 8 inputs".into())
}

fn c6_barrington() -> Outcome {
    let mut r = rng(6006);
    let mut pure = 0;
    for k in 0..200 {
        let n = 1 + k % 10;
        let depth = k % 4;
        let and_only = k % 2 == 0;
        let c = random_formula(&mut r, n, depth, and_only);
        let (cycles, _) = compile_layers(&c).map_err(|e| e.to_string())?;
        ensure!(cycles.is_valid(), "circuit {k}: cycle pair invalid");
        let pbp = barrington_compile(&c).map_err(|e| e.to_string())?;
        let depth = c.and_or_depth();
        ensure!(
            pbp.length() == 4usize.pow(depth as u32),
            "circuit {k}: length {} for depth {depth}",
            pbp.length()
        );
        ensure!(
            pbp.width() == WIDTH && WIDTH == 5,
            "circuit {k}: width {}",
            pbp.width()
        );
        ensure!(
            pbp.accept_node() == cycles.alpha.apply(0),
            "circuit {k}: accept node is not α(0)"
        );
        for idx in 0..1u64 << n {
            let x = bits_of(idx, n);
            let prod = pbp.product(&x).unwrap().ok_or("layer maps not bijective")?;
            let want = if c.eval(&x).unwrap() {
                cycles.alpha.clone()
            } else {
                benenson::perm::Perm::identity(5)
            };
            ensure!(prod == want, "circuit {k} x={x:?}: product is not α^f(x)");
        }
        exhaustive(c, pbp).map_err(|e| format!("circuit {k}: {e}"))?;
        pure += and_only as usize;
    }
    Ok(format!(
        "200 circuits ({pure} AND/NOT only), length 4^depth, products in {{id, α}}, all equivalent"
    ))
}

fn ceil_log2(x: usize) -> usize {
    let mut e = 0;
    while (1usize << e) < x {
        e += 1;
    }
    e
}

fn check_extraction(label: &str, aut: &BenensonAutomaton) -> Result<(usize, usize), String> {
    let (circuit, rep) = extract_circuit(aut).map_err(|e| format!("{label}: {e}"))?;
    ensure!(
        circuit.truth_table() == automaton_table(aut),
        "{label}: extracted circuit differs"
    );
    let d = aut.range();
    let q_star = aut.accept_pos() / d + 1;
    ensure!(
        rep.q_star == q_star,
        "{label}: q*={} expected {q_star}",
        rep.q_star
    );
    let want_levels = if q_star >= 2 {
        ceil_log2(q_star - 1)
    } else {
        0
    };
    ensure!(
        rep.b_levels == want_levels,
        "{label}: {} B levels, expected {want_levels}",
        rep.b_levels
    );
    let bound = 64 * ceil_log2(d + 1) * (1usize << d) * aut.len();
    ensure!(
        circuit.size() <= bound,
        "{label}: size {} over {bound}",
        circuit.size()
    );
    Ok((circuit.size(), bound))
}

fn c7_extraction() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (k, (_, c)) in three_input_corpus().iter().enumerate() {
        let (size, bound) = check_extraction(&format!("n=3 #{k}"), &c.automaton)?;
        worst = worst.max(size as f64 / bound as f64);
        count += 1;
    }
    for (k, (_, c)) in truncated_corpus().iter().enumerate() {
        let (size, bound) = check_extraction(&format!("n=10 #{k}"), &c.automaton)?;
        worst = worst.max(size as f64 / bound as f64);
        count += 1;
    }
    Ok(format!(
        "{count} automata extracted and equivalent; largest size/bound ratio {worst:.2e}"
    ))
}

fn c8_round_trip() -> Outcome {
    let mut r = rng(8008);
    let total = 120;
    for k in 0..total {
        let n = 1 + k % 8;
        let c = random_formula(&mut r, n, k % 4, false);
        let pbp = barrington_compile(&c).unwrap().normalize_goto0_identity();
        let aut = compile_permutation(&pbp, &dna(), SkipRules::Occurring)
            .map_err(|e| e.to_string())?
            .automaton;
        let (back, _) = extract_circuit(&aut).map_err(|e| e.to_string())?;
        ensure!(
            back.truth_table() == c.truth_table(),
            "circuit {k} (n={n}): round trip differs"
        );
    }
    Ok(format!("{total} circuits, n ≤ 8, depth ≤ 3"))
}

fn c9_stem_margin() -> Outcome {
    let mut r = rng(9009);
    let mut with_convention = [0usize; 4];
    let mut min_slack = i64::MAX;
    for k in 0..48 {
        let n = 2 + k % 11;
        let j = [2usize, 3, 5][k % 3];
        let len = 1 + k % 5;
        let layered = random_layered(&mut r, n, j, len);
        let pbp = random_pbp(&mut r, n, j, len).normalize_goto0_identity();
        let runs = [
            compile_fixed_width(&layered, &dna()),
            compile_fixed_width_constd(&layered, &dna(), SkipRules::Occurring),
            compile_permutation(&pbp, &dna(), SkipRules::Occurring),
            compile_sparse1(&pbp, &dna(), SkipRules::Occurring),
        ];
        for (slot, run) in runs.into_iter().enumerate() {
            let c = run.map_err(|e| e.to_string())?;
            if !c.report.reject_convention {
                continue;
            }
            with_convention[slot] += 1;
            let m = c.report.segment_len as i64;
            match stem_margin(&c.automaton, 0).map_err(|e| e.to_string())? {
                StemMargin::Defined {
                    margin, exhaustive, ..
                } => {
                    ensure!(exhaustive, "n={n} not scanned exhaustively");
                    ensure!(
                        margin >= m,
                        "{} n={n} J={j}: margin {margin} < m={m}",
                        c.report.construction
                    );
                    min_slack = min_slack.min(margin - m);
                }
                StemMargin::Undefined { .. } => {}
            }
        }
    }
    ensure!(
        with_convention.iter().all(|&c| c > 0),
        "some construction never used the convention: {with_convention:?}"
    );
    Ok(format!(
        "{with_convention:?} compilations (fixed, constd, perm, sparse1) under the convention; min margin − m = {min_slack}"
    ))
}

fn c10_wetlab() -> Outcome {
    let profile = EnzymeProfile::foki();
    let corpus = three_input_corpus();
    let mut seven = 0;
    for (k, (_, c)) in corpus.iter().enumerate() {
        let a = &c.automaton;
        let map = BaseMap::default_for(a.alphabet()).unwrap();
        let text = emit_molecules(a, &profile, &map).map_err(|e| format!("#{k}: {e}"))?;
        let back = parse_molecules(&text).map_err(|e| format!("#{k}: {e}"))?;
        ensure!(back.automaton == *a, "#{k}: re-parsed automaton differs");
        ensure!(
            write_ben(&back.automaton, "") == write_ben(a, ""),
            "#{k}: serialization differs"
        );
        for rule in a.rules().iter().filter(|r| r.dist == 7) {
            let m = rule_molecule(rule, &profile, &map).unwrap();
            ensure!(m.spacer == 2, "#{k}: d=7 spacer {}", m.spacer);
            seven += 1;
        }
    }
    let sigma = dna();
    let probe = CuttingRule::new(1, true, sigma.encode("TGGC").unwrap(), 7);
    let m = rule_molecule(&probe, &profile, &BaseMap::default_for(&sigma).unwrap()).unwrap();
    ensure!(m.spacer == 2, "probe spacer {}", m.spacer);

    let base = &corpus[0].1.automaton;
    let mut rules: Vec<CuttingRule> = base.rules().to_vec();
    let ends: Vec<Vec<u8>> = rules.iter().map(|r| r.sticky.clone()).take(5).collect();
    for (t, omega) in ends.into_iter().enumerate() {
        rules.push(CuttingRule::new(1 + t % base.n(), t % 2 == 0, omega, 1));
    }
    let injected = BenensonAutomaton::new(
        base.alphabet().clone(),
        base.n(),
        base.sticky_size(),
        base.range(),
        base.state().to_vec(),
        rules,
        base.accept_pos(),
    )
    .unwrap();
    let report = plausibility_check(&injected, &profile, None);
    let expected: Vec<CuttingRule> = injected
        .rules()
        .iter()
        .filter(|r| r.dist == 1)
        .cloned()
        .collect();
    ensure!(
        expected.len() >= 5,
        "injection produced {} d=1 rules",
        expected.len()
    );
    ensure!(
        report.short_cuts == expected,
        "flagged {:?}",
        report.short_cuts
    );
    Ok(format!(
        "{} bundles round-trip, {seven} d=7 rules with spacer 2, {} d=1 rules flagged",
        corpus.len(),
        expected.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("permutation pipeline constants", c1_permutation_constants),
        ("1-sparse width 3 over 22 inputs", c2_sparse_wide),
        ("1-sparse width 5 constants", c3_width5_sparse),
        ("parameter formula grid", c4_formula_grid),
        ("skip chain mechanics", c5_skip_chain),
        ("width-5 permutation programs", c6_barrington),
        ("circuit extraction", c7_extraction),
        ("circuit round trip", c8_round_trip),
        ("stem margin", c9_stem_margin),
        ("DNA bundle round trip", c10_wetlab),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail}; {secs:.1}s)", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why}; {secs:.1}s)", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
