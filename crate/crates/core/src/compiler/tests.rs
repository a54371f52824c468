use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::automaton::bits_of;
use crate::fixtures::{nine_node_general, width3_layered};
use crate::gen::{random_general, random_layered, random_pbp};
use crate::machines::BpNode;

fn dna() -> Alphabet {
    Alphabet::dna()
}

/// Offsets reachable from `start` by repeated single cuts.
fn reach_from(aut: &BenensonAutomaton, x: &[bool], start: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([start]);
    let mut todo = vec![start];
    while let Some(j) = todo.pop() {
        for k in aut.step(x, j).unwrap() {
            if seen.insert(k) {
                todo.push(k);
            }
        }
    }
    seen
}

fn assert_equivalent(aut: &BenensonAutomaton, eval: impl Fn(&[bool]) -> bool) {
    let n = aut.n();
    for idx in 0..1u64 << n {
        let x = bits_of(idx, n);
        let run = aut.run(&x).unwrap();
        assert_eq!(run.accepted, eval(&x), "x = {x:?}");
        assert_eq!(
            run.accepted,
            aut.reachable_offsets(&x)
                .unwrap()
                .contains(&aut.accept_pos())
        );
    }
}

fn check(c: &Compiled) {
    assert!(c.automaton.is_deterministic());
    assert_eq!(
        c.report.produced,
        c.report.formula.sdl,
        "{}",
        c.report.to_text(false)
    );
    assert!(c.report.sparseness <= c.report.formula.sparseness_bound);
    assert_eq!(c.report.produced.l, c.automaton.len());
}

#[test]
fn general_nine_nodes() {
    let bp = nine_node_general();
    let c = compile_general(&bp, &dna()).unwrap();
    check(&c);
    let sdl = c.report.produced;
    assert_eq!((sdl.s, sdl.d, sdl.l), (2, 16, 18));
    assert_eq!(c.automaton.accept_pos(), 16);
    assert!(!c.report.accept_relocated);
    assert_equivalent(&c.automaton, |x| bp.eval(x).unwrap());
}

#[test]
fn general_single_node_accepts_everything() {
    let bp = GeneralBp::new(2, vec![BpNode::Accept], 0).unwrap();
    let c = compile_general(&bp, &dna()).unwrap();
    assert_eq!(c.automaton.accept_pos(), 0);
    assert_equivalent(&c.automaton, |_| true);
}

#[test]
fn general_relocates_and_merges() {
    use BpNode::*;
    let nodes = vec![
        Var {
            var: 1,
            goto0: 3,
            goto1: 1,
        },
        Accept,
        Var {
            var: 2,
            goto0: 1,
            goto1: 4,
        },
        Var {
            var: 2,
            goto0: 2,
            goto1: 1,
        },
        Reject,
    ];
    let bp = GeneralBp::new(2, nodes, 0).unwrap();
    let c = compile_general(&bp, &Alphabet::new("abc").unwrap()).unwrap();
    check(&c);
    assert!(c.report.accept_relocated);
    assert_equivalent(&c.automaton, |x| bp.eval(x).unwrap());
}

#[test]
fn fixed_width_formulas() {
    let bp = width3_layered();
    let c = compile_fixed_width(&bp, &dna()).unwrap();
    check(&c);
    assert_eq!((c.report.produced.s, c.report.produced.d), (4, 20));
    assert_equivalent(&c.automaton, |x| bp.eval(x).unwrap());

    let c = compile_fixed_width_constd(&bp, &dna(), SkipRules::Occurring).unwrap();
    check(&c);
    assert_eq!((c.report.produced.s, c.report.produced.d), (6, 5));
    assert_equivalent(&c.automaton, |x| bp.eval(x).unwrap());
}

#[test]
fn single_reading_layer() {
    let nd = |var, goto0, goto1| LayerNode { var, goto0, goto1 };
    let bp = LayeredBp::new(1, 2, vec![vec![nd(1, 0, 1), nd(1, 0, 0)]], vec![1]).unwrap();
    for c in [
        compile_fixed_width(&bp, &dna()).unwrap(),
        compile_fixed_width_constd(&bp, &dna(), SkipRules::Occurring).unwrap(),
    ] {
        check(&c);
        assert_equivalent(&c.automaton, |x| x[0]);
    }
}

#[test]
fn permutation_and_sparse1_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pbp = random_pbp(&mut rng, 3, 5, 6).normalize_goto0_identity();
    let c = compile_permutation(&pbp, &dna(), SkipRules::Occurring).unwrap();
    check(&c);
    assert_eq!((c.report.produced.s, c.report.produced.d), (4, 9));
    assert_equivalent(&c.automaton, |x| pbp.eval(x).unwrap());

    let c = compile_sparse1(&pbp, &dna(), SkipRules::Occurring).unwrap();
    check(&c);
    assert_eq!((c.report.produced.s, c.report.produced.d), (4, 17));
    assert_eq!(c.report.sparseness, 1);
    assert_equivalent(&c.automaton, |x| pbp.eval(x).unwrap());
}

#[test]
fn formula_instances() {
    let layered = |n, j, k| ProgramShape {
        n,
        nodes: (k + 1) * j,
        layered: Some((j, k)),
    };
    let f = formula(Construction::Sparse1, &layered(22, 3, 10), 4);
    assert_eq!((f.sdl.s, f.sdl.d), (4, 9));
    let f = formula(Construction::Sparse1, &layered(18, 5, 10), 4);
    assert_eq!((f.sdl.s, f.sdl.d), (4, 17));
    let f = formula(Construction::Sparse1, &layered(19, 5, 10), 4);
    assert_eq!(f.sdl.s, 5);
    // sticky ends of size 7 cover 81 inputs at width 5
    let f = formula(Construction::Permutation, &layered(81, 5, 4), 4);
    assert_eq!((f.sdl.s, f.sdl.d), (7, 9));
    let f = formula(Construction::Permutation, &layered(82, 5, 4), 4);
    assert_eq!(f.sdl.s, 8);
    let f = formula(Construction::FixedWidthConstD, &layered(4, 3, 2), 4);
    assert_eq!((f.sdl.s, f.sdl.d), (6, 5));
}

#[test]
fn non_identity_goto0_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pbp = (0..)
        .map(|_| random_pbp(&mut rng, 2, 3, 3))
        .find(|p| !p.is_goto0_identity())
        .unwrap();
    assert!(matches!(
        compile_permutation(&pbp, &dna(), SkipRules::Occurring),
        Err(CompileError::Precondition(_))
    ));
    let two = Alphabet::new("ab").unwrap();
    assert_eq!(
        compile_sparse1(&pbp.normalize_goto0_identity(), &two, SkipRules::Occurring).unwrap_err(),
        CompileError::UnsupportedAlphabet(2)
    );
}

/// Width-3 program in which node 2 of layer 2 is always visited and cuts 2
/// to node 1 of layer 3.
fn skip_chain_program() -> LayeredBp {
    let nd = |var, goto0, goto1| LayerNode { var, goto0, goto1 };
    let layers = vec![
        vec![nd(1, 1, 1), nd(2, 0, 2), nd(3, 2, 0)],
        vec![nd(2, 2, 1), nd(3, 0, 0), nd(1, 1, 2)],
        vec![nd(1, 2, 1), nd(2, 0, 2), nd(3, 1, 0)],
    ];
    LayeredBp::new(3, 3, layers, vec![2]).unwrap()
}

#[test]
fn skip_chain_geometry() {
    let sigma = Alphabet::new("abc").unwrap();
    let c =
        compile_fixed_width_constd(&skip_chain_program(), &sigma, SkipRules::Occurring).unwrap();
    check(&c);
    assert_eq!(c.report.produced.d, 5);
    assert_eq!(c.report.produced.s, 8);
    assert_eq!(c.report.segment_len, 11);
    let aut = &c.automaton;
    // node (2, 2) is segment 4; every input reaches it
    let base = 4 * 11;
    for idx in 0..8 {
        let x = bits_of(idx, 3);
        let offs = aut.reachable_offsets(&x).unwrap();
        assert!(offs.contains(&base));
        let window: Vec<usize> = offs.range(base..=base + 22).map(|o| o - base).collect();
        assert_eq!(window, vec![0, 2, 7, 12, 17, 22]);
        for rel in [2, 7, 12, 17] {
            let omega = aut.sticky_end(base + rel).unwrap().unwrap();
            assert_ne!(omega[0], 0);
            assert!(aut.rules_for(omega).iter().all(|r| r.dist == 5));
        }
        let omega = aut.sticky_end(base + 22).unwrap().unwrap();
        assert_eq!(omega[0], 0);
        assert!(!aut.rules_for(omega).is_empty());
    }
}

/// For every segment start `q·m` and cut `d ≤ D` whose target segment exists,
/// the skip rules carry `q·m + d` to `(q + d)·m` and stop there.
fn assert_skip_invariant(c: &Compiled) {
    let aut = &c.automaton;
    let m = c.report.segment_len;
    let segs = aut.len() / m;
    let d_max = aut.range();
    let x = vec![false; aut.n()];
    for q in 0..segs {
        for d in 1..=d_max {
            if q + d >= segs {
                continue;
            }
            let start = q * m + d;
            let reached = reach_from(aut, &x, start);
            assert!(reached.contains(&((q + d) * m)), "q={q} d={d}");
            assert!(reached
                .iter()
                .filter(|&&o| o < (q + d) * m)
                .all(|o| o % m != 0));
        }
    }
}

#[test]
fn skip_invariant_on_compiled_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sigma = Alphabet::new("abc").unwrap();
    let bp = random_layered(&mut rng, 3, 3, 4);
    assert_skip_invariant(&compile_fixed_width_constd(&bp, &sigma, SkipRules::Occurring).unwrap());
    let pbp = random_pbp(&mut rng, 4, 3, 4).normalize_goto0_identity();
    assert_skip_invariant(&compile_permutation(&pbp, &dna(), SkipRules::Occurring).unwrap());
    assert_skip_invariant(&compile_sparse1(&pbp, &dna(), SkipRules::Exhaustive).unwrap());
}

#[test]
fn exhaustive_skip_rules_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pbp = random_pbp(&mut rng, 3, 3, 5).normalize_goto0_identity();
    let a = compile_permutation(&pbp, &dna(), SkipRules::Occurring).unwrap();
    let b = compile_permutation(&pbp, &dna(), SkipRules::Exhaustive).unwrap();
    check(&b);
    assert!(b.report.skip_rules > a.report.skip_rules);
    assert_eq!(a.automaton.state(), b.automaton.state());
    assert_equivalent(&b.automaton, |x| pbp.eval(x).unwrap());
}

#[test]
fn full_code_space_falls_back() {
    // n = 1, J = 2, |Σ| = 4: all three keys (1, Δ) are used and S = 2 gives
    // exactly three code words
    let nd = |goto0, goto1| LayerNode {
        var: 1,
        goto0,
        goto1,
    };
    let layers = vec![
        vec![nd(0, 0), nd(1, 1)],
        vec![nd(0, 1), nd(1, 0)],
        vec![nd(0, 1), nd(1, 0)],
    ];
    let bp = PermutationBp::new(LayeredBp::new(1, 2, layers, vec![1]).unwrap()).unwrap();
    let c = compile_permutation(&bp, &dna(), SkipRules::Occurring).unwrap();
    check(&c);
    assert!(matches!(c.report.sink, SinkCode::Reused(_)));
    assert!(!c.report.reject_convention);
    assert_equivalent(&c.automaton, |x| bp.eval(x).unwrap());
}

#[test]
fn accept_at_start_position_is_kept() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let pbp = (0..)
        .map(|_| random_pbp(&mut rng, 3, 3, 4).normalize_goto0_identity())
        .find(|p| p.accept_node() == 0)
        .unwrap();
    for c in [
        compile_permutation(&pbp, &dna(), SkipRules::Occurring).unwrap(),
        compile_sparse1(&pbp, &dna(), SkipRules::Occurring).unwrap(),
    ] {
        check(&c);
        assert!(!c.report.reject_convention);
        assert_equivalent(&c.automaton, |x| pbp.eval(x).unwrap());
    }
}

#[test]
fn report_text_lists_segments() {
    let c = compile_fixed_width(&width3_layered(), &dna()).unwrap();
    let text = c.report.to_text(true);
    assert!(text.starts_with("construction fixed\n"));
    assert!(text.contains("segment L3N3 32\n"));
    assert_eq!(
        text.lines().filter(|l| l.starts_with("segment ")).count(),
        9
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn general_programs_compile_faithfully(seed in any::<u64>(), n in 1usize..5, h in 3usize..14) {
        let bp = random_general(&mut ChaCha8Rng::seed_from_u64(seed), n, h);
        let c = compile_general(&bp, &dna()).unwrap();
        check(&c);
        assert_equivalent(&c.automaton, |x| bp.eval(x).unwrap());
    }

    #[test]
    fn layered_programs_compile_faithfully(
        seed in any::<u64>(), n in 1usize..5, j in 1usize..5, k in 1usize..6, three in any::<bool>()
    ) {
        let sigma = if three { Alphabet::new("abc").unwrap() } else { dna() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bp = random_layered(&mut rng, n, j, k);
        prop_assume!(j > 1 || !bp.accept().is_empty());
        for c in [
            compile_fixed_width(&bp, &sigma).unwrap(),
            compile_fixed_width_constd(&bp, &sigma, SkipRules::Occurring).unwrap(),
        ] {
            check(&c);
            assert_equivalent(&c.automaton, |x| bp.eval(x).unwrap());
        }
    }

    #[test]
    fn permutation_programs_compile_faithfully(
        seed in any::<u64>(), n in 1usize..6, j in 1usize..6, k in 1usize..6, three in any::<bool>()
    ) {
        let sigma = if three { Alphabet::new("abc").unwrap() } else { dna() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pbp = random_pbp(&mut rng, n, j, k).normalize_goto0_identity();
        let perm = compile_permutation(&pbp, &sigma, SkipRules::Occurring).unwrap();
        let sparse = compile_sparse1(&pbp, &sigma, SkipRules::Occurring).unwrap();
        for c in [&perm, &sparse] {
            check(c);
            assert_equivalent(&c.automaton, |x| pbp.eval(x).unwrap());
        }
        prop_assert_eq!(sparse.report.sparseness, 1);
    }
}
