//! Seeded random machines for tests, benchmarks and the acceptance corpus.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::machines::{BpNode, Circuit, Gate, GeneralBp, LayerNode, LayeredBp, PermutationBp};
use crate::perm::Perm;

/// Formula with AND/OR depth exactly `depth`. Literals are inputs, negated
/// with probability 1/4; gates are negated with probability 1/4. With
/// `and_only` every binary gate is an AND.
pub fn random_formula<R: Rng>(rng: &mut R, n: usize, depth: usize, and_only: bool) -> Circuit {
    assert!(n >= 1);
    let mut gates = Vec::new();
    let out = formula_rec(rng, n, depth, and_only, &mut gates);
    Circuit::new(n, gates, out).expect("generated circuit is well formed")
}

fn formula_rec<R: Rng>(
    rng: &mut R,
    n: usize,
    depth: usize,
    and_only: bool,
    gates: &mut Vec<Gate>,
) -> usize {
    let g = if depth == 0 {
        gates.push(Gate::Input(rng.gen_range(1..=n)));
        gates.len() - 1
    } else {
        let other = rng.gen_range(0..depth);
        let (da, db) = if rng.gen() {
            (depth - 1, other)
        } else {
            (other, depth - 1)
        };
        let a = formula_rec(rng, n, da, and_only, gates);
        let b = formula_rec(rng, n, db, and_only, gates);
        gates.push(if and_only || rng.gen() {
            Gate::And(a, b)
        } else {
            Gate::Or(a, b)
        });
        gates.len() - 1
    };
    if rng.gen_ratio(1, 4) {
        gates.push(Gate::Not(g));
        gates.len() - 1
    } else {
        g
    }
}

/// DAG circuit with `extra` gates on top of the `n` inputs; each gate picks
/// its operands uniformly among earlier gates. The output is the last gate.
pub fn random_circuit<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Circuit {
    assert!(n >= 1);
    let mut gates: Vec<Gate> = (1..=n).map(Gate::Input).collect();
    for _ in 0..extra {
        let len = gates.len();
        let a = rng.gen_range(0..len);
        let b = rng.gen_range(0..len);
        gates.push(match rng.gen_range(0..7) {
            0 | 1 => Gate::Not(a),
            2 | 3 => Gate::And(a, b),
            4 | 5 => Gate::Or(a, b),
            _ => Gate::Const(rng.gen()),
        });
    }
    let out = gates.len() - 1;
    Circuit::new(n, gates, out).expect("generated circuit is well formed")
}

fn shuffled<R: Rng>(rng: &mut R, width: usize) -> Perm {
    let mut v: Vec<usize> = (0..width).collect();
    v.shuffle(rng);
    Perm::new(v).unwrap()
}

/// Permutation program with uniformly random layer maps, variables and
/// accept node.
pub fn random_pbp<R: Rng>(rng: &mut R, n: usize, width: usize, len: usize) -> PermutationBp {
    let layers: Vec<_> = (0..len)
        .map(|_| {
            let var = rng.gen_range(1..=n);
            (var, shuffled(rng, width), shuffled(rng, width))
        })
        .collect();
    let accept = rng.gen_range(0..width);
    PermutationBp::from_perms(n, width, &layers, accept).unwrap()
}

/// Layered program with arbitrary edges and a random nonempty accept set.
pub fn random_layered<R: Rng>(rng: &mut R, n: usize, width: usize, len: usize) -> LayeredBp {
    let layers = (0..len)
        .map(|_| {
            (0..width)
                .map(|_| LayerNode {
                    var: rng.gen_range(1..=n),
                    goto0: rng.gen_range(0..width),
                    goto1: rng.gen_range(0..width),
                })
                .collect()
        })
        .collect();
    let mut accept: Vec<usize> = (0..width).filter(|_| rng.gen_ratio(1, 3)).collect();
    if accept.is_empty() {
        accept.push(rng.gen_range(0..width));
    }
    LayeredBp::new(n, width, layers, accept).unwrap()
}

/// Topologically indexed general program of `h ≥ 3` nodes. The last three
/// nodes are terminals (two accepts and a reject, in random order); every
/// other node reads a random variable and points to random later nodes.
pub fn random_general<R: Rng>(rng: &mut R, n: usize, h: usize) -> GeneralBp {
    assert!(h >= 3);
    let mut terminals = [BpNode::Accept, BpNode::Accept, BpNode::Reject];
    terminals.shuffle(rng);
    let mut nodes: Vec<BpNode> = (0..h - 3)
        .map(|q| BpNode::Var {
            var: rng.gen_range(1..=n),
            goto0: rng.gen_range(q + 1..h),
            goto1: rng.gen_range(q + 1..h),
        })
        .collect();
    nodes.extend(terminals);
    GeneralBp::new(n, nodes, 0).unwrap()
}
