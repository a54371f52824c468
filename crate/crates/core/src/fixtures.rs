//! Small hand-built machines used by tests, examples and the README.

use crate::automaton::{Alphabet, BenensonAutomaton, CuttingRule};
use crate::machines::{BpNode, Circuit, Gate, GeneralBp, LayerNode, LayeredBp};

/// Σ = {a,b,c}, S = 2, D = 4, σ = `abacbc`, p = 6, rules
/// `(1,1,ab,2)` and `(1,1,ac,4)`. Computes `f(x) = x1`.
pub fn toy_automaton() -> BenensonAutomaton {
    let abc = Alphabet::new("abc").unwrap();
    let rules = vec![
        CuttingRule::new(1, true, abc.encode("ab").unwrap(), 2),
        CuttingRule::new(1, true, abc.encode("ac").unwrap(), 4),
    ];
    BenensonAutomaton::new(
        abc.clone(),
        1,
        2,
        4,
        abc.encode("abacbc").unwrap(),
        rules,
        6,
    )
    .unwrap()
}

/// A 9-node general program over 4 inputs, already topologically indexed,
/// with a single accept node at the end.
pub fn nine_node_general() -> GeneralBp {
    use BpNode::*;
    let nodes = vec![
        Var {
            var: 1,
            goto0: 1,
            goto1: 2,
        },
        Var {
            var: 2,
            goto0: 3,
            goto1: 4,
        },
        Var {
            var: 3,
            goto0: 4,
            goto1: 5,
        },
        Var {
            var: 3,
            goto0: 7,
            goto1: 6,
        },
        Var {
            var: 4,
            goto0: 6,
            goto1: 8,
        },
        Var {
            var: 2,
            goto0: 8,
            goto1: 7,
        },
        Var {
            var: 4,
            goto0: 7,
            goto1: 8,
        },
        Reject,
        Accept,
    ];
    GeneralBp::new(4, nodes, 0).unwrap()
}

/// Width-3 program of 9 nodes over 4 inputs: two reading layers and a
/// terminal layer whose last node accepts.
pub fn width3_layered() -> LayeredBp {
    let nd = |var, goto0, goto1| LayerNode { var, goto0, goto1 };
    let layers = vec![
        vec![nd(1, 0, 2), nd(2, 1, 1), nd(3, 2, 0)],
        vec![nd(2, 0, 2), nd(4, 2, 1), nd(3, 1, 2)],
    ];
    LayeredBp::new(4, 3, layers, vec![2]).unwrap()
}

/// `AND(x1, x2)`.
pub fn and2() -> Circuit {
    Circuit::new(2, vec![Gate::Input(1), Gate::Input(2), Gate::And(0, 1)], 2).unwrap()
}
