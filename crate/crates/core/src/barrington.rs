//! Width-5 permutation branching programs from circuits.
//!
//! A program *θ-computes* `f` when the product of its selected layer maps is
//! `θ` on inputs with `f(x) = 1` and the identity otherwise.

use std::collections::HashMap;

use thiserror::Error;

use crate::machines::{Circuit, Gate, MachineError, PermutationBp};
use crate::perm::Perm;

pub const WIDTH: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BarringtonError {
    #[error("circuit has no inputs; a permutation program needs a variable to read")]
    NoInputs,
    #[error(transparent)]
    Machine(#[from] MachineError),
}

/// Three 5-cycles with `beta · gamma · beta⁻¹ · gamma⁻¹ = alpha`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclePair {
    pub alpha: Perm,
    pub beta: Perm,
    pub gamma: Perm,
}

impl CyclePair {
    pub fn is_valid(&self) -> bool {
        let comm = commutator(&self.beta, &self.gamma);
        [&self.alpha, &self.beta, &self.gamma]
            .iter()
            .all(|p| p.degree() == WIDTH && p.is_full_cycle())
            && comm == self.alpha
    }
}

pub fn commutator(b: &Perm, g: &Perm) -> Perm {
    b.then(g).then(&b.inverse()).then(&g.inverse())
}

pub fn select_cycles() -> CyclePair {
    let beta = Perm::from_cycles(WIDTH, &[&[1, 2, 3, 4, 5]]);
    let gamma = Perm::from_cycles(WIDTH, &[&[1, 3, 5, 4, 2]]);
    let alpha = commutator(&beta, &gamma);
    CyclePair { alpha, beta, gamma }
}

type Layer = (usize, Perm, Perm);

struct Compiler<'a> {
    circuit: &'a Circuit,
    cycles: CyclePair,
    all: Vec<Perm>,
    conj: HashMap<(Perm, Perm), Perm>,
    depth: Vec<usize>,
}

impl Compiler<'_> {
    /// Smallest `rho` in lexicographic order with `rho⁻¹ · from · rho = to`.
    fn conjugator(&mut self, from: &Perm, to: &Perm) -> Perm {
        let key = (from.clone(), to.clone());
        if let Some(r) = self.conj.get(&key) {
            return r.clone();
        }
        let r = self
            .all
            .iter()
            .find(|r| from.conjugate_by(r) == *to)
            .expect("5-cycles are conjugate")
            .clone();
        self.conj.insert(key, r.clone());
        r
    }

    fn constant(theta: &Perm, on: bool) -> Layer {
        let p = if on {
            theta.clone()
        } else {
            Perm::identity(WIDTH)
        };
        (1, p.clone(), p)
    }

    fn pad(mut layers: Vec<Layer>, len: usize) -> Vec<Layer> {
        while layers.len() < len {
            layers.push(Self::constant(&Perm::identity(WIDTH), false));
        }
        layers
    }

    /// Left-multiply the program by `pre` and right-multiply by `post`.
    fn wrap(layers: &mut [Layer], pre: &Perm, post: &Perm) {
        let first = &mut layers[0];
        first.1 = pre.then(&first.1);
        first.2 = pre.then(&first.2);
        let last = layers.last_mut().unwrap();
        last.1 = last.1.then(post);
        last.2 = last.2.then(post);
    }

    fn negate(&mut self, mut layers: Vec<Layer>, theta: &Perm) -> Vec<Layer> {
        // product becomes id (f = 1) or theta⁻¹ (f = 0), then relabel
        let inv = theta.inverse();
        Self::wrap(&mut layers, &Perm::identity(WIDTH), &inv);
        let rho = self.conjugator(&inv, theta);
        Self::wrap(&mut layers, &rho.inverse(), &rho);
        layers
    }

    /// Commutator of four sub-programs; with `negated` the children compute
    /// `¬a` and `¬b`.
    fn commute(
        &mut self,
        a: usize,
        b: usize,
        theta: &Perm,
        depth: usize,
        negated: bool,
    ) -> Vec<Layer> {
        let rho = self.conjugator(&self.cycles.alpha.clone(), theta);
        let beta = self.cycles.beta.conjugate_by(&rho);
        let gamma = self.cycles.gamma.conjugate_by(&rho);
        let part = 4usize.pow(depth as u32 - 1);
        let mut out = Vec::with_capacity(4 * part);
        for (g, target) in [
            (a, beta.clone()),
            (b, gamma.clone()),
            (a, beta.inverse()),
            (b, gamma.inverse()),
        ] {
            let mut sub = self.gate(g, &target);
            if negated {
                sub = self.negate(sub, &target);
            }
            out.extend(Self::pad(sub, part));
        }
        out
    }

    fn gate(&mut self, g: usize, theta: &Perm) -> Vec<Layer> {
        let depth = self.depth[g];
        match self.circuit.gates()[g] {
            Gate::Input(i) => vec![(i, Perm::identity(WIDTH), theta.clone())],
            Gate::Const(b) => vec![Self::constant(theta, b)],
            Gate::Not(a) => {
                let sub = self.gate(a, theta);
                self.negate(sub, theta)
            }
            Gate::And(a, b) => self.commute(a, b, theta, depth, false),
            Gate::Or(a, b) => {
                // a ∨ b = ¬(¬a ∧ ¬b); the NOTs cost no length
                let inner = self.commute(a, b, theta, depth, true);
                self.negate(inner, theta)
            }
        }
    }
}

/// AND/OR depth of every gate.
fn gate_depths(c: &Circuit) -> Vec<usize> {
    let mut d = vec![0usize; c.gates().len()];
    for (k, g) in c.gates().iter().enumerate() {
        d[k] = match *g {
            Gate::Input(_) | Gate::Const(_) => 0,
            Gate::Not(a) => d[a],
            Gate::And(a, b) | Gate::Or(a, b) => 1 + d[a].max(d[b]),
        };
    }
    d
}

/// Layer sequence `alpha`-computing the circuit, before accept marking.
pub fn compile_layers(c: &Circuit) -> Result<(CyclePair, Vec<Layer>), BarringtonError> {
    if c.n() == 0 {
        return Err(BarringtonError::NoInputs);
    }
    let cycles = select_cycles();
    let alpha = cycles.alpha.clone();
    let mut comp = Compiler {
        circuit: c,
        cycles: cycles.clone(),
        all: Perm::all(WIDTH),
        conj: HashMap::new(),
        depth: gate_depths(c),
    };
    let layers = comp.gate(c.output(), &alpha);
    Ok((cycles, layers))
}

/// Width-5 permutation program of length exactly `4^C`, `C` the AND/OR depth
/// of the circuit. Start node 0, accept node `alpha(0)`.
pub fn barrington_compile(c: &Circuit) -> Result<PermutationBp, BarringtonError> {
    let (cycles, layers) = compile_layers(c)?;
    let accept = cycles.alpha.apply(0);
    assert_ne!(accept, 0, "alpha moves the start node");
    Ok(PermutationBp::from_perms(c.n(), WIDTH, &layers, accept)?)
}
