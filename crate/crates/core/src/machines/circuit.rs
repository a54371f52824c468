use std::collections::HashMap;

use super::MachineError;

/// A gate of a fan-in-2 AND/OR/NOT circuit. Operands index earlier gates;
/// `Input` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    Input(usize),
    Const(bool),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
}

impl Gate {
    fn operands(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Gate::Input(_) | Gate::Const(_) => (None, None),
            Gate::Not(a) => (Some(a), None),
            Gate::And(a, b) | Gate::Or(a, b) => (Some(a), Some(b)),
        };
        a.into_iter().chain(b)
    }

    fn is_logic(&self) -> bool {
        matches!(self, Gate::Not(_) | Gate::And(..) | Gate::Or(..))
    }
}

/// Topologically ordered circuit with one output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    names: Vec<String>,
    output: usize,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>, output: usize) -> Result<Self, MachineError> {
        let names = (0..gates.len()).map(|k| format!("g{k}")).collect();
        Circuit::with_names(n, gates, names, output)
    }

    pub fn with_names(
        n: usize,
        gates: Vec<Gate>,
        names: Vec<String>,
        output: usize,
    ) -> Result<Self, MachineError> {
        if names.len() != gates.len() {
            return Err(MachineError::MalformedCircuit(
                "one name per gate required".into(),
            ));
        }
        for (k, g) in gates.iter().enumerate() {
            if let Gate::Input(i) = g {
                if *i == 0 || *i > n {
                    return Err(MachineError::MalformedCircuit(format!(
                        "gate {k} reads input {i} outside [1, {n}]"
                    )));
                }
            }
            if let Some(bad) = g.operands().find(|&a| a >= k) {
                return Err(MachineError::MalformedCircuit(format!(
                    "gate {k} references gate {bad}, which does not precede it"
                )));
            }
        }
        if output >= gates.len() {
            return Err(MachineError::MalformedCircuit(format!(
                "output references missing gate {output}"
            )));
        }
        Ok(Circuit {
            n,
            gates,
            names,
            output,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn output(&self) -> usize {
        self.output
    }

    /// Number of NOT/AND/OR gates.
    pub fn size(&self) -> usize {
        self.gates.iter().filter(|g| g.is_logic()).count()
    }

    pub fn eval(&self, x: &[bool]) -> Result<bool, MachineError> {
        if x.len() != self.n {
            return Err(MachineError::InputLength {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut val = vec![false; self.output + 1];
        for (k, g) in self.gates[..=self.output].iter().enumerate() {
            val[k] = match *g {
                Gate::Input(i) => x[i - 1],
                Gate::Const(b) => b,
                Gate::Not(a) => !val[a],
                Gate::And(a, b) => val[a] && val[b],
                Gate::Or(a, b) => val[a] || val[b],
            };
        }
        Ok(val[self.output])
    }

    /// Bit-sliced evaluation of 64 inputs at once: `lanes[i]` holds variable
    /// `i+1` across the 64 lanes.
    pub fn eval_lanes(&self, lanes: &[u64]) -> u64 {
        assert_eq!(lanes.len(), self.n);
        let mut val = vec![0u64; self.output + 1];
        for (k, g) in self.gates[..=self.output].iter().enumerate() {
            val[k] = match *g {
                Gate::Input(i) => lanes[i - 1],
                Gate::Const(b) => {
                    if b {
                        !0
                    } else {
                        0
                    }
                }
                Gate::Not(a) => !val[a],
                Gate::And(a, b) => val[a] & val[b],
                Gate::Or(a, b) => val[a] | val[b],
            };
        }
        val[self.output]
    }

    fn depth_with(&self, count_not: bool) -> usize {
        let mut d = vec![0usize; self.output + 1];
        for (k, g) in self.gates[..=self.output].iter().enumerate() {
            let below = g.operands().map(|a| d[a]).max().unwrap_or(0);
            d[k] = match g {
                Gate::Input(_) | Gate::Const(_) => 0,
                Gate::Not(_) if !count_not => below,
                _ => below + 1,
            };
        }
        d[self.output]
    }

    /// Longest input-to-output path counting NOT, AND and OR gates.
    pub fn depth(&self) -> usize {
        self.depth_with(true)
    }

    /// Longest path counting only AND and OR gates.
    pub fn and_or_depth(&self) -> usize {
        self.depth_with(false)
    }

    /// Truth table in lexicographic input order (`x_1` most significant).
    pub fn truth_table(&self) -> Vec<bool> {
        let total = 1u64 << self.n;
        let mut out = Vec::with_capacity(total as usize);
        let mut base = 0;
        while base < total {
            let lanes: Vec<u64> = (0..self.n)
                .map(|i| {
                    (0..64u64)
                        .filter(|k| (base + k) >> (self.n - 1 - i) & 1 == 1)
                        .fold(0, |acc, k| acc | 1 << k)
                })
                .collect();
            let v = self.eval_lanes(&lanes);
            let take = (total - base).min(64);
            out.extend((0..take).map(|k| v >> k & 1 == 1));
            base += 64;
        }
        out
    }
}

/// Incremental circuit construction with structural hashing and constant
/// folding. Gate names are `prefix` plus a running counter.
#[derive(Debug)]
pub struct CircuitBuilder {
    n: usize,
    gates: Vec<Gate>,
    names: Vec<String>,
    memo: HashMap<Gate, usize>,
    prefix: String,
    counter: usize,
}

/// Handle to a gate inside a [`CircuitBuilder`].
pub type Wire = usize;

impl CircuitBuilder {
    pub fn new(n: usize) -> Self {
        CircuitBuilder {
            n,
            gates: Vec::new(),
            names: Vec::new(),
            memo: HashMap::new(),
            prefix: "g".into(),
            counter: 0,
        }
    }

    pub fn set_prefix(&mut self, prefix: impl Into<String>) {
        self.prefix = prefix.into();
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    fn intern(&mut self, g: Gate) -> Wire {
        if let Some(&w) = self.memo.get(&g) {
            return w;
        }
        let name = match g {
            Gate::Input(i) => format!("x{i}"),
            Gate::Const(b) => format!("const{}", b as u8),
            _ => {
                self.counter += 1;
                format!("{}{}", self.prefix, self.counter)
            }
        };
        self.gates.push(g);
        self.names.push(name);
        let w = self.gates.len() - 1;
        self.memo.insert(g, w);
        w
    }

    fn as_const(&self, w: Wire) -> Option<bool> {
        match self.gates[w] {
            Gate::Const(b) => Some(b),
            _ => None,
        }
    }

    pub fn input(&mut self, i: usize) -> Wire {
        assert!(i >= 1 && i <= self.n, "input {i} out of range");
        self.intern(Gate::Input(i))
    }

    pub fn constant(&mut self, b: bool) -> Wire {
        self.intern(Gate::Const(b))
    }

    pub fn not(&mut self, a: Wire) -> Wire {
        match self.gates[a] {
            Gate::Const(b) => self.constant(!b),
            Gate::Not(inner) => inner,
            _ => self.intern(Gate::Not(a)),
        }
    }

    pub fn and(&mut self, a: Wire, b: Wire) -> Wire {
        match (self.as_const(a), self.as_const(b)) {
            (Some(false), _) | (_, Some(false)) => self.constant(false),
            (Some(true), _) => b,
            (_, Some(true)) => a,
            _ if a == b => a,
            _ => self.intern(Gate::And(a.min(b), a.max(b))),
        }
    }

    pub fn or(&mut self, a: Wire, b: Wire) -> Wire {
        match (self.as_const(a), self.as_const(b)) {
            (Some(true), _) | (_, Some(true)) => self.constant(true),
            (Some(false), _) => b,
            (_, Some(false)) => a,
            _ if a == b => a,
            _ => self.intern(Gate::Or(a.min(b), a.max(b))),
        }
    }

    /// `if sel { one } else { zero }`.
    pub fn mux(&mut self, sel: Wire, zero: Wire, one: Wire) -> Wire {
        if zero == one {
            return zero;
        }
        match (self.as_const(zero), self.as_const(one)) {
            (Some(false), Some(true)) => sel,
            (Some(true), Some(false)) => self.not(sel),
            _ => {
                let ns = self.not(sel);
                let hi = self.and(sel, one);
                let lo = self.and(ns, zero);
                self.or(hi, lo)
            }
        }
    }

    /// Balanced AND over `wires` (constant 1 when empty).
    pub fn and_all(&mut self, wires: &[Wire]) -> Wire {
        match wires.len() {
            0 => self.constant(true),
            1 => wires[0],
            k => {
                let (l, r) = wires.split_at(k / 2);
                let l = self.and_all(l);
                let r = self.and_all(r);
                self.and(l, r)
            }
        }
    }

    /// Select `leaves[v]` where `v` is the number spelled by `sel`
    /// (most significant bit first). Leaves past the end read as `fill`.
    pub fn select(&mut self, sel: &[Wire], leaves: &[Wire], fill: Wire) -> Wire {
        fn go(
            b: &mut CircuitBuilder,
            sel: &[Wire],
            leaves: &[Wire],
            fill: Wire,
            base: usize,
        ) -> Wire {
            match sel.split_first() {
                None => leaves.get(base).copied().unwrap_or(fill),
                Some((&top, rest)) => {
                    let half = 1usize << rest.len();
                    if base >= leaves.len() {
                        return fill;
                    }
                    let zero = go(b, rest, leaves, fill, base);
                    let one = go(b, rest, leaves, fill, base + half);
                    b.mux(top, zero, one)
                }
            }
        }
        go(self, sel, leaves, fill, 0)
    }

    /// Value of every gate built so far.
    pub fn eval_all(&self, x: &[bool]) -> Vec<bool> {
        let mut v: Vec<bool> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let b = match *g {
                Gate::Input(i) => x[i - 1],
                Gate::Const(b) => b,
                Gate::Not(a) => !v[a],
                Gate::And(a, b) => v[a] && v[b],
                Gate::Or(a, b) => v[a] || v[b],
            };
            v.push(b);
        }
        v
    }

    pub fn finish(self, output: Wire) -> Circuit {
        Circuit::with_names(self.n, self.gates, self.names, output)
            .expect("builder only emits well-formed circuits")
    }
}
