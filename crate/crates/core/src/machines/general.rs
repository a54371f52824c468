use std::collections::BTreeSet;

use super::MachineError;

/// Node of a general branching program. Targets are 0-based node indices;
/// `var` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpNode {
    Var {
        var: usize,
        goto0: usize,
        goto1: usize,
    },
    Accept,
    Reject,
}

impl BpNode {
    fn targets(&self) -> Option<[usize; 2]> {
        match *self {
            BpNode::Var { goto0, goto1, .. } => Some([goto0, goto1]),
            _ => None,
        }
    }
}

/// A branching program as a DAG of variable/accept/reject nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralBp {
    n: usize,
    nodes: Vec<BpNode>,
    start: usize,
}

impl GeneralBp {
    pub fn new(n: usize, nodes: Vec<BpNode>, start: usize) -> Result<Self, MachineError> {
        if start >= nodes.len() {
            return Err(MachineError::MalformedProgram(format!(
                "start node {start} does not exist"
            )));
        }
        for (q, node) in nodes.iter().enumerate() {
            if let BpNode::Var { var, goto0, goto1 } = *node {
                if var == 0 || var > n {
                    return Err(MachineError::MalformedProgram(format!(
                        "node {q} reads variable {var} outside [1, {n}]"
                    )));
                }
                if goto0 >= nodes.len() || goto1 >= nodes.len() {
                    return Err(MachineError::MalformedProgram(format!(
                        "node {q} has an edge to a missing node"
                    )));
                }
            }
        }
        Ok(GeneralBp { n, nodes, start })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[BpNode] {
        &self.nodes
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn accept_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&q| self.nodes[q] == BpNode::Accept)
            .collect()
    }

    pub fn eval(&self, x: &[bool]) -> Result<bool, MachineError> {
        if x.len() != self.n {
            return Err(MachineError::InputLength {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut q = self.start;
        for _ in 0..=self.nodes.len() {
            match self.nodes[q] {
                BpNode::Accept => return Ok(true),
                BpNode::Reject => return Ok(false),
                BpNode::Var { var, goto0, goto1 } => {
                    q = if x[var - 1] { goto1 } else { goto0 };
                }
            }
        }
        Err(MachineError::MalformedProgram(
            "walk revisits a node (cycle)".into(),
        ))
    }

    /// True when the start node is index 0 and every edge goes to a higher
    /// index.
    pub fn is_topologically_indexed(&self) -> bool {
        self.start == 0
            && self
                .nodes
                .iter()
                .enumerate()
                .all(|(q, node)| node.targets().is_none_or(|ts| ts.iter().all(|&t| t > q)))
    }

    /// Renumber nodes so the start node comes first and edges only go from
    /// lower to higher indices. Ties are broken by original index, so an
    /// already-sorted program is returned unchanged.
    pub fn topo_index(&self) -> Result<GeneralBp, MachineError> {
        let h = self.nodes.len();
        let mut indegree = vec![0usize; h];
        for node in &self.nodes {
            if let Some(ts) = node.targets() {
                for t in ts {
                    indegree[t] += 1;
                }
            }
        }
        if indegree[self.start] != 0 {
            return Err(MachineError::MalformedProgram(
                "start node has incoming edges".into(),
            ));
        }
        let mut ready: BTreeSet<usize> = (0..h)
            .filter(|&q| indegree[q] == 0 && q != self.start)
            .collect();
        let mut order = Vec::with_capacity(h);
        let mut next = Some(self.start);
        while let Some(q) = next.take().or_else(|| ready.pop_first()) {
            order.push(q);
            if let Some(ts) = self.nodes[q].targets() {
                for t in ts {
                    indegree[t] -= 1;
                    if indegree[t] == 0 {
                        ready.insert(t);
                    }
                }
            }
        }
        if order.len() != h {
            return Err(MachineError::MalformedProgram(
                "program contains a cycle".into(),
            ));
        }
        Ok(self.renumber(&order))
    }

    /// `order[new] = old`.
    fn renumber(&self, order: &[usize]) -> GeneralBp {
        let mut new_of = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_of[old] = new;
        }
        let nodes = order
            .iter()
            .map(|&old| match self.nodes[old] {
                BpNode::Var { var, goto0, goto1 } => BpNode::Var {
                    var,
                    goto0: new_of[goto0],
                    goto1: new_of[goto1],
                },
                other => other,
            })
            .collect();
        GeneralBp {
            n: self.n,
            nodes,
            start: new_of[self.start],
        }
    }

    /// Keep one accept node (the highest-indexed) and turn every other accept
    /// node into a variable node whose two edges lead to it. A program with
    /// no accept node gets a fresh, unreachable one appended.
    ///
    /// Expects a topologically indexed program and keeps it that way.
    pub fn normalize_single_accept(&self) -> Result<GeneralBp, MachineError> {
        if !self.is_topologically_indexed() {
            return Err(MachineError::InvariantViolation(
                "normalize_single_accept needs a topologically indexed program".into(),
            ));
        }
        let accepts = self.accept_nodes();
        let mut out = self.clone();
        match accepts.split_last() {
            None => out.nodes.push(BpNode::Accept),
            Some((&keep, rest)) => {
                if !rest.is_empty() && self.n == 0 {
                    return Err(MachineError::InvariantViolation(
                        "cannot merge accept nodes in a program with no inputs".into(),
                    ));
                }
                for &q in rest {
                    out.nodes[q] = BpNode::Var {
                        var: 1,
                        goto0: keep,
                        goto1: keep,
                    };
                }
            }
        }
        Ok(out)
    }

    /// Move the single accept node to the last index. Accept nodes have no
    /// outgoing edges, so the ordering invariant survives. Returns whether a
    /// move was needed.
    pub fn relocate_accept_last(&self) -> Result<(GeneralBp, bool), MachineError> {
        let accepts = self.accept_nodes();
        let [a] = accepts[..] else {
            return Err(MachineError::InvariantViolation(format!(
                "expected exactly one accept node, found {}",
                accepts.len()
            )));
        };
        let h = self.nodes.len();
        if a == h - 1 {
            return Ok((self.clone(), false));
        }
        let order: Vec<usize> = (0..h).filter(|&q| q != a).chain([a]).collect();
        Ok((self.renumber(&order), true))
    }
}
