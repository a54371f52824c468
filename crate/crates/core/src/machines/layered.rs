use super::MachineError;
use crate::perm::Perm;

/// Node of a layered program: the variable it reads (1-based) and its two
/// successors in the next layer (0-based positions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerNode {
    pub var: usize,
    pub goto0: usize,
    pub goto1: usize,
}

/// Width-`J` layered branching program with `K` reading layers.
///
/// Layers `1..=K` hold variable nodes; their edges lead to the next layer.
/// After the last reading layer sits a final layer of `J` terminal nodes,
/// some of which are marked accepting. Start is node 1 of layer 1. The
/// program therefore has `K + 1` node layers and a walk reads exactly `K`
/// variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredBp {
    n: usize,
    width: usize,
    layers: Vec<Vec<LayerNode>>,
    accept: Vec<usize>,
}

impl LayeredBp {
    pub fn new(
        n: usize,
        width: usize,
        layers: Vec<Vec<LayerNode>>,
        mut accept: Vec<usize>,
    ) -> Result<Self, MachineError> {
        if width == 0 {
            return Err(MachineError::MalformedProgram(
                "width must be at least 1".into(),
            ));
        }
        for (k, layer) in layers.iter().enumerate() {
            if layer.len() != width {
                return Err(MachineError::MalformedProgram(format!(
                    "layer {} has {} nodes, width is {width}",
                    k + 1,
                    layer.len()
                )));
            }
            for (j, node) in layer.iter().enumerate() {
                if node.var == 0 || node.var > n {
                    return Err(MachineError::MalformedProgram(format!(
                        "node ({}, {}) reads variable {} outside [1, {n}]",
                        k + 1,
                        j + 1,
                        node.var
                    )));
                }
                if node.goto0 >= width || node.goto1 >= width {
                    return Err(MachineError::MalformedProgram(format!(
                        "node ({}, {}) has an edge outside the next layer",
                        k + 1,
                        j + 1
                    )));
                }
            }
        }
        accept.sort_unstable();
        accept.dedup();
        if accept.iter().any(|&a| a >= width) {
            return Err(MachineError::MalformedProgram(
                "accept marking outside the final layer".into(),
            ));
        }
        Ok(LayeredBp {
            n,
            width,
            layers,
            accept,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of reading layers `K`.
    pub fn length(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<LayerNode>] {
        &self.layers
    }

    /// Accepting positions (0-based) of the final layer, sorted.
    pub fn accept(&self) -> &[usize] {
        &self.accept
    }

    /// Position reached in the final layer.
    pub fn final_position(&self, x: &[bool]) -> Result<usize, MachineError> {
        if x.len() != self.n {
            return Err(MachineError::InputLength {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut j = 0;
        for layer in &self.layers {
            let node = layer[j];
            j = if x[node.var - 1] {
                node.goto1
            } else {
                node.goto0
            };
        }
        Ok(j)
    }

    pub fn eval(&self, x: &[bool]) -> Result<bool, MachineError> {
        let j = self.final_position(x)?;
        Ok(self.accept.binary_search(&j).is_ok())
    }

    /// The reading nodes visited on input `x`, as 0-based `(layer, position)`.
    pub fn walk(&self, x: &[bool]) -> Result<Vec<(usize, usize)>, MachineError> {
        self.final_position(x)?;
        let mut out = Vec::with_capacity(self.layers.len());
        let mut j = 0;
        for (k, layer) in self.layers.iter().enumerate() {
            out.push((k, j));
            let node = layer[j];
            j = if x[node.var - 1] {
                node.goto1
            } else {
                node.goto0
            };
        }
        Ok(out)
    }

    pub fn into_permutation(self) -> Result<PermutationBp, MachineError> {
        PermutationBp::new(self)
    }
}

/// Layered program whose 0- and 1-edge maps are bijections in every layer
/// and which has exactly one accepting terminal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationBp {
    inner: LayeredBp,
}

impl PermutationBp {
    pub fn new(bp: LayeredBp) -> Result<Self, MachineError> {
        for (k, layer) in bp.layers.iter().enumerate() {
            for bit in [false, true] {
                let image: Vec<usize> = layer
                    .iter()
                    .map(|nd| if bit { nd.goto1 } else { nd.goto0 })
                    .collect();
                if Perm::new(image).is_none() {
                    return Err(MachineError::InvariantViolation(format!(
                        "goto{}({}, ·) is not a permutation",
                        bit as u8,
                        k + 1
                    )));
                }
            }
        }
        if bp.accept.len() != 1 {
            return Err(MachineError::InvariantViolation(format!(
                "permutation program needs exactly one accept node, found {}",
                bp.accept.len()
            )));
        }
        Ok(PermutationBp { inner: bp })
    }

    /// Build from explicit per-layer `(var, goto0, goto1)` permutations.
    pub fn from_perms(
        n: usize,
        width: usize,
        layers: &[(usize, Perm, Perm)],
        accept: usize,
    ) -> Result<Self, MachineError> {
        let layers = layers
            .iter()
            .map(|(var, p0, p1)| {
                (0..width)
                    .map(|j| LayerNode {
                        var: *var,
                        goto0: p0.apply(j),
                        goto1: p1.apply(j),
                    })
                    .collect()
            })
            .collect();
        PermutationBp::new(LayeredBp::new(n, width, layers, vec![accept])?)
    }

    pub fn as_layered(&self) -> &LayeredBp {
        &self.inner
    }

    pub fn into_layered(self) -> LayeredBp {
        self.inner
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn width(&self) -> usize {
        self.inner.width
    }

    pub fn length(&self) -> usize {
        self.inner.layers.len()
    }

    pub fn accept_node(&self) -> usize {
        self.inner.accept[0]
    }

    pub fn eval(&self, x: &[bool]) -> Result<bool, MachineError> {
        self.inner.eval(x)
    }

    /// `goto_bit(k, ·)` of reading layer `k` (0-based).
    pub fn layer_perm(&self, k: usize, bit: bool) -> Perm {
        let image = self.inner.layers[k]
            .iter()
            .map(|nd| if bit { nd.goto1 } else { nd.goto0 })
            .collect();
        Perm::new(image).expect("validated at construction")
    }

    /// Composition of the layer maps selected by `x`, first layer first.
    /// `None` when some layer reads several variables and the selected map
    /// is not a bijection.
    pub fn product(&self, x: &[bool]) -> Result<Option<Perm>, MachineError> {
        if x.len() != self.n() {
            return Err(MachineError::InputLength {
                expected: self.n(),
                got: x.len(),
            });
        }
        let mut acc = Perm::identity(self.width());
        for layer in &self.inner.layers {
            let image: Vec<usize> = layer
                .iter()
                .map(|nd| if x[nd.var - 1] { nd.goto1 } else { nd.goto0 })
                .collect();
            match Perm::new(image) {
                Some(p) => acc = acc.then(&p),
                None => return Ok(None),
            }
        }
        Ok(Some(acc))
    }

    pub fn is_goto0_identity(&self) -> bool {
        self.inner
            .layers
            .iter()
            .all(|layer| layer.iter().enumerate().all(|(j, nd)| nd.goto0 == j))
    }

    /// Equivalent program of the same width and length whose 0-edges are the
    /// identity in every layer.
    ///
    /// Layer 1 keeps its labels; each later layer is relabeled by the
    /// composition of the 0-edge maps leading into it.
    pub fn normalize_goto0_identity(&self) -> PermutationBp {
        let width = self.width();
        // pi[new] = old label in the current layer
        let mut pi = Perm::identity(width);
        let mut layers = Vec::with_capacity(self.length());
        for k in 0..self.length() {
            let g0 = self.layer_perm(k, false);
            let g1 = self.layer_perm(k, true);
            let next_pi = pi.then(&g0);
            let next_inv = next_pi.inverse();
            let layer = (0..width)
                .map(|j| {
                    let old = pi.apply(j);
                    LayerNode {
                        var: self.inner.layers[k][old].var,
                        goto0: j,
                        goto1: next_inv.apply(g1.apply(old)),
                    }
                })
                .collect();
            layers.push(layer);
            pi = next_pi;
        }
        let accept = pi.inverse().apply(self.accept_node());
        let inner = LayeredBp {
            n: self.n(),
            width,
            layers,
            accept: vec![accept],
        };
        PermutationBp { inner }
    }

    /// Apply the same relabeling `rho` (new = rho(old)) to every node layer.
    /// `rho` must fix the start node 0.
    pub fn relabel_uniform(&self, rho: &Perm) -> PermutationBp {
        assert_eq!(rho.apply(0), 0, "relabeling must keep the start node");
        let inv = rho.inverse();
        let layers = self
            .inner
            .layers
            .iter()
            .map(|layer| {
                (0..self.width())
                    .map(|j| {
                        let nd = layer[inv.apply(j)];
                        LayerNode {
                            var: nd.var,
                            goto0: rho.apply(nd.goto0),
                            goto1: rho.apply(nd.goto1),
                        }
                    })
                    .collect()
            })
            .collect();
        PermutationBp {
            inner: LayeredBp {
                n: self.n(),
                width: self.width(),
                layers,
                accept: vec![rho.apply(self.accept_node())],
            },
        }
    }
}
