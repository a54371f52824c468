//! `.circ` and `.bp` text formats.
//!
//! ```text
//! circuit v1
//! inputs 2
//! let a = INPUT 1
//! let b = INPUT 2
//! let g = AND a b
//! output g
//! ```
//!
//! ```text
//! bp v1 layered            # or: general, permutation
//! inputs 2
//! width 2 length 1
//! node 1 1 var 1 goto0 1 goto1 2
//! node 1 2 var 2 goto0 2 goto1 1
//! accept 2 2               # terminal layer is K + 1
//! ```
//!
//! General programs use `node <q> var <i> goto0 <q0> goto1 <q1>`,
//! `node <q> accept`, `node <q> reject` and `start <q>`; node labels are
//! arbitrary integers. All indices in the files are 1-based.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{BpNode, Circuit, Gate, GeneralBp, LayerNode, LayeredBp, PermutationBp};
use crate::text::{content_lines, expect_arity, parse_num, ParseError};

pub fn write_circuit(c: &Circuit) -> String {
    let mut out = format!("circuit v1\ninputs {}\n", c.n());
    let names = c.names();
    for (g, name) in c.gates().iter().zip(names) {
        let rhs = match *g {
            Gate::Input(i) => format!("INPUT {i}"),
            Gate::Const(b) => format!("CONST {}", b as u8),
            Gate::Not(a) => format!("NOT {}", names[a]),
            Gate::And(a, b) => format!("AND {} {}", names[a], names[b]),
            Gate::Or(a, b) => format!("OR {} {}", names[a], names[b]),
        };
        let _ = writeln!(out, "let {name} = {rhs}");
    }
    let _ = writeln!(out, "output {}", names[c.output()]);
    out
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, t)) if t == ["circuit", "v1"] => {}
        Some((line, _)) => return Err(ParseError::new(line, "expected header `circuit v1`")),
        None => return Err(ParseError::new(0, "empty file")),
    }
    let mut n = None;
    let mut gates = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut output = None;
    for (line, t) in lines {
        match t[0] {
            "inputs" => {
                expect_arity(line, &t, 2)?;
                n = Some(parse_num(line, t[1], "inputs")?);
            }
            "let" => {
                if t.len() < 4 || t[2] != "=" {
                    return Err(ParseError::new(line, "expected `let <name> = <GATE> ...`"));
                }
                let lookup = |name: &str| {
                    index
                        .get(name)
                        .copied()
                        .ok_or_else(|| ParseError::new(line, format!("undefined gate `{name}`")))
                };
                let args = &t[4..];
                let arity = |k: usize| {
                    if args.len() == k {
                        Ok(())
                    } else {
                        Err(ParseError::new(
                            line,
                            format!("{} takes {k} operand(s)", t[3]),
                        ))
                    }
                };
                let gate = match t[3] {
                    "INPUT" => {
                        arity(1)?;
                        Gate::Input(parse_num(line, args[0], "input index")?)
                    }
                    "CONST" => {
                        arity(1)?;
                        Gate::Const(crate::text::parse_bit(line, args[0])?)
                    }
                    "NOT" => {
                        arity(1)?;
                        Gate::Not(lookup(args[0])?)
                    }
                    "AND" => {
                        arity(2)?;
                        Gate::And(lookup(args[0])?, lookup(args[1])?)
                    }
                    "OR" => {
                        arity(2)?;
                        Gate::Or(lookup(args[0])?, lookup(args[1])?)
                    }
                    other => return Err(ParseError::new(line, format!("unknown gate `{other}`"))),
                };
                if index.insert(t[1].to_string(), gates.len()).is_some() {
                    return Err(ParseError::new(
                        line,
                        format!("gate `{}` defined twice", t[1]),
                    ));
                }
                gates.push(gate);
                names.push(t[1].to_string());
            }
            "output" => {
                expect_arity(line, &t, 2)?;
                let g = index
                    .get(t[1])
                    .copied()
                    .ok_or_else(|| ParseError::new(line, format!("undefined gate `{}`", t[1])))?;
                output = Some(g);
            }
            other => {
                return Err(ParseError::new(
                    line,
                    format!("unknown directive `{other}`"),
                ))
            }
        }
    }
    let n = n.ok_or_else(|| ParseError::new(0, "missing `inputs`"))?;
    let output = output.ok_or_else(|| ParseError::new(0, "missing `output`"))?;
    Circuit::with_names(n, gates, names, output).map_err(|e| ParseError::new(0, e.to_string()))
}

/// Any of the three branching-program forms, as read from a `.bp` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyBp {
    General(GeneralBp),
    Layered(LayeredBp),
    Permutation(PermutationBp),
}

impl AnyBp {
    pub fn n(&self) -> usize {
        match self {
            AnyBp::General(b) => b.n(),
            AnyBp::Layered(b) => b.n(),
            AnyBp::Permutation(b) => b.n(),
        }
    }

    pub fn eval(&self, x: &[bool]) -> Result<bool, super::MachineError> {
        match self {
            AnyBp::General(b) => b.eval(x),
            AnyBp::Layered(b) => b.eval(x),
            AnyBp::Permutation(b) => b.eval(x),
        }
    }
}

pub fn write_general(bp: &GeneralBp) -> String {
    let mut out = format!("bp v1 general\ninputs {}\n", bp.n());
    for (q, node) in bp.nodes().iter().enumerate() {
        match *node {
            BpNode::Var { var, goto0, goto1 } => {
                let _ = writeln!(
                    out,
                    "node {} var {var} goto0 {} goto1 {}",
                    q + 1,
                    goto0 + 1,
                    goto1 + 1
                );
            }
            BpNode::Accept => {
                let _ = writeln!(out, "node {} accept", q + 1);
            }
            BpNode::Reject => {
                let _ = writeln!(out, "node {} reject", q + 1);
            }
        }
    }
    let _ = writeln!(out, "start {}", bp.start() + 1);
    out
}

fn write_layers(kind: &str, bp: &LayeredBp) -> String {
    let mut out = format!(
        "bp v1 {kind}\ninputs {}\nwidth {} length {}\n",
        bp.n(),
        bp.width(),
        bp.length()
    );
    for (k, layer) in bp.layers().iter().enumerate() {
        for (j, nd) in layer.iter().enumerate() {
            let _ = writeln!(
                out,
                "node {} {} var {} goto0 {} goto1 {}",
                k + 1,
                j + 1,
                nd.var,
                nd.goto0 + 1,
                nd.goto1 + 1
            );
        }
    }
    for a in bp.accept() {
        let _ = writeln!(out, "accept {} {}", bp.length() + 1, a + 1);
    }
    out
}

pub fn write_layered(bp: &LayeredBp) -> String {
    write_layers("layered", bp)
}

pub fn write_permutation(bp: &PermutationBp) -> String {
    write_layers("permutation", bp.as_layered())
}

pub fn write_bp(bp: &AnyBp) -> String {
    match bp {
        AnyBp::General(b) => write_general(b),
        AnyBp::Layered(b) => write_layered(b),
        AnyBp::Permutation(b) => write_permutation(b),
    }
}

pub fn parse_bp(text: &str) -> Result<AnyBp, ParseError> {
    let mut lines = content_lines(text);
    let kind = match lines.next() {
        Some((line, t)) if t.len() == 3 && t[0] == "bp" && t[1] == "v1" => match t[2] {
            "general" | "layered" | "permutation" => t[2].to_string(),
            other => {
                return Err(ParseError::new(
                    line,
                    format!("unknown program kind `{other}`"),
                ))
            }
        },
        Some((line, _)) => {
            return Err(ParseError::new(
                line,
                "expected header `bp v1 <general|layered|permutation>`",
            ))
        }
        None => return Err(ParseError::new(0, "empty file")),
    };
    let body: Vec<(usize, Vec<&str>)> = lines.collect();
    if kind == "general" {
        parse_general(&body).map(AnyBp::General)
    } else {
        let bp = parse_layered(&body)?;
        if kind == "layered" {
            Ok(AnyBp::Layered(bp))
        } else {
            bp.into_permutation()
                .map(AnyBp::Permutation)
                .map_err(|e| ParseError::new(0, e.to_string()))
        }
    }
}

/// `(line, Some((var, goto0, goto1)) | None, accepting)`.
type RawNode = (usize, Option<(usize, usize, usize)>, bool);

fn parse_general(body: &[(usize, Vec<&str>)]) -> Result<GeneralBp, ParseError> {
    let mut n = None;
    let mut start = None;
    let mut labels: HashMap<usize, usize> = HashMap::new();
    let mut raw: Vec<RawNode> = Vec::new();
    for (line, t) in body {
        let line = *line;
        match t[0] {
            "inputs" => {
                expect_arity(line, t, 2)?;
                n = Some(parse_num(line, t[1], "inputs")?);
            }
            "start" => {
                expect_arity(line, t, 2)?;
                start = Some((line, parse_num(line, t[1], "start")?));
            }
            "node" => {
                if t.len() < 3 {
                    return Err(ParseError::new(line, "incomplete node line"));
                }
                let q = parse_num(line, t[1], "node label")?;
                if labels.insert(q, raw.len()).is_some() {
                    return Err(ParseError::new(line, format!("node {q} defined twice")));
                }
                match t[2] {
                    "accept" | "reject" => {
                        expect_arity(line, t, 3)?;
                        raw.push((line, None, t[2] == "accept"));
                    }
                    "var" => {
                        if t.len() != 8 || t[4] != "goto0" || t[6] != "goto1" {
                            return Err(ParseError::new(
                                line,
                                "expected `node <q> var <i> goto0 <q0> goto1 <q1>`",
                            ));
                        }
                        let i = parse_num(line, t[3], "variable")?;
                        let g0 = parse_num(line, t[5], "goto0")?;
                        let g1 = parse_num(line, t[7], "goto1")?;
                        raw.push((line, Some((i, g0, g1)), false));
                    }
                    other => {
                        return Err(ParseError::new(
                            line,
                            format!("unknown node kind `{other}`"),
                        ))
                    }
                }
            }
            other => {
                return Err(ParseError::new(
                    line,
                    format!("unknown directive `{other}`"),
                ))
            }
        }
    }
    let resolve = |line: usize, q: usize| {
        labels
            .get(&q)
            .copied()
            .ok_or_else(|| ParseError::new(line, format!("edge to undefined node {q}")))
    };
    let mut nodes = Vec::with_capacity(raw.len());
    for (line, var, accept) in &raw {
        nodes.push(match var {
            Some((i, g0, g1)) => BpNode::Var {
                var: *i,
                goto0: resolve(*line, *g0)?,
                goto1: resolve(*line, *g1)?,
            },
            None if *accept => BpNode::Accept,
            None => BpNode::Reject,
        });
    }
    let (line, s) = start.ok_or_else(|| ParseError::new(0, "missing `start`"))?;
    let start = resolve(line, s)?;
    let n = n.ok_or_else(|| ParseError::new(0, "missing `inputs`"))?;
    GeneralBp::new(n, nodes, start).map_err(|e| ParseError::new(0, e.to_string()))
}

fn parse_layered(body: &[(usize, Vec<&str>)]) -> Result<LayeredBp, ParseError> {
    let mut n = None;
    let mut shape = None;
    let mut nodes: HashMap<(usize, usize), LayerNode> = HashMap::new();
    let mut accept = Vec::new();
    for (line, t) in body {
        let line = *line;
        match t[0] {
            "inputs" => {
                expect_arity(line, t, 2)?;
                n = Some(parse_num(line, t[1], "inputs")?);
            }
            "width" => {
                if t.len() != 4 || t[2] != "length" {
                    return Err(ParseError::new(line, "expected `width <J> length <K>`"));
                }
                shape = Some((
                    parse_num(line, t[1], "width")?,
                    parse_num(line, t[3], "length")?,
                ));
            }
            "node" => {
                let (width, len) =
                    shape.ok_or_else(|| ParseError::new(line, "`width` must precede nodes"))?;
                if t.len() != 9 || t[3] != "var" || t[5] != "goto0" || t[7] != "goto1" {
                    return Err(ParseError::new(
                        line,
                        "expected `node <k> <j> var <i> goto0 <j0> goto1 <j1>`",
                    ));
                }
                let k = parse_num(line, t[1], "layer")?;
                let j = parse_num(line, t[2], "position")?;
                let var = parse_num(line, t[4], "variable")?;
                let g0 = parse_num(line, t[6], "goto0")?;
                let g1 = parse_num(line, t[8], "goto1")?;
                let in_range = |v: usize, hi: usize| v >= 1 && v <= hi;
                if !in_range(k, len)
                    || !in_range(j, width)
                    || !in_range(g0, width)
                    || !in_range(g1, width)
                {
                    return Err(ParseError::new(line, "node index out of range"));
                }
                let node = LayerNode {
                    var,
                    goto0: g0 - 1,
                    goto1: g1 - 1,
                };
                if nodes.insert((k - 1, j - 1), node).is_some() {
                    return Err(ParseError::new(
                        line,
                        format!("node ({k}, {j}) defined twice"),
                    ));
                }
            }
            "accept" => {
                expect_arity(line, t, 3)?;
                let (width, len) =
                    shape.ok_or_else(|| ParseError::new(line, "`width` must precede accept"))?;
                let k = parse_num(line, t[1], "layer")?;
                let j = parse_num(line, t[2], "position")?;
                if k != len + 1 || j == 0 || j > width {
                    return Err(ParseError::new(
                        line,
                        format!("accept must name a node of the terminal layer {}", len + 1),
                    ));
                }
                accept.push(j - 1);
            }
            other => {
                return Err(ParseError::new(
                    line,
                    format!("unknown directive `{other}`"),
                ))
            }
        }
    }
    let n = n.ok_or_else(|| ParseError::new(0, "missing `inputs`"))?;
    let (width, len) = shape.ok_or_else(|| ParseError::new(0, "missing `width`"))?;
    let mut layers = Vec::with_capacity(len);
    for k in 0..len {
        let mut layer = Vec::with_capacity(width);
        for j in 0..width {
            layer.push(*nodes.get(&(k, j)).ok_or_else(|| {
                ParseError::new(0, format!("missing node ({}, {})", k + 1, j + 1))
            })?);
        }
        layers.push(layer);
    }
    LayeredBp::new(n, width, layers, accept).map_err(|e| ParseError::new(0, e.to_string()))
}
