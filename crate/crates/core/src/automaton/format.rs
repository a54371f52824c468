//! The `.ben` text format.
//!
//! ```text
//! benenson v1
//! sigma abc
//! n 1
//! S 2
//! D 4
//! p 6
//! state abacbc
//! rule 1 1 ab 2
//! irule ca 4        # expands to rules (1,0,ca,4) and (1,1,ca,4)
//! ```
//!
//! Writing emits rules one per line in canonical `(ω, i, b, d)` order, so
//! `parse_ben(write_ben(a)) == a` and writing is byte-stable.

use std::fmt::Write as _;

use super::{Alphabet, BenensonAutomaton, CuttingRule};
use crate::text::{content_lines, expect_arity, parse_bit, parse_num, ParseError};

pub fn write_ben(aut: &BenensonAutomaton, comments: &str) -> String {
    let mut out = String::from("benenson v1\n");
    for line in comments.lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "# {line}");
        }
    }
    let sigma = aut.alphabet();
    let _ = writeln!(out, "sigma {sigma}");
    let _ = writeln!(out, "n {}", aut.n());
    let _ = writeln!(out, "S {}", aut.sticky_size());
    let _ = writeln!(out, "D {}", aut.range());
    let _ = writeln!(out, "p {}", aut.accept_pos());
    if aut.is_empty() {
        out.push_str("state\n");
    } else {
        let _ = writeln!(out, "state {}", sigma.decode(aut.state()));
    }
    for r in aut.rules() {
        let omega = if r.sticky.is_empty() {
            "-".to_string()
        } else {
            sigma.decode(&r.sticky)
        };
        let _ = writeln!(out, "rule {} {} {} {}", r.var, r.bit as u8, omega, r.dist);
    }
    out
}

pub fn parse_ben(text: &str) -> Result<BenensonAutomaton, ParseError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, t)) if t == ["benenson", "v1"] => {}
        Some((line, _)) => return Err(ParseError::new(line, "expected header `benenson v1`")),
        None => return Err(ParseError::new(0, "empty file")),
    }
    let mut sigma: Option<Alphabet> = None;
    let (mut n, mut s, mut d, mut p) = (None, None, None, None);
    let mut state: Option<String> = None;
    // sticky ends stay as text until the alphabet is known
    let mut raw_rules: Vec<(usize, usize, bool, String, usize)> = Vec::new();

    for (line, t) in lines {
        match t[0] {
            "sigma" => {
                expect_arity(line, &t, 2)?;
                sigma =
                    Some(Alphabet::new(t[1]).map_err(|e| ParseError::new(line, e.to_string()))?);
            }
            "n" | "S" | "D" | "p" => {
                expect_arity(line, &t, 2)?;
                let v = parse_num(line, t[1], t[0])?;
                let slot = match t[0] {
                    "n" => &mut n,
                    "S" => &mut s,
                    "D" => &mut d,
                    _ => &mut p,
                };
                if slot.replace(v).is_some() {
                    return Err(ParseError::new(line, format!("duplicate `{}`", t[0])));
                }
            }
            "state" => {
                if t.len() > 2 {
                    return Err(ParseError::new(line, "`state` takes one token"));
                }
                state = Some(t.get(1).copied().unwrap_or("").to_string());
            }
            "rule" => {
                expect_arity(line, &t, 5)?;
                let i = parse_num(line, t[1], "variable")?;
                let b = parse_bit(line, t[2])?;
                let dist = parse_num(line, t[4], "distance")?;
                raw_rules.push((line, i, b, t[3].to_string(), dist));
            }
            "irule" => {
                expect_arity(line, &t, 3)?;
                let dist = parse_num(line, t[2], "distance")?;
                raw_rules.push((line, 1, false, t[1].to_string(), dist));
                raw_rules.push((line, 1, true, t[1].to_string(), dist));
            }
            other => {
                return Err(ParseError::new(
                    line,
                    format!("unknown directive `{other}`"),
                ))
            }
        }
    }

    let missing = |what: &str| ParseError::new(0, format!("missing `{what}`"));
    let sigma = sigma.ok_or_else(|| missing("sigma"))?;
    let state = state.ok_or_else(|| missing("state"))?;
    let state = sigma
        .encode(&state)
        .map_err(|e| ParseError::new(0, format!("state: {e}")))?;
    let mut rules = Vec::with_capacity(raw_rules.len());
    for (line, i, b, omega, dist) in raw_rules {
        let omega = if omega == "-" { String::new() } else { omega };
        let sticky = sigma
            .encode(&omega)
            .map_err(|e| ParseError::new(line, e.to_string()))?;
        rules.push(CuttingRule::new(i, b, sticky, dist));
    }
    BenensonAutomaton::new(
        sigma,
        n.ok_or_else(|| missing("n"))?,
        s.ok_or_else(|| missing("S"))?,
        d.ok_or_else(|| missing("D"))?,
        state,
        rules,
        p.ok_or_else(|| missing("p"))?,
    )
    .map_err(|e| ParseError::new(0, e.to_string()))
}
