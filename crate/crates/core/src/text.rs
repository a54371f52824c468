//! Shared helpers for the line-oriented text formats (`.ben`, `.circ`, `.bp`).

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

/// Non-empty lines with `#` comments removed, paired with 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let body = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((k + 1, tokens))
    })
}

pub(crate) fn parse_num(line: usize, tok: &str, what: &str) -> Result<usize, ParseError> {
    tok.parse()
        .map_err(|_| ParseError::new(line, format!("expected integer for {what}, got {tok:?}")))
}

pub(crate) fn parse_bit(line: usize, tok: &str) -> Result<bool, ParseError> {
    match tok {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(ParseError::new(
            line,
            format!("expected 0 or 1, got {tok:?}"),
        )),
    }
}

pub(crate) fn expect_arity(line: usize, tokens: &[&str], n: usize) -> Result<(), ParseError> {
    if tokens.len() != n {
        return Err(ParseError::new(
            line,
            format!(
                "`{}` takes {} argument(s), got {}",
                tokens[0],
                n - 1,
                tokens.len() - 1
            ),
        ));
    }
    Ok(())
}
