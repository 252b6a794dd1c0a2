//! Text syntax for rule sets and expressions.
//!
//! A spec is a sequence of `;`-terminated statements; `#` starts a comment.
//! Names may be used before the statement that declares them. The grammar
//! is written out in `docs/grammar.ebnf`.

mod lexer;
mod parser;
mod render;

pub use parser::{parse_expr, parse_spec, parse_spec_source};
pub use render::render_spec;

use std::fmt;

use thiserror::Error;

use lexer::Pos;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecSource {
    pub text: String,
    pub origin: String,
}

impl SpecSource {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        SpecSource {
            text: text.into(),
            origin: origin.into(),
        }
    }

    pub fn inline(text: impl Into<String>) -> Self {
        SpecSource::new(text, "<inline>")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// The text does not fit the grammar.
    Syntax,
    /// Well-formed, but names, slots or bounds are wrong.
    Semantic,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// The source line containing the error.
    pub snippet: String,
    pub origin: String,
}

impl ParseError {
    pub(crate) fn at(kind: ErrorKind, text: &str, pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            line: pos.line,
            column: pos.column,
            message: message.into(),
            snippet: text.lines().nth(pos.line - 1).unwrap_or("").to_string(),
            origin: "<inline>".to_string(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Syntax => "syntax error",
            ErrorKind::Semantic => "semantic error",
        };
        writeln!(
            f,
            "{}:{}:{}: {kind}: {}",
            self.origin, self.line, self.column, self.message
        )?;
        writeln!(f, "  {}", self.snippet)?;
        let pad: String = self
            .snippet
            .chars()
            .take(self.column.saturating_sub(1))
            .map(|c| if c == '\t' { '\t' } else { ' ' })
            .collect();
        write!(f, "  {pad}^")
    }
}
