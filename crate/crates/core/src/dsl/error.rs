use std::fmt;

use serde::{Deserialize, Serialize};

/// A location in query text. `line` and `column` are 1-based, `column`
/// counting characters; `offset` is a byte offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

impl Position {
    pub(crate) fn start() -> Self {
        Position { line: 1, column: 1, offset: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorKind {
    InvalidUtf8,
    UnterminatedString,
    IllegalCharacter,
    UnexpectedToken,
    UnexpectedEof,
    DuplicateClause,
    ThresholdOutOfRange,
    InvalidWeight,
    InvalidRadius,
    EmptyCategory,
    NoRequirements,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: usize,
    pub column: usize,
    pub offset: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn new(kind: ErrorKind, at: Position, detail: impl fmt::Display) -> Self {
        ParseError {
            kind,
            line: at.line,
            column: at.column,
            offset: at.offset,
            message: format!("{kind}: {detail}"),
            expected: Vec::new(),
        }
    }

    pub(crate) fn expecting(mut self, expected: &[&str]) -> Self {
        self.expected = expected.iter().map(|s| s.to_string()).collect();
        self
    }
}
