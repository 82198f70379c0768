//! Text language for analyst query graphs.
//!
//! ```text
//! # four indicators, gated by country and organization
//! query "contagion" {
//!   indicator "C1"
//!   indicator "C2" weight 2
//!   indicator "C3"
//!   indicator "C4"
//!   in "Country A"
//!   with "Org B"
//!   threshold 0.7
//!   mode neighborhood radius 1
//! }
//! ```
//!
//! Grammar:
//!
//! ```text
//! query     := "query" STR "{" clause+ "}"
//! clause    := indicator | country | org | threshold | mode
//! indicator := "indicator" STR ("weight" NUM)?
//! country   := "in" STR
//! org       := "with" STR
//! threshold := "threshold" NUM
//! mode      := "mode" ("individual" | "neighborhood" ("radius" INT)?)
//! ```

mod ast;
mod error;
mod lexer;
mod parser;
mod printer;
mod validate;

pub use ast::{IndicatorRequirement, MatchMode, QueryGraph, DEFAULT_THRESHOLD};
pub use error::{ErrorKind, ParseError, Position};
pub use lexer::{tokenize, Keyword, Token, TokenKind};
pub use parser::{parse, parse_bytes, parse_with, ParseOptions};
pub use printer::print;
pub use validate::{validate, Warning};
