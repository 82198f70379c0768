use super::ast::{IndicatorRequirement, MatchMode, QueryGraph, DEFAULT_THRESHOLD};
use super::error::{ErrorKind, ParseError, Position};
use super::lexer::{tokenize, Keyword, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParseOptions {
    /// Threshold used when the query has no `threshold` clause.
    pub default_threshold: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { default_threshold: DEFAULT_THRESHOLD }
    }
}

const CLAUSE_START: &[&str] = &["indicator", "in", "with", "threshold", "mode", "}"];

pub fn parse(text: &str) -> Result<QueryGraph, ParseError> {
    parse_with(text, &ParseOptions::default())
}

/// Parses raw bytes, reporting invalid UTF-8 as a positioned error.
pub fn parse_bytes(bytes: &[u8]) -> Result<QueryGraph, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).expect("valid prefix");
            Err(ParseError::new(ErrorKind::InvalidUtf8, end_of(valid), "input is not valid UTF-8"))
        }
    }
}

pub fn parse_with(text: &str, options: &ParseOptions) -> Result<QueryGraph, ParseError> {
    let tokens = tokenize(text)?;
    Parser { tokens: &tokens, next: 0, eof: end_of(text) }.query(options)
}

fn end_of(text: &str) -> Position {
    let mut pos = Position::start();
    for c in text.chars() {
        if c == '\n' {
            pos.line += 1;
            pos.column = 1;
        } else {
            pos.column += 1;
        }
    }
    pos.offset = text.len();
    pos
}

struct Parser<'t> {
    tokens: &'t [Token],
    next: usize,
    eof: Position,
}

#[derive(Default)]
struct Seen {
    country: bool,
    org: bool,
    threshold: bool,
    mode: bool,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.next)
    }

    fn here(&self) -> Position {
        self.peek().map_or(self.eof, |t| t.pos)
    }

    fn advance(&mut self) -> Option<&'t Token> {
        let t = self.tokens.get(self.next)?;
        self.next += 1;
        Some(t)
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let wanted = expected.join(", ");
        match self.peek() {
            Some(t) => ParseError::new(
                ErrorKind::UnexpectedToken,
                t.pos,
                format!("unexpected {}, expected one of: {wanted}", t.kind),
            ),
            None => ParseError::new(
                ErrorKind::UnexpectedEof,
                self.eof,
                format!("unexpected end of input, expected one of: {wanted}"),
            ),
        }
        .expecting(expected)
    }

    fn keyword(&mut self, k: Keyword) -> Result<Position, ParseError> {
        match self.peek() {
            Some(Token { kind: TokenKind::Keyword(got), pos }) if *got == k => {
                self.next += 1;
                Ok(*pos)
            }
            _ => Err(self.unexpected(&[k.as_str()])),
        }
    }

    fn eat_keyword(&mut self, k: Keyword) -> bool {
        let hit = matches!(self.peek(), Some(Token { kind: TokenKind::Keyword(got), .. }) if *got == k);
        if hit {
            self.next += 1;
        }
        hit
    }

    fn string(&mut self) -> Result<(String, Position), ParseError> {
        match self.peek() {
            Some(Token { kind: TokenKind::Str(s), pos }) => {
                self.next += 1;
                Ok((s.clone(), *pos))
            }
            _ => Err(self.unexpected(&["string"])),
        }
    }

    fn number(&mut self) -> Result<(f64, bool, Position), ParseError> {
        match self.peek() {
            Some(Token { kind: TokenKind::Num { value, integer }, pos }) => {
                self.next += 1;
                Ok((*value, *integer, *pos))
            }
            _ => Err(self.unexpected(&["number"])),
        }
    }

    fn punct(&mut self, want: TokenKind, label: &str) -> Result<Position, ParseError> {
        match self.peek() {
            Some(t) if t.kind == want => {
                self.next += 1;
                Ok(t.pos)
            }
            _ => Err(self.unexpected(&[label])),
        }
    }

    fn query(mut self, options: &ParseOptions) -> Result<QueryGraph, ParseError> {
        self.keyword(Keyword::Query)?;
        let (name, _) = self.string()?;
        self.punct(TokenKind::LBrace, "{")?;

        let mut q = QueryGraph::new(name, Vec::new());
        q.threshold = options.default_threshold;
        let mut seen = Seen::default();
        let mut clauses = 0usize;
        let close = loop {
            if let Some(Token { kind: TokenKind::RBrace, pos }) = self.peek() {
                if clauses == 0 {
                    return Err(self.unexpected(&CLAUSE_START[..5]));
                }
                self.next += 1;
                break *pos;
            }
            self.clause(&mut q, &mut seen)?;
            clauses += 1;
        };
        if self.peek().is_some() {
            return Err(self.unexpected(&["end of input"]));
        }
        if q.requirements.is_empty() {
            return Err(ParseError::new(ErrorKind::NoRequirements, close, "query needs at least one indicator clause")
                .expecting(&["indicator"]));
        }
        Ok(q)
    }

    fn clause(&mut self, q: &mut QueryGraph, seen: &mut Seen) -> Result<(), ParseError> {
        let start = self.here();
        let Some(Token { kind: TokenKind::Keyword(k), .. }) = self.peek() else {
            return Err(self.unexpected(CLAUSE_START));
        };
        let duplicate = |what: &str| {
            ParseError::new(ErrorKind::DuplicateClause, start, format!("`{what}` clause given more than once"))
        };
        match k {
            Keyword::Indicator => {
                self.advance();
                let (category, at) = self.string()?;
                if category.is_empty() {
                    return Err(ParseError::new(ErrorKind::EmptyCategory, at, "indicator category is empty"));
                }
                let mut weight = 1.0;
                if self.eat_keyword(Keyword::Weight) {
                    let (w, _, at) = self.number()?;
                    if !(w.is_finite() && w > 0.0) {
                        return Err(ParseError::new(
                            ErrorKind::InvalidWeight,
                            at,
                            format!("weight {w} must be a positive number"),
                        ));
                    }
                    weight = w;
                }
                q.requirements.push(IndicatorRequirement { category, weight });
            }
            Keyword::In => {
                if std::mem::replace(&mut seen.country, true) {
                    return Err(duplicate("in"));
                }
                self.advance();
                q.country_filter = Some(self.string()?.0);
            }
            Keyword::With => {
                if std::mem::replace(&mut seen.org, true) {
                    return Err(duplicate("with"));
                }
                self.advance();
                q.org_filter = Some(self.string()?.0);
            }
            Keyword::Threshold => {
                if std::mem::replace(&mut seen.threshold, true) {
                    return Err(duplicate("threshold"));
                }
                self.advance();
                let (t, _, at) = self.number()?;
                if !(0.0..=1.0).contains(&t) {
                    return Err(ParseError::new(
                        ErrorKind::ThresholdOutOfRange,
                        at,
                        format!("threshold {t} is outside [0, 1]"),
                    ));
                }
                q.threshold = t;
            }
            Keyword::Mode => {
                if std::mem::replace(&mut seen.mode, true) {
                    return Err(duplicate("mode"));
                }
                self.advance();
                if self.eat_keyword(Keyword::Individual) {
                    q.mode = MatchMode::Individual;
                } else if self.eat_keyword(Keyword::Neighborhood) {
                    let mut radius = 1;
                    if self.eat_keyword(Keyword::Radius) {
                        let (r, integer, at) = self.number()?;
                        if !integer || r < 1.0 || r > f64::from(u32::MAX) {
                            return Err(ParseError::new(
                                ErrorKind::InvalidRadius,
                                at,
                                format!("radius {r} must be a positive integer"),
                            ));
                        }
                        radius = r as u32;
                    }
                    q.mode = MatchMode::Neighborhood { radius };
                } else {
                    return Err(self.unexpected(&["individual", "neighborhood"]));
                }
            }
            _ => return Err(self.unexpected(CLAUSE_START)),
        }
        Ok(())
    }
}
