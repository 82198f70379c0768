use std::fmt;

use super::error::{ErrorKind, ParseError, Position};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Query,
    Indicator,
    Weight,
    In,
    With,
    Threshold,
    Mode,
    Individual,
    Neighborhood,
    Radius,
}

impl Keyword {
    fn lookup(word: &str) -> Option<Keyword> {
        Some(match word {
            "query" => Keyword::Query,
            "indicator" => Keyword::Indicator,
            "weight" => Keyword::Weight,
            "in" => Keyword::In,
            "with" => Keyword::With,
            "threshold" => Keyword::Threshold,
            "mode" => Keyword::Mode,
            "individual" => Keyword::Individual,
            "neighborhood" => Keyword::Neighborhood,
            "radius" => Keyword::Radius,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Query => "query",
            Keyword::Indicator => "indicator",
            Keyword::Weight => "weight",
            Keyword::In => "in",
            Keyword::With => "with",
            Keyword::Threshold => "threshold",
            Keyword::Mode => "mode",
            Keyword::Individual => "individual",
            Keyword::Neighborhood => "neighborhood",
            Keyword::Radius => "radius",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident(String),
    Str(String),
    /// `integer` is set when the literal has no fraction or exponent part.
    Num {
        value: f64,
        integer: bool,
    },
    LBrace,
    RBrace,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Keyword(k) => write!(f, "keyword `{}`", k.as_str()),
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Str(s) => write!(f, "string {s:?}"),
            TokenKind::Num { value, .. } => write!(f, "number {value}"),
            TokenKind::LBrace => f.write_str("`{`"),
            TokenKind::RBrace => f.write_str("`}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Position,
}

struct Cursor<'a> {
    text: &'a str,
    pos: Position,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos.offset..].chars().next()
    }

    fn peek_second(&self) -> Option<char> {
        self.text[self.pos.offset..].chars().nth(1)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos.offset += c.len_utf8();
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }
}

/// Splits query text into tokens. Comments run from `#` to end of line.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { text, pos: Position::start() };
    let mut tokens = Vec::new();
    while let Some(c) = cur.peek() {
        let start = cur.pos;
        let kind = match c {
            c if c.is_whitespace() => {
                cur.bump();
                continue;
            }
            '#' => {
                cur.eat_while(|c| c != '\n');
                continue;
            }
            '{' => {
                cur.bump();
                TokenKind::LBrace
            }
            '}' => {
                cur.bump();
                TokenKind::RBrace
            }
            '"' => lex_string(&mut cur)?,
            c if c.is_ascii_digit() || (c == '-' && cur.peek_second().is_some_and(|d| d.is_ascii_digit())) => {
                lex_number(&mut cur)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                cur.eat_while(|c| c.is_ascii_alphanumeric() || c == '_');
                let word = &text[start.offset..cur.pos.offset];
                match Keyword::lookup(word) {
                    Some(k) => TokenKind::Keyword(k),
                    None => TokenKind::Ident(word.to_string()),
                }
            }
            other => {
                return Err(ParseError::new(ErrorKind::IllegalCharacter, start, format!("illegal character {other:?}")))
            }
        };
        tokens.push(Token { kind, pos: start });
    }
    Ok(tokens)
}

fn lex_string(cur: &mut Cursor<'_>) -> Result<TokenKind, ParseError> {
    let start = cur.pos;
    cur.bump();
    let mut out = String::new();
    loop {
        let here = cur.pos;
        match cur.bump() {
            None => return Err(ParseError::new(ErrorKind::UnterminatedString, start, "string is never closed")),
            Some('"') => return Ok(TokenKind::Str(out)),
            Some('\\') => match cur.bump() {
                Some(c @ ('"' | '\\')) => out.push(c),
                Some(c) => {
                    return Err(ParseError::new(ErrorKind::IllegalCharacter, here, format!("unknown escape \\{c}")))
                }
                None => return Err(ParseError::new(ErrorKind::UnterminatedString, start, "string is never closed")),
            },
            Some(c) => out.push(c),
        }
    }
}

fn lex_number(cur: &mut Cursor<'_>) -> TokenKind {
    let start = cur.pos.offset;
    let mut integer = true;
    if cur.peek() == Some('-') {
        cur.bump();
    }
    cur.eat_while(|c| c.is_ascii_digit());
    if cur.peek() == Some('.') && cur.peek_second().is_some_and(|c| c.is_ascii_digit()) {
        integer = false;
        cur.bump();
        cur.eat_while(|c| c.is_ascii_digit());
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let rest = &cur.text[cur.pos.offset + 1..];
        let digits_at = usize::from(rest.starts_with(['+', '-']));
        if rest[digits_at..].starts_with(|c: char| c.is_ascii_digit()) {
            integer = false;
            cur.bump();
            if digits_at == 1 {
                cur.bump();
            }
            cur.eat_while(|c| c.is_ascii_digit());
        }
    }
    let lexeme = &cur.text[start..cur.pos.offset];
    // every lexeme matched above is valid f64 syntax; overflow saturates to infinity
    let value = lexeme.parse::<f64>().unwrap_or(f64::NAN);
    TokenKind::Num { value, integer }
}
