use super::{Span, SyntaxError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Numeric literal kept as text; `integral` is false for `0.5` and `3/4`.
    Num { text: String, integral: bool },
    Let,
    Rec,
    In,
    Match,
    With,
    Fun,
    If,
    Then,
    Else,
    True,
    False,
    Tick,
    Prob,
    Flip,
    Consume,
    Share,
    As,
    Case,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Bar,
    Arrow,
    ColonColon,
    Colon,
    Equals,
    Lt,
    Gt,
    Caret,
    Underscore,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num { text, .. } => format!("number `{text}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Let => "let",
            Tok::Rec => "rec",
            Tok::In => "in",
            Tok::Match => "match",
            Tok::With => "with",
            Tok::Fun => "fun",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Tick => "tick",
            Tok::Prob => "prob",
            Tok::Flip => "flip",
            Tok::Consume => "consume",
            Tok::Share => "share",
            Tok::As => "as",
            Tok::Case => "case",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Bar => "|",
            Tok::Arrow => "->",
            Tok::ColonColon => "::",
            Tok::Colon => ":",
            Tok::Equals => "=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Caret => "^",
            Tok::Underscore => "_",
            Tok::Ident(_) | Tok::Num { .. } | Tok::Eof => "",
        }
    }
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "let" => Tok::Let,
        "rec" => Tok::Rec,
        "in" => Tok::In,
        "match" => Tok::Match,
        "with" => Tok::With,
        "fun" => Tok::Fun,
        "if" => Tok::If,
        "then" => Tok::Then,
        "else" => Tok::Else,
        "true" => Tok::True,
        "false" => Tok::False,
        "tick" => Tok::Tick,
        "prob" => Tok::Prob,
        "flip" => Tok::Flip,
        "consume" => Tok::Consume,
        "share" => Tok::Share,
        "as" => Tok::As,
        "case" => Tok::Case,
        "_" => Tok::Underscore,
        _ => return None,
    })
}

pub struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> Span {
        Span {
            start: self.pos,
            end: self.pos,
            line: self.line,
            col: self.col,
        }
    }

    fn error(&self, span: Span, message: impl Into<String>) -> SyntaxError {
        SyntaxError::Parse {
            message: message.into(),
            span,
        }
    }

    fn skip_trivia(&mut self) -> Result<(), SyntaxError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('(') if self.peek2() == Some('*') => {
                    let start = self.here();
                    self.bump();
                    self.bump();
                    let mut depth = 1;
                    while depth > 0 {
                        match self.bump() {
                            Some('(') if self.peek() == Some('*') => {
                                self.bump();
                                depth += 1;
                            }
                            Some('*') if self.peek() == Some(')') => {
                                self.bump();
                                depth -= 1;
                            }
                            Some(_) => {}
                            None => return Err(self.error(start, "unterminated comment")),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn number(&mut self, start: Span, negative: bool) -> Result<Tok, SyntaxError> {
        let mut text = String::new();
        if negative {
            text.push('-');
        }
        let mut integral = true;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            text.push(self.bump().unwrap());
        }
        if self.peek() == Some('.') && matches!(self.peek2(), Some(c) if c.is_ascii_digit()) {
            integral = false;
            text.push(self.bump().unwrap());
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                text.push(self.bump().unwrap());
            }
        }
        if self.peek() == Some('/') {
            if !matches!(self.peek2(), Some(c) if c.is_ascii_digit()) {
                return Err(self.error(start, "malformed fraction literal"));
            }
            integral = false;
            text.push(self.bump().unwrap());
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                text.push(self.bump().unwrap());
            }
        }
        Ok(Tok::Num { text, integral })
    }

    pub fn tokenize(mut self) -> Result<Vec<(Tok, Span)>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia()?;
            let start = self.here();
            let Some(c) = self.peek() else {
                out.push((Tok::Eof, start));
                return Ok(out);
            };
            let tok = if c.is_ascii_digit() {
                self.number(start, false)?
            } else if c == '-' {
                self.bump();
                match self.peek() {
                    Some('>') => {
                        self.bump();
                        Tok::Arrow
                    }
                    Some(d) if d.is_ascii_digit() => self.number(start, true)?,
                    _ => return Err(self.error(start, "unexpected `-`")),
                }
            } else if c.is_alphabetic() || c == '_' {
                let mut s = String::new();
                while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_' || c == '\'') {
                    s.push(self.bump().unwrap());
                }
                keyword(&s).unwrap_or(Tok::Ident(s))
            } else if c == super::RESERVED_PREFIX {
                return Err(self.error(start, "identifiers starting with `%` are reserved"));
            } else {
                self.bump();
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ';' => Tok::Semi,
                    ',' => Tok::Comma,
                    '|' => Tok::Bar,
                    '=' => Tok::Equals,
                    '<' => Tok::Lt,
                    '>' => Tok::Gt,
                    '^' => Tok::Caret,
                    ':' => {
                        if self.peek() == Some(':') {
                            self.bump();
                            Tok::ColonColon
                        } else {
                            Tok::Colon
                        }
                    }
                    other => return Err(self.error(start, format!("unexpected character `{other}`"))),
                }
            };
            let mut span = start;
            span.end = self.pos;
            out.push((tok, span));
        }
    }
}
