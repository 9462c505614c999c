use thiserror::Error;

use super::{Expr, Node, FUNCTIONS};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at byte offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("exponent must be a non-negative integer")]
    BadExponent,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    /// Value plus whether the literal was written as a bare digit string.
    Num(f64, bool),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start).map(|(n, int)| (Tok::Num(n, int), start));
        }
        if c.is_ascii_alphabetic() {
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        if b"+-*/^()".contains(&c) {
            self.pos += 1;
            return Ok((Tok::Op(c as char), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(ParseError {
            offset: start,
            kind: ParseErrorKind::Syntax(format!("unexpected character `{ch}`")),
        })
    }

    fn number(&mut self, start: usize) -> Result<(f64, bool), ParseError> {
        let digits = |lx: &mut Self| {
            let s = lx.pos;
            while matches!(lx.peek(), Some(c) if c.is_ascii_digit()) {
                lx.pos += 1;
            }
            lx.pos - s
        };
        let mut n = digits(self);
        let mut integral = true;
        if self.peek() == Some(b'.') {
            integral = false;
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(ParseError {
                offset: start,
                kind: ParseErrorKind::Syntax("malformed number".into()),
            });
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            } else {
                integral = false;
            }
        }
        let value = self.src[start..self.pos].parse::<f64>().map_err(|_| ParseError {
            offset: start,
            kind: ParseErrorKind::Syntax("malformed number".into()),
        })?;
        Ok((value, integral))
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    i: usize,
    vars: &'a [String],
}

/// Parse `text` against the grammar
///
/// ```text
/// expr   := term (('+'|'-') term)*
/// term   := factor (('*'|'/') factor)*
/// factor := '-' factor | base ('^' uint)?
/// base   := number | ident | '(' expr ')' | func '(' expr ')'
/// ```
///
/// Identifiers resolve to indices into `vars`.
pub fn parse(text: &str, vars: &[String]) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: Lexer::tokens(text)?,
        i: 0,
        vars,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        other => Err(p.err(format!("unexpected {}", describe(other)))),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n, _) => format!("number {n}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err(&self, msg: String) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind: ParseErrorKind::Syntax(msg),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`, found {}", describe(self.peek()))))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = lhs + self.term()?;
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = lhs * self.factor()?;
                }
                Tok::Op('/') => {
                    self.bump();
                    lhs = lhs / self.factor()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(-self.factor()?);
        }
        let base = self.base()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let bad = ParseError {
            offset: at,
            kind: ParseErrorKind::BadExponent,
        };
        match self.bump() {
            Tok::Num(n, true) if n <= u32::MAX as f64 => Ok(base.pow(n as u32)),
            Tok::Num(..) | Tok::Op('-') => Err(bad),
            other => Err(ParseError {
                offset: at,
                kind: ParseErrorKind::Syntax(format!("expected exponent, found {}", describe(&other))),
            }),
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(n, _) => Ok(Expr::constant(n)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if FUNCTIONS.contains(&name.as_str()) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(match name.as_str() {
                        "abs" => arg.abs(),
                        "sgn" => arg.sgn(),
                        "exp" => arg.exp(),
                        "sqrt" => arg.sqrt(),
                        "sin" => arg.sin(),
                        "cos" => arg.cos(),
                        _ => Expr::elu(arg),
                    });
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Expr::new(Node::Var(i))),
                    None => Err(ParseError {
                        offset: at,
                        kind: ParseErrorKind::UnknownIdentifier(name),
                    }),
                }
            }
            other => Err(ParseError {
                offset: at,
                kind: ParseErrorKind::Syntax(format!("unexpected {}", describe(&other))),
            }),
        }
    }
}
