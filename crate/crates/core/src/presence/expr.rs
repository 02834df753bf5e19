//! Textual presence-condition expressions.
//!
//! Grammar (whitespace-insensitive, `!` binds tightest, then `&&`, then `||`):
//!
//! ```text
//! expr   := and ( "||" and )*
//! and    := unary ( "&&" unary )*
//! unary  := "!" unary | atom
//! atom   := "true" | "false" | ident | "defined" "(" ident ")" | "defined" ident | "(" expr ")"
//! ```

use std::fmt;

use super::PresenceError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PcExpr {
    True,
    False,
    Feature(String),
    Not(Box<PcExpr>),
    And(Box<PcExpr>, Box<PcExpr>),
    Or(Box<PcExpr>, Box<PcExpr>),
}

impl PcExpr {
    pub fn parse(text: &str) -> Result<PcExpr, PresenceError> {
        let tokens = lex(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(PresenceError::Parse {
                offset: p.offset(),
                message: format!("unexpected `{}`", p.tokens[p.pos].1),
            });
        }
        Ok(e)
    }

    pub fn not(self) -> PcExpr {
        PcExpr::Not(Box::new(self))
    }

    pub fn and(self, other: PcExpr) -> PcExpr {
        PcExpr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: PcExpr) -> PcExpr {
        PcExpr::Or(Box::new(self), Box::new(other))
    }

    /// Feature names mentioned, in order of first occurrence.
    pub fn features(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            PcExpr::True | PcExpr::False => {}
            PcExpr::Feature(f) => {
                if !out.contains(&f.as_str()) {
                    out.push(f);
                }
            }
            PcExpr::Not(e) => e.collect(out),
            PcExpr::And(a, b) | PcExpr::Or(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }
}

impl fmt::Display for PcExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn prec(e: &PcExpr) -> u8 {
            match e {
                PcExpr::Or(..) => 0,
                PcExpr::And(..) => 1,
                _ => 2,
            }
        }
        fn side(f: &mut fmt::Formatter<'_>, e: &PcExpr, min: u8) -> fmt::Result {
            if prec(e) < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            PcExpr::True => write!(f, "true"),
            PcExpr::False => write!(f, "false"),
            PcExpr::Feature(n) => write!(f, "{n}"),
            PcExpr::Not(e) => {
                write!(f, "!")?;
                side(f, e, 2)
            }
            PcExpr::And(a, b) => {
                side(f, a, 1)?;
                write!(f, " && ")?;
                side(f, b, 1)
            }
            PcExpr::Or(a, b) => {
                side(f, a, 0)?;
                write!(f, " || ")?;
                side(f, b, 0)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Not => write!(f, "!"),
            Tok::And => write!(f, "&&"),
            Tok::Or => write!(f, "||"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, PresenceError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'!' => {
                out.push((i, Tok::Not));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'&' if bytes.get(i + 1) == Some(&b'&') => {
                out.push((i, Tok::And));
                i += 2;
            }
            b'|' if bytes.get(i + 1) == Some(&b'|') => {
                out.push((i, Tok::Or));
                i += 2;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(PresenceError::Parse {
                    offset: i,
                    message: format!("unexpected character `{}`", text[i..].chars().next().unwrap()),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|t| t.0).unwrap_or(usize::MAX)
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, PresenceError> {
        Err(PresenceError::Parse {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<PcExpr, PresenceError> {
        let mut lhs = self.conj()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let rhs = self.conj()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<PcExpr, PresenceError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<PcExpr, PresenceError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(self.unary()?.not())
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "true" => Ok(PcExpr::True),
                    "false" => Ok(PcExpr::False),
                    "defined" => self.defined(),
                    _ => Ok(PcExpr::Feature(name)),
                }
            }
            Some(t) => self.err(format!("unexpected `{t}`")),
            None => self.err("unexpected end of expression"),
        }
    }

    fn defined(&mut self) -> Result<PcExpr, PresenceError> {
        let parens = self.peek() == Some(&Tok::LParen);
        if parens {
            self.pos += 1;
        }
        let name = match self.peek().cloned() {
            Some(Tok::Ident(n)) => n,
            _ => return self.err("expected feature name after `defined`"),
        };
        self.pos += 1;
        if parens {
            self.expect(Tok::RParen)?;
        }
        Ok(PcExpr::Feature(name))
    }

    fn expect(&mut self, tok: Tok) -> Result<(), PresenceError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{tok}`"))
        }
    }
}
