//! S-expression reader and scope-checking parser for PCF+ programs.

use std::rc::Rc;

use thiserror::Error;

use super::nat::Nat;
use super::syntax::{BinOp, LiftedAlt, Name, Pattern, Prim, Program, Term, Type};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn pos(&self) -> usize {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

const RESERVED: &[&str] = &[
    "lambda", "fix", "if", "case", "pair", "fst", "snd", "nil", "cons", "isnil", "head",
    "tail", "iszero", "true", "false", "liftT", "apply", "lifted-if", "lifted-case",
    "restrict", "define", "main", "+", "-", "*", "/",
];

struct Reader<'a> {
    src: &'a str,
}

impl<'a> Reader<'a> {
    fn error(&self, pos: usize, message: impl Into<String>) -> ParseError {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }

    fn read_all(&self) -> Result<Vec<Sexp>, ParseError> {
        let bytes = self.src.as_bytes();
        let mut stack: Vec<(Vec<Sexp>, usize)> = vec![(Vec::new(), 0)];
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b';' => {
                    while i < bytes.len() && bytes[i] != b'\n' {
                        i += 1;
                    }
                }
                c if c.is_ascii_whitespace() => i += 1,
                b'(' => {
                    stack.push((Vec::new(), i));
                    i += 1;
                }
                b')' => {
                    if stack.len() == 1 {
                        return Err(self.error(i, "unbalanced `)`"));
                    }
                    let (items, start) = stack.pop().unwrap();
                    stack.last_mut().unwrap().0.push(Sexp::List(items, start));
                    i += 1;
                }
                _ => {
                    let start = i;
                    while i < bytes.len()
                        && !bytes[i].is_ascii_whitespace()
                        && !matches!(bytes[i], b'(' | b')' | b';')
                    {
                        i += 1;
                    }
                    let text = &self.src[start..i];
                    if !text
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || "_'-+*/<>=?!".contains(c))
                    {
                        return Err(self.error(start, format!("invalid token `{text}`")));
                    }
                    stack
                        .last_mut()
                        .unwrap()
                        .0
                        .push(Sexp::Atom(text.to_string(), start));
                }
            }
        }
        if stack.len() > 1 {
            let (_, start) = stack.pop().unwrap();
            return Err(self.error(start, "unclosed `(`"));
        }
        Ok(stack.pop().unwrap().0)
    }
}

struct Parser<'a> {
    reader: Reader<'a>,
    scope: Vec<Name>,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl<'a> Parser<'a> {
    fn err<T>(&self, at: &Sexp, message: impl Into<String>) -> Result<T, ParseError> {
        Err(self.reader.error(at.pos(), message))
    }

    fn binder(&self, s: &Sexp) -> Result<Name, ParseError> {
        match s {
            Sexp::Atom(a, _) if is_ident(a) && !RESERVED.contains(&a.as_str()) => Ok(a.as_str().into()),
            _ => self.err(s, "expected a variable name"),
        }
    }

    fn ty(&self, s: &Sexp) -> Result<Type, ParseError> {
        match s {
            Sexp::Atom(a, _) => match a.as_str() {
                "nat" => Ok(Type::Nat),
                "bool" => Ok(Type::Bool),
                "pc" => Ok(Type::Pc),
                _ => self.err(s, format!("unknown type `{a}`")),
            },
            Sexp::List(items, _) => {
                let head = match items.first() {
                    Some(Sexp::Atom(h, _)) => h.as_str(),
                    _ => return self.err(s, "malformed type"),
                };
                let args = &items[1..];
                match (head, args.len()) {
                    ("pair", 2) => Ok(Type::pair(self.ty(&args[0])?, self.ty(&args[1])?)),
                    ("list", 1) => Ok(Type::list(self.ty(&args[0])?)),
                    ("lifted", 1) => Ok(Type::lifted(self.ty(&args[0])?)),
                    ("->", n) if n >= 2 => {
                        let tys = args.iter().map(|a| self.ty(a)).collect::<Result<Vec<_>, _>>()?;
                        let (last, params) = tys.split_last().unwrap();
                        Ok(Type::arrows(params.iter().cloned(), last.clone()))
                    }
                    _ => self.err(s, format!("malformed type `{head}`")),
                }
            }
        }
    }

    fn pattern(&self, s: &Sexp, vars: &mut Vec<Name>) -> Result<Pattern, ParseError> {
        match s {
            Sexp::Atom(a, _) => {
                if let Some(n) = Nat::parse(a) {
                    return Ok(Pattern::Num(n));
                }
                match a.as_str() {
                    "true" => Ok(Pattern::True),
                    "false" => Ok(Pattern::False),
                    "nil" => Ok(Pattern::Nil),
                    _ => {
                        let x = self.binder(s)?;
                        if vars.contains(&x) {
                            return self.err(s, format!("variable `{x}` repeated in pattern"));
                        }
                        vars.push(x.clone());
                        Ok(Pattern::Var(x))
                    }
                }
            }
            Sexp::List(items, _) => match items.as_slice() {
                [Sexp::Atom(h, _), a, b] if h == "pair" => Ok(Pattern::Pair(
                    Box::new(self.pattern(a, vars)?),
                    Box::new(self.pattern(b, vars)?),
                )),
                [Sexp::Atom(h, _), a, b] if h == "cons" => Ok(Pattern::Cons(
                    Box::new(self.pattern(a, vars)?),
                    Box::new(self.pattern(b, vars)?),
                )),
                _ => self.err(s, "malformed pattern"),
            },
        }
    }

    fn with_bound<T>(
        &mut self,
        names: &[Name],
        f: impl FnOnce(&mut Self) -> Result<T, ParseError>,
    ) -> Result<T, ParseError> {
        let depth = self.scope.len();
        self.scope.extend(names.iter().cloned());
        let r = f(self);
        self.scope.truncate(depth);
        r
    }

    fn term(&mut self, s: &Sexp) -> Result<Rc<Term>, ParseError> {
        stacker::maybe_grow(32 * 1024, 1024 * 1024, || self.term_inner(s))
    }

    fn term_inner(&mut self, s: &Sexp) -> Result<Rc<Term>, ParseError> {
        let items = match s {
            Sexp::Atom(a, _) => return self.atom(s, a),
            Sexp::List(items, _) => items,
        };
        let Some(first) = items.first() else {
            return self.err(s, "empty form");
        };
        let args = &items[1..];
        let head = match first {
            Sexp::Atom(h, _) => h.as_str(),
            Sexp::List(..) => "",
        };
        let arity = |n: usize| -> Result<(), ParseError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(self.reader.error(
                    s.pos(),
                    format!("`{head}` expects {n} argument(s), got {}", args.len()),
                ))
            }
        };
        let t = match head {
            "lambda" => {
                arity(2)?;
                let (x, ty) = match &args[0] {
                    Sexp::List(b, _) if b.len() == 2 => (self.binder(&b[0])?, self.ty(&b[1])?),
                    other => return self.err(other, "expected `(name type)` binder"),
                };
                let body = self.with_bound(&[x.clone()], |p| p.term(&args[1]))?;
                Term::Abs(x, ty, body)
            }
            "fix" => {
                arity(1)?;
                Term::Fix(self.term(&args[0])?)
            }
            "if" => {
                arity(3)?;
                Term::If(self.term(&args[0])?, self.term(&args[1])?, self.term(&args[2])?)
            }
            "case" => {
                if args.len() < 2 {
                    return self.err(s, "`case` needs a scrutinee and at least one alternative");
                }
                let scrut = self.term(&args[0])?;
                let mut alts = Vec::new();
                for a in &args[1..] {
                    let (p, body) = match a {
                        Sexp::List(pb, _) if pb.len() == 2 => (&pb[0], &pb[1]),
                        _ => return self.err(a, "expected `(pattern term)` alternative"),
                    };
                    let mut vars = Vec::new();
                    let pat = self.pattern(p, &mut vars)?;
                    let body = self.with_bound(&vars, |p| p.term(body))?;
                    alts.push((pat, body));
                }
                Term::Case(scrut, alts)
            }
            "pair" => {
                arity(2)?;
                Term::Pair(self.term(&args[0])?, self.term(&args[1])?)
            }
            "cons" => {
                arity(2)?;
                Term::Cons(self.term(&args[0])?, self.term(&args[1])?)
            }
            "nil" => {
                arity(1)?;
                Term::Nil(self.ty(&args[0])?)
            }
            "fst" | "snd" | "isnil" | "head" | "tail" | "iszero" | "liftT" => {
                arity(1)?;
                let t = self.term(&args[0])?;
                match head {
                    "fst" => Term::Fst(t),
                    "snd" => Term::Snd(t),
                    "isnil" => Term::IsNil(t),
                    "head" => Term::Head(t),
                    "tail" => Term::Tail(t),
                    "iszero" => Term::IsZero(t),
                    _ => Term::LiftT(t),
                }
            }
            "+" | "-" | "*" | "/" => {
                arity(2)?;
                let op = match head {
                    "+" => BinOp::Add,
                    "-" => BinOp::Sub,
                    "*" => BinOp::Mul,
                    _ => BinOp::Div,
                };
                Term::BinOp(op, self.term(&args[0])?, self.term(&args[1])?)
            }
            "apply" => {
                if args.len() < 2 {
                    return self.err(s, "`apply` needs a function and at least one argument");
                }
                let f = self.term(&args[0])?;
                let xs = args[1..].iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                Term::Apply(f, xs)
            }
            "lifted-if" => {
                arity(3)?;
                Term::LiftedIf(self.term(&args[0])?, self.term(&args[1])?, self.term(&args[2])?)
            }
            "lifted-case" => {
                if args.len() < 2 {
                    return self.err(s, "`lifted-case` needs a scrutinee and alternatives");
                }
                let scrut = self.term(&args[0])?;
                let mut alts = Vec::new();
                for a in &args[1..] {
                    alts.push(self.lifted_alt(a)?);
                }
                Term::LiftedCase(scrut, alts)
            }
            "restrict" => {
                arity(2)?;
                Term::Restrict(self.term(&args[0])?, self.term(&args[1])?)
            }
            "define" | "main" | "true" | "false" => {
                return self.err(s, format!("`{head}` cannot appear here"))
            }
            _ => {
                if args.is_empty() {
                    return self.err(s, "application without arguments");
                }
                let f = self.term(first)?;
                let xs = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                return Ok(Term::apps(f, xs));
            }
        };
        Ok(Rc::new(t))
    }

    fn lifted_alt(&mut self, a: &Sexp) -> Result<LiftedAlt, ParseError> {
        let (p, k) = match a {
            Sexp::List(pk, _) if pk.len() == 2 => (&pk[0], &pk[1]),
            _ => return self.err(a, "expected `(pattern (lambda (ctx pc) term))`"),
        };
        let mut vars = Vec::new();
        let pattern = self.pattern(p, &mut vars)?;
        let (ctx, body) = match k {
            Sexp::List(l, _)
                if l.len() == 3 && matches!(&l[0], Sexp::Atom(h, _) if h == "lambda") =>
            {
                match &l[1] {
                    Sexp::List(b, _)
                        if b.len() == 2 && matches!(&b[1], Sexp::Atom(t, _) if t == "pc") =>
                    {
                        (self.binder(&b[0])?, &l[2])
                    }
                    other => return self.err(other, "expected `(ctx pc)` binder"),
                }
            }
            _ => return self.err(k, "alternative must be `(lambda (ctx pc) term)`"),
        };
        vars.push(ctx.clone());
        let body = self.with_bound(&vars, |p| p.term(body))?;
        Ok(LiftedAlt { pattern, ctx, body })
    }

    fn atom(&self, s: &Sexp, a: &str) -> Result<Rc<Term>, ParseError> {
        if let Some(n) = Nat::parse(a) {
            return Ok(Rc::new(Term::Num(n)));
        }
        match a {
            "true" => return Ok(Rc::new(Term::Bool(true))),
            "false" => return Ok(Rc::new(Term::Bool(false))),
            _ => {}
        }
        if let Some(p) = Prim::from_symbol(a) {
            return Ok(Rc::new(Term::Prim(p)));
        }
        if RESERVED.contains(&a) || !is_ident(a) {
            return self.err(s, format!("unexpected `{a}`"));
        }
        match self.scope.iter().rev().find(|n| &***n == a) {
            Some(n) => Ok(Rc::new(Term::Var(n.clone()))),
            None => self.err(s, format!("unbound variable `{a}`")),
        }
    }
}

/// Parses a whole program: `(define name term)` forms, optionally followed
/// by one `(main term)`.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    parse_program_with(src, &[])
}

/// Like [`parse_program`], with extra names already in scope.
pub fn parse_program_with(src: &str, globals: &[&str]) -> Result<Program, ParseError> {
    let reader = Reader { src };
    let forms = reader.read_all()?;
    let mut p = Parser {
        reader,
        scope: globals.iter().map(|g| Name::from(*g)).collect(),
    };
    let mut defs: Vec<(Name, Rc<Term>)> = Vec::new();
    let mut main = None;
    for form in &forms {
        let items = match form {
            Sexp::List(items, _) => items,
            _ => return p.err(form, "expected `(define ...)` or `(main ...)`"),
        };
        match items.first() {
            Some(Sexp::Atom(h, _)) if h == "define" && items.len() == 3 => {
                if main.is_some() {
                    return p.err(form, "definitions must precede `main`");
                }
                let name = p.binder(&items[1])?;
                if defs.iter().any(|(n, _)| *n == name) {
                    return p.err(&items[1], format!("`{name}` defined twice"));
                }
                let body = p.term(&items[2])?;
                p.scope.push(name.clone());
                defs.push((name, body));
            }
            Some(Sexp::Atom(h, _)) if h == "main" && items.len() == 2 => {
                if main.is_some() {
                    return p.err(form, "more than one `main`");
                }
                main = Some(p.term(&items[1])?);
            }
            _ => return p.err(form, "expected `(define name term)` or `(main term)`"),
        }
    }
    Ok(Program { defs, main })
}

/// Parses a single term with `globals` in scope.
pub fn parse_term(src: &str, globals: &[&str]) -> Result<Rc<Term>, ParseError> {
    let reader = Reader { src };
    let forms = reader.read_all()?;
    let p = Parser {
        reader,
        scope: globals.iter().map(|g| Name::from(*g)).collect(),
    };
    match forms.as_slice() {
        [one] => {
            let mut p = p;
            p.term(one)
        }
        [] => Err(p.reader.error(0, "empty input")),
        [_, second, ..] => p.err(second, "trailing input after term"),
    }
}

pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let reader = Reader { src };
    let forms = reader.read_all()?;
    let p = Parser {
        reader,
        scope: Vec::new(),
    };
    match forms.as_slice() {
        [one] => p.ty(one),
        _ => Err(p.reader.error(0, "expected exactly one type")),
    }
}
