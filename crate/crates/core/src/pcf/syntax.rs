//! Abstract syntax of PCF+ and its lifted extension, with a printer for the
//! s-expression surface syntax.

use std::fmt;
use std::rc::Rc;

use super::nat::Nat;

pub type Name = Rc<str>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Nat,
    Bool,
    Pair(Box<Type>, Box<Type>),
    List(Box<Type>),
    Fn(Box<Type>, Box<Type>),
    /// A variational value of the inner type.
    Lifted(Box<Type>),
    /// A presence condition, passed to branch continuations.
    Pc,
}

impl Type {
    pub fn pair(a: Type, b: Type) -> Type {
        Type::Pair(Box::new(a), Box::new(b))
    }

    pub fn list(t: Type) -> Type {
        Type::List(Box::new(t))
    }

    pub fn func(a: Type, b: Type) -> Type {
        Type::Fn(Box::new(a), Box::new(b))
    }

    pub fn lifted(t: Type) -> Type {
        Type::Lifted(Box::new(t))
    }

    /// Curried function type `a1 -> ... -> an -> r`.
    pub fn arrows(params: impl IntoIterator<Item = Type>, result: Type) -> Type {
        let params: Vec<Type> = params.into_iter().collect();
        params
            .into_iter()
            .rev()
            .fold(result, |acc, p| Type::func(p, acc))
    }

    /// Normal form in which lifting over lists and pairs is pushed inward:
    /// a variational list is indistinguishable from a list of variational
    /// cells at runtime, since every accessor distributes over variation.
    pub fn normalize(&self) -> Type {
        match self {
            Type::Nat | Type::Bool | Type::Pc => self.clone(),
            Type::Pair(a, b) => Type::pair(a.normalize(), b.normalize()),
            Type::List(t) => Type::list(t.normalize()),
            Type::Fn(a, b) => Type::func(a.normalize(), b.normalize()),
            Type::Lifted(t) => match &**t {
                Type::Lifted(_) => t.normalize(),
                Type::List(e) => Type::list(Type::lifted((**e).clone()).normalize()),
                Type::Pair(a, b) => Type::pair(
                    Type::lifted((**a).clone()).normalize(),
                    Type::lifted((**b).clone()).normalize(),
                ),
                Type::Fn(a, b) => Type::lifted(Type::func(a.normalize(), b.normalize())),
                other => Type::lifted(other.clone()),
            },
        }
    }

    /// Equality up to [`Type::normalize`].
    pub fn same(&self, other: &Type) -> bool {
        self == other || self.normalize() == other.normalize()
    }

    pub fn contains_lifted(&self) -> bool {
        match self {
            Type::Nat | Type::Bool | Type::Pc => false,
            Type::Lifted(_) => true,
            Type::List(t) => t.contains_lifted(),
            Type::Pair(a, b) | Type::Fn(a, b) => a.contains_lifted() || b.contains_lifted(),
        }
    }

    pub fn is_fn(&self) -> bool {
        matches!(self, Type::Fn(..))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Nat => write!(f, "nat"),
            Type::Bool => write!(f, "bool"),
            Type::Pc => write!(f, "pc"),
            Type::Pair(a, b) => write!(f, "(pair {a} {b})"),
            Type::List(t) => write!(f, "(list {t})"),
            Type::Lifted(t) => write!(f, "(lifted {t})"),
            Type::Fn(..) => {
                write!(f, "(->")?;
                let mut t = self;
                while let Type::Fn(a, b) = t {
                    write!(f, " {a}")?;
                    t = b;
                }
                write!(f, " {t})")
            }
        }
    }
}

impl fmt::Debug for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Primitive functions usable as first-class values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Div,
    IsZero,
}

impl Prim {
    pub fn arity(self) -> usize {
        match self {
            Prim::IsZero => 1,
            _ => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Prim::Add => "+",
            Prim::Sub => "-",
            Prim::Mul => "*",
            Prim::Div => "/",
            Prim::IsZero => "iszero",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Prim> {
        Some(match s {
            "+" => Prim::Add,
            "-" => Prim::Sub,
            "*" => Prim::Mul,
            "/" => Prim::Div,
            "iszero" => Prim::IsZero,
            _ => return None,
        })
    }

    pub fn ty(self) -> Type {
        match self {
            Prim::IsZero => Type::func(Type::Nat, Type::Bool),
            _ => Type::arrows([Type::Nat, Type::Nat], Type::Nat),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn prim(self) -> Prim {
        match self {
            BinOp::Add => Prim::Add,
            BinOp::Sub => Prim::Sub,
            BinOp::Mul => Prim::Mul,
            BinOp::Div => Prim::Div,
        }
    }

    pub fn symbol(self) -> &'static str {
        self.prim().symbol()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(Name),
    Num(Nat),
    True,
    False,
    Pair(Box<Pattern>, Box<Pattern>),
    Cons(Box<Pattern>, Box<Pattern>),
    Nil,
}

impl Pattern {
    /// Variables in left-to-right order.
    pub fn vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Name>) {
        match self {
            Pattern::Var(x) => out.push(x.clone()),
            Pattern::Pair(a, b) | Pattern::Cons(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            _ => {}
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Pattern::Pair(a, b) | Pattern::Cons(a, b) => 1 + a.node_count() + b.node_count(),
            _ => 1,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(x) => write!(f, "{x}"),
            Pattern::Num(n) => write!(f, "{n}"),
            Pattern::True => write!(f, "true"),
            Pattern::False => write!(f, "false"),
            Pattern::Nil => write!(f, "nil"),
            Pattern::Pair(a, b) => write!(f, "(pair {a} {b})"),
            Pattern::Cons(a, b) => write!(f, "(cons {a} {b})"),
        }
    }
}

pub type Alt = (Pattern, Rc<Term>);

/// A lifted-case alternative: the pattern's variables and `ctx` are in scope
/// in `body`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedAlt {
    pub pattern: Pattern,
    pub ctx: Name,
    pub body: Rc<Term>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Var(Name),
    Abs(Name, Type, Rc<Term>),
    App(Rc<Term>, Rc<Term>),
    Fix(Rc<Term>),
    Num(Nat),
    Bool(bool),
    Prim(Prim),
    BinOp(BinOp, Rc<Term>, Rc<Term>),
    IsZero(Rc<Term>),
    If(Rc<Term>, Rc<Term>, Rc<Term>),
    Case(Rc<Term>, Vec<Alt>),
    Pair(Rc<Term>, Rc<Term>),
    Fst(Rc<Term>),
    Snd(Rc<Term>),
    Nil(Type),
    Cons(Rc<Term>, Rc<Term>),
    IsNil(Rc<Term>),
    Head(Rc<Term>),
    Tail(Rc<Term>),
    /// `{(t, True)}`.
    LiftT(Rc<Term>),
    /// Lifted application of a variational function to variational
    /// arguments.
    Apply(Rc<Term>, Vec<Rc<Term>>),
    /// Condition and two continuations taking a presence condition.
    LiftedIf(Rc<Term>, Rc<Term>, Rc<Term>),
    LiftedCase(Rc<Term>, Vec<LiftedAlt>),
    /// `(restrict ctx t)`: `t` trimmed to the configurations of `ctx`.
    Restrict(Rc<Term>, Rc<Term>),
}

impl Term {
    pub fn var(x: &str) -> Rc<Term> {
        Rc::new(Term::Var(x.into()))
    }

    pub fn num(n: u64) -> Rc<Term> {
        Rc::new(Term::Num(Nat::from(n)))
    }

    pub fn app(f: Rc<Term>, a: Rc<Term>) -> Rc<Term> {
        Rc::new(Term::App(f, a))
    }

    /// `f a1 ... an` as nested unary applications.
    pub fn apps(f: Rc<Term>, args: impl IntoIterator<Item = Rc<Term>>) -> Rc<Term> {
        args.into_iter().fold(f, Term::app)
    }

    /// Number of AST nodes, counting patterns and type annotations as one.
    pub fn node_count(&self) -> usize {
        1 + match self {
            Term::Var(_) | Term::Num(_) | Term::Bool(_) | Term::Prim(_) | Term::Nil(_) => 0,
            Term::Abs(_, _, b)
            | Term::Fix(b)
            | Term::IsZero(b)
            | Term::Fst(b)
            | Term::Snd(b)
            | Term::IsNil(b)
            | Term::Head(b)
            | Term::Tail(b)
            | Term::LiftT(b) => b.node_count(),
            Term::App(a, b)
            | Term::BinOp(_, a, b)
            | Term::Pair(a, b)
            | Term::Cons(a, b)
            | Term::Restrict(a, b) => a.node_count() + b.node_count(),
            Term::If(a, b, c) | Term::LiftedIf(a, b, c) => {
                a.node_count() + b.node_count() + c.node_count()
            }
            Term::Case(s, alts) => {
                s.node_count() + alts.iter().map(|(_, t)| t.node_count()).sum::<usize>()
            }
            Term::LiftedCase(s, alts) => {
                s.node_count() + alts.iter().map(|a| a.body.node_count()).sum::<usize>()
            }
            Term::Apply(f, args) => {
                f.node_count() + args.iter().map(|a| a.node_count()).sum::<usize>()
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Abs(x, t, b) => write!(f, "(lambda ({x} {t}) {b})"),
            Term::App(..) => {
                let mut args = Vec::new();
                let mut head = self;
                while let Term::App(g, a) = head {
                    args.push(a);
                    head = g;
                }
                write!(f, "({head}")?;
                for a in args.iter().rev() {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            Term::Fix(t) => write!(f, "(fix {t})"),
            Term::Num(n) => write!(f, "{n}"),
            Term::Bool(b) => write!(f, "{b}"),
            Term::Prim(p) => write!(f, "{}", p.symbol()),
            Term::BinOp(op, a, b) => write!(f, "({} {a} {b})", op.symbol()),
            Term::IsZero(t) => write!(f, "(iszero {t})"),
            Term::If(c, a, b) => write!(f, "(if {c} {a} {b})"),
            Term::Case(s, alts) => {
                write!(f, "(case {s}")?;
                for (p, t) in alts {
                    write!(f, " ({p} {t})")?;
                }
                write!(f, ")")
            }
            Term::Pair(a, b) => write!(f, "(pair {a} {b})"),
            Term::Fst(t) => write!(f, "(fst {t})"),
            Term::Snd(t) => write!(f, "(snd {t})"),
            Term::Nil(t) => write!(f, "(nil {t})"),
            Term::Cons(a, b) => write!(f, "(cons {a} {b})"),
            Term::IsNil(t) => write!(f, "(isnil {t})"),
            Term::Head(t) => write!(f, "(head {t})"),
            Term::Tail(t) => write!(f, "(tail {t})"),
            Term::LiftT(t) => write!(f, "(liftT {t})"),
            Term::Apply(g, args) => {
                write!(f, "(apply {g}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            Term::LiftedIf(c, a, b) => write!(f, "(lifted-if {c} {a} {b})"),
            Term::LiftedCase(s, alts) => {
                write!(f, "(lifted-case {s}")?;
                for a in alts {
                    write!(f, " ({} (lambda ({} pc) {}))", a.pattern, a.ctx, a.body)?;
                }
                write!(f, ")")
            }
            Term::Restrict(c, t) => write!(f, "(restrict {c} {t})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub defs: Vec<(Name, Rc<Term>)>,
    pub main: Option<Rc<Term>>,
}

impl Program {
    pub fn def(&self, name: &str) -> Option<&Rc<Term>> {
        self.defs.iter().find(|(n, _)| &**n == name).map(|(_, t)| t)
    }

    pub fn node_count(&self) -> usize {
        self.defs.iter().map(|(_, t)| t.node_count()).sum::<usize>()
            + self.main.as_ref().map_or(0, |m| m.node_count())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, t) in &self.defs {
            writeln!(f, "(define {n}\n  {t})")?;
        }
        if let Some(m) = &self.main {
            writeln!(f, "(main {m})")?;
        }
        Ok(())
    }
}
