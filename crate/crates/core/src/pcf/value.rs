//! Runtime values, memoizing thunks, and environments.

use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;

use super::nat::Nat;
use super::syntax::{Name, Prim, Term};
use crate::presence::Pc;
use crate::vvalue::Var;

pub struct Closure {
    pub param: Name,
    pub body: Rc<Term>,
    pub env: Env,
    /// Set for closures bound directly by a top-level definition; entries
    /// into such closures are counted as underlying calls.
    pub name: Option<Name>,
}

#[derive(Clone)]
pub enum Value {
    Nat(Nat),
    Bool(bool),
    Closure(Rc<Closure>),
    /// A primitive with the arguments supplied so far.
    Prim(Prim, Rc<[Value]>),
    Pair(Thunk, Thunk),
    Nil,
    Cons(Thunk, Thunk),
    /// A variational value. Atoms are never themselves `Var`, but may
    /// contain variational values below the top constructor.
    Var(Rc<Var<Value>>),
    Pc(Pc),
}

impl Value {
    pub fn nat(n: u64) -> Value {
        Value::Nat(Nat::from(n))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Value::Nat(_) => "a natural",
            Value::Bool(_) => "a boolean",
            Value::Closure(_) | Value::Prim(..) => "a function",
            Value::Pair(..) => "a pair",
            Value::Nil | Value::Cons(..) => "a list",
            Value::Var(_) => "a variational value",
            Value::Pc(_) => "a presence condition",
        }
    }

    /// A list value from already-evaluated elements.
    pub fn list(items: impl IntoIterator<Item = Value, IntoIter: DoubleEndedIterator>) -> Value {
        items.into_iter().rev().fold(Value::Nil, |tail, h| {
            Value::Cons(Thunk::done(h), Thunk::done(tail))
        })
    }

    pub fn nat_list(items: &[u64]) -> Value {
        Value::list(items.iter().map(|&n| Value::nat(n)))
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Thunk::done(a), Thunk::done(b))
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Closure(c) => match &c.name {
                Some(n) => write!(f, "<fn {n}>"),
                None => write!(f, "<fn>"),
            },
            Value::Prim(p, args) => write!(f, "<{} {}/{}>", p.symbol(), args.len(), p.arity()),
            Value::Pair(a, b) => write!(f, "(pair {a:?} {b:?})"),
            Value::Nil => write!(f, "nil"),
            Value::Cons(h, t) => write!(f, "(cons {h:?} {t:?})"),
            Value::Var(v) => write!(f, "{v:?}"),
            Value::Pc(p) => write!(f, "<pc {p}>"),
        }
    }
}

pub(crate) enum ThunkState {
    Delayed(Rc<Term>, Env),
    /// Union of the given thunks, each restricted to its presence condition.
    Restricted(Vec<(Thunk, Pc)>),
    /// Like a single restriction, but plain values pass through unchanged.
    Narrowed(Thunk, Pc),
    Evaluating,
    Done(Value),
}

/// A suspended computation, evaluated at most once.
#[derive(Clone)]
pub struct Thunk(pub(crate) Rc<RefCell<ThunkState>>);

impl Thunk {
    pub fn done(v: Value) -> Thunk {
        Thunk(Rc::new(RefCell::new(ThunkState::Done(v))))
    }

    pub fn delayed(t: Rc<Term>, env: Env) -> Thunk {
        Thunk(Rc::new(RefCell::new(ThunkState::Delayed(t, env))))
    }

    pub(crate) fn restricted(parts: Vec<(Thunk, Pc)>) -> Thunk {
        Thunk(Rc::new(RefCell::new(ThunkState::Restricted(parts))))
    }

    pub(crate) fn narrowed(th: Thunk, pc: Pc) -> Thunk {
        Thunk(Rc::new(RefCell::new(ThunkState::Narrowed(th, pc))))
    }

    /// The value, if already forced.
    pub fn peek(&self) -> Option<Value> {
        match &*self.0.borrow() {
            ThunkState::Done(v) => Some(v.clone()),
            _ => None,
        }
    }

    pub fn is_forced(&self) -> bool {
        matches!(&*self.0.borrow(), ThunkState::Done(_))
    }
}

thread_local! {
    static PLACEHOLDER: Rc<RefCell<ThunkState>> =
        Rc::new(RefCell::new(ThunkState::Done(Value::Nil)));
}

/// Detaches the second component of a uniquely owned evaluated cell.
fn unlink(rc: &mut Rc<RefCell<ThunkState>>) -> Option<Rc<RefCell<ThunkState>>> {
    let cell = Rc::get_mut(rc)?;
    match cell.get_mut() {
        ThunkState::Done(Value::Cons(_, t) | Value::Pair(_, t)) => {
            Some(std::mem::replace(&mut t.0, PLACEHOLDER.with(Rc::clone)))
        }
        _ => None,
    }
}

impl Drop for Thunk {
    // Long list spines would otherwise be freed recursively.
    fn drop(&mut self) {
        let mut next = unlink(&mut self.0);
        while let Some(mut rc) = next {
            next = unlink(&mut rc);
        }
    }
}

impl fmt::Debug for Thunk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0.borrow() {
            ThunkState::Done(v) => write!(f, "{v:?}"),
            _ => write!(f, "<thunk>"),
        }
    }
}

struct EnvNode {
    name: Name,
    value: Thunk,
    next: Env,
}

/// Persistent linked environment.
#[derive(Clone, Default)]
pub struct Env(Option<Rc<EnvNode>>);

impl Env {
    pub fn new() -> Env {
        Env(None)
    }

    pub fn bind(&self, name: Name, value: Thunk) -> Env {
        Env(Some(Rc::new(EnvNode {
            name,
            value,
            next: self.clone(),
        })))
    }

    pub fn lookup(&self, name: &Name) -> Option<&Thunk> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if Rc::ptr_eq(&node.name, name) || node.name == *name {
                return Some(&node.value);
            }
            cur = &node.next.0;
        }
        None
    }

    pub fn names(&self) -> Vec<Name> {
        let mut out = Vec::new();
        let mut cur = &self.0;
        while let Some(node) = cur {
            out.push(node.name.clone());
            cur = &node.next.0;
        }
        out
    }
}

/// A fully evaluated first-order value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Datum {
    Nat(Nat),
    Bool(bool),
    Pair(Box<Datum>, Box<Datum>),
    List(Vec<Datum>),
}

impl Datum {
    pub fn nat(n: u64) -> Datum {
        Datum::Nat(Nat::from(n))
    }

    pub fn pair(a: Datum, b: Datum) -> Datum {
        Datum::Pair(Box::new(a), Box::new(b))
    }

    pub fn to_value(&self) -> Value {
        match self {
            Datum::Nat(n) => Value::Nat(n.clone()),
            Datum::Bool(b) => Value::Bool(*b),
            Datum::Pair(a, b) => Value::pair(a.to_value(), b.to_value()),
            Datum::List(items) => Value::list(items.iter().map(Datum::to_value)),
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self {
            Datum::Nat(n) => n.to_u64(),
            _ => None,
        }
    }
}

impl fmt::Display for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Datum::Nat(n) => write!(f, "{n}"),
            Datum::Bool(b) => write!(f, "{b}"),
            Datum::Pair(a, b) => write!(f, "({a}, {b})"),
            Datum::List(items) => {
                write!(f, "[")?;
                for (i, d) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{d}")?;
                }
                write!(f, "]")
            }
        }
    }
}

impl fmt::Debug for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
