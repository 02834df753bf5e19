//! Call-by-need evaluator for PCF+ and the lifted built-ins.
//!
//! Plain constructs follow the call-by-name semantics with memoized thunks.
//! Variational values may appear anywhere a lifted type is expected; the
//! lifted built-ins delegate to [`crate::vvalue`] and thread presence
//! condition contexts into branches before they run.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use thiserror::Error;

use super::nat::Nat;
use super::syntax::{LiftedAlt, Name, Pattern, Prim, Program, Term};
use super::value::{Closure, Datum, Env, Thunk, ThunkState, Value};
use crate::presence::{FeatureModel, Pc};
use crate::vvalue::{apply_n_with, meet, Var, VarError};

pub const DEFAULT_FUEL: u64 = 200_000_000;
pub const DEFAULT_MAX_DEPTH: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{op}: expected {expected}, found {found}")]
    Shape {
        op: &'static str,
        expected: &'static str,
        found: &'static str,
    },
    #[error("{0} of an empty list")]
    EmptyList(&'static str),
    #[error("no case alternative matches")]
    NoMatch,
    #[error("step budget of {0} exhausted")]
    OutOfFuel(u64),
    #[error("a value depends on itself")]
    Diverged,
    #[error("evaluation nested deeper than {0}")]
    TooDeep(usize),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("lifted construct evaluated without a feature model")]
    NoModel,
    #[error(transparent)]
    Var(#[from] VarError),
}

fn shape<T>(op: &'static str, expected: &'static str, found: &Value) -> Result<T, EvalError> {
    Err(EvalError::Shape {
        op,
        expected,
        found: found.kind(),
    })
}

const PRIMS: [Prim; 5] = [Prim::Add, Prim::Sub, Prim::Mul, Prim::Div, Prim::IsZero];

fn prim_slot(p: Prim) -> usize {
    PRIMS.iter().position(|q| *q == p).expect("listed")
}

/// Work counters. `underlying_calls` counts primitive operations plus
/// entries into functions bound by top-level definitions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub underlying_calls: u64,
    pub steps: u64,
    pub functions: BTreeMap<Name, u64>,
    pub prims: [u64; 5],
}

impl Counters {
    /// Calls of a definition or primitive (by symbol, e.g. `+`).
    pub fn calls_to(&self, name: &str) -> u64 {
        if let Some(p) = Prim::from_symbol(name) {
            return self.prims[prim_slot(p)];
        }
        self.functions.get(name).copied().unwrap_or(0)
    }

    pub fn prim_calls(&self) -> u64 {
        self.prims.iter().sum()
    }
}

pub struct Interp {
    model: Option<FeatureModel>,
    fuel: u64,
    max_depth: usize,
    depth: usize,
    counters: Counters,
    /// Lambdas that are the entry point of a definition, by address.
    entries: HashMap<*const Term, Name>,
    retained: Vec<Rc<Term>>,
    globals: Env,
}

impl Default for Interp {
    fn default() -> Self {
        Interp::new()
    }
}

impl Interp {
    pub fn new() -> Interp {
        Interp {
            model: None,
            fuel: DEFAULT_FUEL,
            max_depth: DEFAULT_MAX_DEPTH,
            depth: 0,
            counters: Counters::default(),
            entries: HashMap::new(),
            retained: Vec::new(),
            globals: Env::new(),
        }
    }

    pub fn with_model(model: &FeatureModel) -> Interp {
        let mut i = Interp::new();
        i.model = Some(model.clone());
        i
    }

    pub fn model(&self) -> Option<&FeatureModel> {
        self.model.as_ref()
    }

    pub fn set_fuel(&mut self, fuel: u64) {
        self.fuel = fuel;
    }

    pub fn set_max_depth(&mut self, depth: usize) {
        self.max_depth = depth;
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn reset_counters(&mut self) {
        self.counters = Counters::default();
    }

    pub fn globals(&self) -> &Env {
        &self.globals
    }

    /// Binds the program's definitions, in order, on top of the current
    /// globals. Returns the resulting environment.
    pub fn load(&mut self, program: &Program) -> Env {
        for (name, term) in &program.defs {
            self.retained.push(term.clone());
            let mut entry = &**term;
            if let Term::Fix(inner) = entry {
                if let Term::Abs(_, _, body) = &**inner {
                    entry = body;
                }
            }
            if let Term::Abs(..) = entry {
                self.entries.insert(entry as *const Term, name.clone());
            }
            let th = Thunk::delayed(term.clone(), self.globals.clone());
            self.globals = self.globals.bind(name.clone(), th);
        }
        self.globals.clone()
    }

    /// Loads the program and evaluates its `main` term, if any.
    pub fn run(&mut self, program: &Program) -> Result<Option<Value>, EvalError> {
        let env = self.load(program);
        match &program.main {
            Some(m) => self.eval(m, &env).map(Some),
            None => Ok(None),
        }
    }

    pub fn global(&mut self, name: &str) -> Result<Value, EvalError> {
        let th = self
            .globals
            .lookup(&Name::from(name))
            .cloned()
            .ok_or_else(|| EvalError::Unbound(name.to_string()))?;
        self.force(&th)
    }

    /// Applies a global definition to already-evaluated arguments.
    pub fn call_global(&mut self, name: &str, args: &[Value]) -> Result<Value, EvalError> {
        let f = self.global(name)?;
        self.call(f, args.iter().cloned().map(Thunk::done))
    }

    pub fn call(
        &mut self,
        f: Value,
        args: impl IntoIterator<Item = Thunk>,
    ) -> Result<Value, EvalError> {
        let mut f = f;
        for a in args {
            f = self.apply_value(f, a)?;
        }
        Ok(f)
    }

    fn lifted_model(&self) -> Result<FeatureModel, EvalError> {
        self.model.clone().ok_or(EvalError::NoModel)
    }

    fn tick(&mut self) -> Result<(), EvalError> {
        self.counters.steps += 1;
        if self.counters.steps > self.fuel {
            Err(EvalError::OutOfFuel(self.fuel))
        } else {
            Ok(())
        }
    }

    fn enter(&mut self, c: &Closure) {
        if let Some(n) = &c.name {
            self.counters.underlying_calls += 1;
            match self.counters.functions.get_mut(n) {
                Some(k) => *k += 1,
                None => {
                    self.counters.functions.insert(n.clone(), 1);
                }
            }
        }
    }

    fn count_prim(&mut self, p: Prim) {
        self.counters.underlying_calls += 1;
        self.counters.prims[prim_slot(p)] += 1;
    }

    fn nested<T>(
        &mut self,
        f: impl FnOnce(&mut Self) -> Result<T, EvalError>,
    ) -> Result<T, EvalError> {
        if self.depth >= self.max_depth {
            return Err(EvalError::TooDeep(self.max_depth));
        }
        self.depth += 1;
        let r = stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || f(self));
        self.depth -= 1;
        r
    }

    /// Evaluates `t` to weak head normal form.
    pub fn eval(&mut self, t: &Rc<Term>, env: &Env) -> Result<Value, EvalError> {
        let (t, env) = (t.clone(), env.clone());
        self.nested(move |me| me.eval_loop(t, env))
    }

    pub fn force(&mut self, th: &Thunk) -> Result<Value, EvalError> {
        let state = {
            let mut cell = th.0.borrow_mut();
            match &*cell {
                ThunkState::Done(v) => return Ok(v.clone()),
                ThunkState::Evaluating => return Err(EvalError::Diverged),
                _ => std::mem::replace(&mut *cell, ThunkState::Evaluating),
            }
        };
        let r = match &state {
            ThunkState::Delayed(t, env) => self.eval(t, env),
            ThunkState::Restricted(parts) => self.force_restricted(parts),
            ThunkState::Narrowed(th, pc) => match self.force(th)? {
                v @ Value::Var(_) => self.restrict_value(v, pc),
                v => Ok(v),
            },
            _ => unreachable!(),
        };
        *th.0.borrow_mut() = match &r {
            Ok(v) => ThunkState::Done(v.clone()),
            Err(_) => state,
        };
        r
    }

    fn force_restricted(&mut self, parts: &[(Thunk, Pc)]) -> Result<Value, EvalError> {
        if let [(th, pc)] = parts {
            let v = self.force(th)?;
            return self.restrict_value(v, pc);
        }
        let model = self.lifted_model()?;
        let mut out = Vec::new();
        for (th, pc) in parts {
            let v = self.force(th)?;
            push_restricted(&mut out, v, pc);
        }
        Ok(Value::Var(Rc::new(Var::fragment(&model, out))))
    }

    fn thunk(&self, t: &Rc<Term>, env: &Env) -> Thunk {
        match &**t {
            Term::Var(x) => match env.lookup(x) {
                Some(th) => th.clone(),
                None => Thunk::delayed(t.clone(), env.clone()),
            },
            Term::Num(n) => Thunk::done(Value::Nat(n.clone())),
            Term::Bool(b) => Thunk::done(Value::Bool(*b)),
            _ => Thunk::delayed(t.clone(), env.clone()),
        }
    }

    fn eval_loop(&mut self, mut t: Rc<Term>, mut env: Env) -> Result<Value, EvalError> {
        loop {
            self.tick()?;
            let next: (Rc<Term>, Env) = match &*t {
                Term::Var(x) => {
                    let th = env
                        .lookup(x)
                        .cloned()
                        .ok_or_else(|| EvalError::Unbound(x.to_string()))?;
                    return self.force(&th);
                }
                Term::Abs(x, _, body) => {
                    let name = self.entries.get(&Rc::as_ptr(&t)).cloned();
                    return Ok(Value::Closure(Rc::new(Closure {
                        param: x.clone(),
                        body: body.clone(),
                        env,
                        name,
                    })));
                }
                Term::App(f, a) => {
                    let fv = self.eval(f, &env)?;
                    let arg = self.thunk(a, &env);
                    match fv {
                        Value::Closure(c) => {
                            self.enter(&c);
                            (c.body.clone(), c.env.bind(c.param.clone(), arg))
                        }
                        other => return self.apply_value(other, arg),
                    }
                }
                Term::Fix(inner) => match self.eval(inner, &env)? {
                    Value::Closure(c) => {
                        self.enter(&c);
                        let me = Thunk::delayed(t.clone(), env.clone());
                        (c.body.clone(), c.env.bind(c.param.clone(), me))
                    }
                    other => {
                        let me = Thunk::delayed(t.clone(), env.clone());
                        return self.apply_value(other, me);
                    }
                },
                Term::Num(n) => return Ok(Value::Nat(n.clone())),
                Term::Bool(b) => return Ok(Value::Bool(*b)),
                Term::Prim(p) => return Ok(Value::Prim(*p, Rc::from(Vec::new()))),
                Term::BinOp(op, a, b) => {
                    let x = self.eval(a, &env)?;
                    let y = self.eval(b, &env)?;
                    return self.prim(op.prim(), &[x, y]);
                }
                Term::IsZero(a) => {
                    let x = self.eval(a, &env)?;
                    return self.prim(Prim::IsZero, &[x]);
                }
                Term::If(c, a, b) => match self.eval(c, &env)? {
                    Value::Bool(true) => (a.clone(), env),
                    Value::Bool(false) => (b.clone(), env),
                    other => return shape("if", "a boolean", &other),
                },
                Term::Case(s, alts) => {
                    let sv = Thunk::done(self.eval(s, &env)?);
                    let mut chosen = None;
                    for (p, body) in alts {
                        let mut binds = Vec::new();
                        if self.match_pattern(p, &sv, &mut binds)? {
                            chosen = Some((body.clone(), binds));
                            break;
                        }
                    }
                    let (body, binds) = chosen.ok_or(EvalError::NoMatch)?;
                    for (x, th) in binds {
                        env = env.bind(x, th);
                    }
                    (body, env)
                }
                Term::Pair(a, b) => return Ok(Value::Pair(self.thunk(a, &env), self.thunk(b, &env))),
                Term::Cons(a, b) => return Ok(Value::Cons(self.thunk(a, &env), self.thunk(b, &env))),
                Term::Nil(_) => return Ok(Value::Nil),
                Term::Fst(a) => {
                    let v = self.eval(a, &env)?;
                    return self.project(v, Access::Fst);
                }
                Term::Snd(a) => {
                    let v = self.eval(a, &env)?;
                    return self.project(v, Access::Snd);
                }
                Term::Head(a) => {
                    let v = self.eval(a, &env)?;
                    return self.project(v, Access::Head);
                }
                Term::Tail(a) => {
                    let v = self.eval(a, &env)?;
                    return self.project(v, Access::Tail);
                }
                Term::IsNil(a) => {
                    let v = self.eval(a, &env)?;
                    return self.project(v, Access::IsNil);
                }
                Term::LiftT(a) => {
                    let v = self.eval(a, &env)?;
                    return match v {
                        Value::Var(_) => Ok(v),
                        v => {
                            let model = self.lifted_model()?;
                            Ok(Value::Var(Rc::new(Var::mk_var_t(&model, v))))
                        }
                    };
                }
                Term::Restrict(c, a) => {
                    let ctx = match self.eval(c, &env)? {
                        Value::Pc(p) => p,
                        other => return shape("restrict", "a presence condition", &other),
                    };
                    let v = self.eval(a, &env)?;
                    return self.restrict_value(v, &ctx);
                }
                Term::Apply(f, args) => return self.lifted_apply(f, args, &env),
                Term::LiftedIf(c, k1, k2) => return self.lifted_if(c, k1, k2, &env),
                Term::LiftedCase(s, alts) => return self.lifted_case(s, alts, &env),
            };
            (t, env) = next;
        }
    }

    /// Applies a function value to one argument.
    pub fn apply_value(&mut self, f: Value, arg: Thunk) -> Result<Value, EvalError> {
        match f {
            Value::Closure(c) => {
                self.enter(&c);
                let env = c.env.bind(c.param.clone(), arg);
                self.eval(&c.body, &env)
            }
            Value::Prim(p, args) => {
                let mut all: Vec<Value> = args.to_vec();
                all.push(self.force(&arg)?);
                if all.len() == p.arity() {
                    self.prim(p, &all)
                } else {
                    Ok(Value::Prim(p, Rc::from(all)))
                }
            }
            Value::Var(vf) => {
                let model = vf.model().clone();
                let mut out = Vec::new();
                for (g, pc) in vf.pairs() {
                    let a = Thunk::narrowed(arg.clone(), pc.clone());
                    let r = self.apply_value(g.clone(), a)?;
                    push_restricted(&mut out, r, pc);
                }
                Ok(Value::Var(Rc::new(Var::fragment(&model, out))))
            }
            other => shape("application", "a function", &other),
        }
    }

    fn prim(&mut self, p: Prim, args: &[Value]) -> Result<Value, EvalError> {
        let op = p.symbol();
        let nat = |v: &Value| -> Result<Nat, EvalError> {
            match v {
                Value::Nat(n) => Ok(n.clone()),
                other => shape(op, "a natural", other),
            }
        };
        let r = match p {
            Prim::IsZero => Value::Bool(nat(&args[0])?.is_zero()),
            Prim::Add => Value::Nat(nat(&args[0])?.add(&nat(&args[1])?)),
            Prim::Sub => Value::Nat(nat(&args[0])?.monus(&nat(&args[1])?)),
            Prim::Mul => Value::Nat(nat(&args[0])?.mul(&nat(&args[1])?)),
            Prim::Div => Value::Nat(
                nat(&args[0])?
                    .div(&nat(&args[1])?)
                    .ok_or(EvalError::DivisionByZero)?,
            ),
        };
        self.count_prim(p);
        Ok(r)
    }

    fn project(&mut self, v: Value, access: Access) -> Result<Value, EvalError> {
        match (access, v) {
            (Access::Fst, Value::Pair(a, _)) => self.force(&a),
            (Access::Snd, Value::Pair(_, b)) => self.force(&b),
            (Access::Head, Value::Cons(h, _)) => self.force(&h),
            (Access::Tail, Value::Cons(_, t)) => self.force(&t),
            (Access::Head, Value::Nil) => Err(EvalError::EmptyList("head")),
            (Access::Tail, Value::Nil) => Ok(Value::Nil),
            (Access::IsNil, Value::Nil) => Ok(Value::Bool(true)),
            (Access::IsNil, Value::Cons(..)) => Ok(Value::Bool(false)),
            (access, Value::Var(vv)) => {
                let model = vv.model().clone();
                let mut out = Vec::new();
                for (a, pc) in vv.pairs() {
                    let r = self.project(a.clone(), access)?;
                    push_restricted(&mut out, r, pc);
                }
                Ok(Value::Var(Rc::new(Var::fragment(&model, out))))
            }
            (access, other) => {
                let (op, expected) = access.describe();
                shape(op, expected, &other)
            }
        }
    }

    /// Plain first-match pattern matching, forcing only what the pattern
    /// inspects.
    pub fn match_pattern(
        &mut self,
        p: &Pattern,
        th: &Thunk,
        binds: &mut Vec<(Name, Thunk)>,
    ) -> Result<bool, EvalError> {
        if let Pattern::Var(x) = p {
            binds.push((x.clone(), th.clone()));
            return Ok(true);
        }
        let v = self.force(th)?;
        match (p, &v) {
            (Pattern::Num(n), Value::Nat(m)) => Ok(n == m),
            (Pattern::True, Value::Bool(b)) => Ok(*b),
            (Pattern::False, Value::Bool(b)) => Ok(!*b),
            (Pattern::Nil, Value::Nil) => Ok(true),
            (Pattern::Nil, Value::Cons(..)) => Ok(false),
            (Pattern::Cons(..), Value::Nil) => Ok(false),
            (Pattern::Pair(a, b), Value::Pair(x, y)) | (Pattern::Cons(a, b), Value::Cons(x, y)) => {
                Ok(self.match_pattern(a, x, binds)? && self.match_pattern(b, y, binds)?)
            }
            (_, other) => shape("case", pattern_expects(p), other),
        }
    }

    /// `v` trimmed to the configurations of `pc`. A plain value becomes the
    /// fragment `{(v, pc)}`; nothing changes under `True`.
    pub fn restrict_value(&mut self, v: Value, pc: &Pc) -> Result<Value, EvalError> {
        if pc.is_true() {
            return Ok(v);
        }
        let mut out = Vec::new();
        push_restricted(&mut out, v, pc);
        Ok(Value::Var(Rc::new(Var::fragment(pc.model(), out))))
    }

    fn as_var(&self, v: Value) -> Result<Var<Value>, EvalError> {
        match v {
            Value::Var(vv) => Ok(Rc::unwrap_or_clone(vv)),
            v => Ok(Var::mk_var_t(&self.lifted_model()?, v)),
        }
    }

    fn lifted_apply(
        &mut self,
        f: &Rc<Term>,
        args: &[Rc<Term>],
        env: &Env,
    ) -> Result<Value, EvalError> {
        let fv = self.eval(f, env)?;
        let vf = self.as_var(fv)?;
        let mut lowered = Vec::with_capacity(args.len());
        for a in args {
            let v = self.eval(a, env)?;
            lowered.push(self.lower(&v)?);
        }
        let refs: Vec<&Var<Value>> = lowered.iter().collect();
        let r = apply_n_with(&vf, &refs, |g, xs| {
            self.call(g.clone(), xs.iter().map(|x| Thunk::done((*x).clone())))
        })?;
        Ok(flatten(r))
    }

    fn lifted_if(
        &mut self,
        c: &Rc<Term>,
        k1: &Rc<Term>,
        k2: &Rc<Term>,
        env: &Env,
    ) -> Result<Value, EvalError> {
        let cv = self.eval(c, env)?;
        let cond = self.as_var(cv)?;
        let model = cond.model().clone();
        // Atoms carry satisfiable pcs, so a non-empty side has a
        // satisfiable context.
        let mut sides = [(model.pc_false(), false), (model.pc_false(), false)];
        for (b, pc) in cond.pairs() {
            let side = match b {
                Value::Bool(true) => 0,
                Value::Bool(false) => 1,
                other => return shape("lifted-if", "a boolean", other),
            };
            sides[side].0 = sides[side].0.or(pc);
            sides[side].1 = true;
        }
        let mut out = Vec::new();
        for ((ctx, live), k) in sides.into_iter().zip([k1, k2]) {
            if !live {
                continue;
            }
            let kv = self.eval(k, env)?;
            let r = self.apply_value(kv, Thunk::done(Value::Pc(ctx.clone())))?;
            if ctx.is_true() {
                return Ok(r);
            }
            push_restricted(&mut out, r, &ctx);
        }
        Ok(Value::Var(Rc::new(Var::fragment(&model, out))))
    }

    fn lifted_case(
        &mut self,
        s: &Rc<Term>,
        alts: &[LiftedAlt],
        env: &Env,
    ) -> Result<Value, EvalError> {
        let model = self.lifted_model()?;
        let shape = alts
            .iter()
            .fold(Shape::Leaf, |acc, a| acc.merge(Shape::of(&a.pattern)));
        let scrutinee = self.thunk(s, env);
        let views = self.expand(&scrutinee, &shape, &model.pc_true())?;

        // Splitting: the first matching alternative of every view.
        let mut groups: Vec<Vec<(Pc, Vec<(Name, Thunk)>)>> = vec![Vec::new(); alts.len()];
        for (view, pc) in views {
            let mut found = false;
            for (k, alt) in alts.iter().enumerate() {
                let mut binds = Vec::new();
                if match_view(&alt.pattern, &view, &mut binds)? {
                    groups[k].push((pc, binds));
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(EvalError::NoMatch);
            }
        }

        let mut out = Vec::new();
        for (alt, members) in alts.iter().zip(groups) {
            if members.is_empty() {
                continue;
            }
            let ctx = members
                .iter()
                .fold(model.pc_false(), |acc, (pc, _)| acc.or(pc));
            // Binding: variable j collects the j-th binding of every member.
            let mut env2 = env.clone();
            let vars = alt.pattern.vars();
            for (j, x) in vars.iter().enumerate() {
                let parts: Vec<(Thunk, Pc)> = members
                    .iter()
                    .map(|(pc, binds)| (binds[j].1.clone(), pc.clone()))
                    .collect();
                let th = match parts.as_slice() {
                    [(th, pc)] if pc.is_true() => th.clone(),
                    _ => Thunk::restricted(parts),
                };
                env2 = env2.bind(x.clone(), th);
            }
            env2 = env2.bind(alt.ctx.clone(), Thunk::done(Value::Pc(ctx.clone())));
            // Evaluation.
            let r = self.eval(&alt.body, &env2)?;
            if ctx.is_true() {
                return Ok(r);
            }
            push_restricted(&mut out, r, &ctx);
        }
        Ok(Value::Var(Rc::new(Var::fragment(&model, out))))
    }

    /// Splits the value of `th` into views that are plain at every position
    /// `shape` inspects, each under the presence condition where it holds.
    fn expand(&mut self, th: &Thunk, shape: &Shape, pc: &Pc) -> Result<Vec<(View, Pc)>, EvalError> {
        let kids = match shape {
            Shape::Leaf => return Ok(vec![(View::Leaf(th.clone()), pc.clone())]),
            Shape::Inspect(kids) => kids,
        };
        let v = self.force(th)?;
        let atoms: Vec<(Value, Pc)> = match v {
            Value::Var(vv) => vv
                .pairs()
                .iter()
                .filter_map(|(a, q)| meet(q, pc).map(|r| (a.clone(), r)))
                .collect(),
            v => vec![(v, pc.clone())],
        };
        let mut out = Vec::new();
        for (a, q) in atoms {
            match (&a, kids) {
                (Value::Pair(x, y) | Value::Cons(x, y), Some(ks)) => {
                    let (x, y) = (x.clone(), y.clone());
                    for (xv, q1) in self.nested(|me| me.expand(&x, &ks.0, &q))? {
                        for (yv, q2) in self.nested(|me| me.expand(&y, &ks.1, &q1))? {
                            let node = View::Node(a.clone(), Some(Box::new((xv.clone(), yv))));
                            out.push((node, q2));
                        }
                    }
                }
                _ => out.push((View::Node(a, None), q)),
            }
        }
        Ok(out)
    }

    /// All variants of `v` as fully forced values free of variation.
    pub fn lower(&mut self, v: &Value) -> Result<Var<Value>, EvalError> {
        let model = self.lifted_model()?;
        let pairs = self.nested(|me| me.lower_in(v, &model.pc_true()))?;
        Ok(Var::fragment(&model, pairs))
    }

    fn lower_in(&mut self, v: &Value, pc: &Pc) -> Result<Vec<(Value, Pc)>, EvalError> {
        match v {
            Value::Var(vv) => {
                let mut out = Vec::new();
                for (a, q) in vv.pairs() {
                    if let Some(r) = meet(q, pc) {
                        out.extend(self.lower_in(a, &r)?);
                    }
                }
                Ok(out)
            }
            Value::Pair(a, b) | Value::Cons(a, b) => {
                let is_pair = matches!(v, Value::Pair(..));
                let (a, b) = (a.clone(), b.clone());
                let av = self.force(&a)?;
                let mut out = Vec::new();
                for (x, q) in self.nested(|me| me.lower_in(&av, pc))? {
                    let bv = self.force(&b)?;
                    for (y, r) in self.nested(|me| me.lower_in(&bv, &q))? {
                        let (x, y) = (Thunk::done(x.clone()), Thunk::done(y));
                        let node = if is_pair {
                            Value::Pair(x, y)
                        } else {
                            Value::Cons(x, y)
                        };
                        out.push((node, r));
                    }
                }
                Ok(out)
            }
            other => Ok(vec![(other.clone(), pc.clone())]),
        }
    }

    /// Forces a plain first-order value completely.
    pub fn to_datum(&mut self, v: &Value) -> Result<Datum, EvalError> {
        match v {
            Value::Nat(n) => Ok(Datum::Nat(n.clone())),
            Value::Bool(b) => Ok(Datum::Bool(*b)),
            Value::Pair(a, b) => {
                let (a, b) = (self.force(a)?, self.force(b)?);
                let x = self.nested(|me| me.to_datum(&a))?;
                let y = self.nested(|me| me.to_datum(&b))?;
                Ok(Datum::pair(x, y))
            }
            Value::Nil | Value::Cons(..) => {
                let mut items = Vec::new();
                let mut cur = v.clone();
                loop {
                    match cur {
                        Value::Nil => break,
                        Value::Cons(h, t) => {
                            let hv = self.force(&h)?;
                            items.push(self.nested(|me| me.to_datum(&hv))?);
                            cur = self.force(&t)?;
                        }
                        other => return shape("list", "a list", &other),
                    }
                }
                Ok(Datum::List(items))
            }
            other => shape("datum", "a first-order plain value", other),
        }
    }

    /// All variants of a first-order value, as data.
    pub fn lower_datum(&mut self, v: &Value) -> Result<Var<Datum>, EvalError> {
        let lowered = self.lower(v)?;
        let model = lowered.model().clone();
        let mut pairs = Vec::with_capacity(lowered.len());
        for (a, pc) in lowered.into_pairs() {
            pairs.push((self.to_datum(&a)?, pc));
        }
        Ok(Var::fragment(&model, pairs))
    }

    /// Human-readable rendering: data as data, variation as `{(v, pc); ...}`.
    pub fn render(&mut self, v: &Value) -> Result<String, EvalError> {
        if self.model.is_some() {
            let var = self.lower_datum(v)?;
            if let [(d, pc)] = var.pairs() {
                if pc.is_true() {
                    return Ok(d.to_string());
                }
            }
            return Ok(var.compact().to_string());
        }
        match v {
            Value::Closure(_) | Value::Prim(..) | Value::Pc(_) => Ok(format!("{v:?}")),
            _ => Ok(self.to_datum(v)?.to_string()),
        }
    }
}

#[derive(Clone, Copy)]
enum Access {
    Fst,
    Snd,
    Head,
    Tail,
    IsNil,
}

impl Access {
    fn describe(self) -> (&'static str, &'static str) {
        match self {
            Access::Fst => ("fst", "a pair"),
            Access::Snd => ("snd", "a pair"),
            Access::Head => ("head", "a non-empty list"),
            Access::Tail => ("tail", "a non-empty list"),
            Access::IsNil => ("isnil", "a list"),
        }
    }
}

fn pattern_expects(p: &Pattern) -> &'static str {
    match p {
        Pattern::Var(_) => "anything",
        Pattern::Num(_) => "a natural",
        Pattern::True | Pattern::False => "a boolean",
        Pattern::Pair(..) => "a pair",
        Pattern::Cons(..) | Pattern::Nil => "a list",
    }
}

/// Appends `v` restricted to `pc`, expanding a variational `v` in place.
fn push_restricted(out: &mut Vec<(Value, Pc)>, v: Value, pc: &Pc) {
    match v {
        Value::Var(vv) => {
            for (a, q) in vv.pairs() {
                if let Some(r) = meet(q, pc) {
                    out.push((a.clone(), r));
                }
            }
        }
        v => out.push((v, pc.clone())),
    }
}

/// Inlines variational atoms so no atom is itself variational.
fn flatten(v: Var<Value>) -> Value {
    let model = v.model().clone();
    if !v.atoms().any(|a| matches!(a, Value::Var(_))) {
        return Value::Var(Rc::new(v));
    }
    let mut out = Vec::new();
    for (a, pc) in v.into_pairs() {
        push_restricted(&mut out, a, &pc);
    }
    Value::Var(Rc::new(Var::fragment(&model, out)))
}

/// Positions inspected by any pattern of a lifted case.
#[derive(Clone, Debug)]
enum Shape {
    Leaf,
    Inspect(Option<Box<(Shape, Shape)>>),
}

impl Shape {
    fn of(p: &Pattern) -> Shape {
        match p {
            Pattern::Var(_) => Shape::Leaf,
            Pattern::Pair(a, b) | Pattern::Cons(a, b) => {
                Shape::Inspect(Some(Box::new((Shape::of(a), Shape::of(b)))))
            }
            _ => Shape::Inspect(None),
        }
    }

    fn merge(self, other: Shape) -> Shape {
        match (self, other) {
            (Shape::Leaf, s) | (s, Shape::Leaf) => s,
            (Shape::Inspect(None), s) | (s, Shape::Inspect(None)) => match s {
                Shape::Leaf => Shape::Inspect(None),
                s => s,
            },
            (Shape::Inspect(Some(a)), Shape::Inspect(Some(b))) => {
                let (a1, a2) = *a;
                let (b1, b2) = *b;
                Shape::Inspect(Some(Box::new((a1.merge(b1), a2.merge(b2)))))
            }
        }
    }
}

/// A scrutinee variant, plain down to the inspected positions.
#[derive(Clone)]
enum View {
    Leaf(Thunk),
    Node(Value, Option<Box<(View, View)>>),
}

fn match_view(p: &Pattern, view: &View, binds: &mut Vec<(Name, Thunk)>) -> Result<bool, EvalError> {
    let (v, kids) = match view {
        View::Leaf(th) => {
            return match p {
                Pattern::Var(x) => {
                    binds.push((x.clone(), th.clone()));
                    Ok(true)
                }
                _ => unreachable!("inspected positions are expanded"),
            }
        }
        View::Node(v, kids) => (v, kids),
    };
    match (p, v) {
        (Pattern::Var(x), v) => {
            binds.push((x.clone(), Thunk::done(v.clone())));
            Ok(true)
        }
        (Pattern::Num(n), Value::Nat(m)) => Ok(n == m),
        (Pattern::True, Value::Bool(b)) => Ok(*b),
        (Pattern::False, Value::Bool(b)) => Ok(!*b),
        (Pattern::Nil, Value::Nil) => Ok(true),
        (Pattern::Nil, Value::Cons(..)) | (Pattern::Cons(..), Value::Nil) => Ok(false),
        (Pattern::Pair(a, b), Value::Pair(..)) | (Pattern::Cons(a, b), Value::Cons(..)) => {
            let (x, y) = &**kids.as_ref().expect("expanded");
            Ok(match_view(a, x, binds)? && match_view(b, y, binds)?)
        }
        (_, other) => shape("lifted-case", pattern_expects(p), other),
    }
}
