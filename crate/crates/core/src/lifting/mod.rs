//! Shallow and deep lifting of PCF+ definitions, and the per-product
//! brute-force oracle they are checked against.
//!
//! Lifted definitions are ordinary PCF+ definitions using the lifted
//! built-ins; the lifted counterpart of `f` is named `f__L`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use thiserror::Error;

use crate::pcf::{
    typecheck_program, Datum, EvalError, Interp, LiftedAlt, Name, Pattern, Prim, Program, Term,
    Type, TypeError, Value,
};
use crate::presence::{FeatureModel, Pc};
use crate::vvalue::Var;

pub const LIFTED_SUFFIX: &str = "__L";
pub const MAX_SHALLOW_ARITY: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiftError {
    #[error("`{0}` is not defined")]
    Undefined(String),
    #[error("`{0}` is planned both deep and shallow")]
    Conflict(String),
    #[error("name `{0}` collides with a generated name")]
    Collision(String),
    #[error("`{name}` has arity {arity}; shallow lifting supports 1 to {MAX_SHALLOW_ARITY}")]
    Arity { name: String, arity: usize },
    #[error("input already uses lifted construct `{0}`")]
    AlreadyLifted(&'static str),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("in configuration {config}: {error}")]
    Product { config: String, error: EvalError },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub fn lifted_name(name: &str) -> Name {
    format!("{name}{LIFTED_SUFFIX}").into()
}

/// The type of a deep-lifted value: lifting is pushed through lists,
/// pairs and function types down to the scalars.
pub fn lift_type(t: &Type) -> Type {
    match t {
        Type::Nat | Type::Bool => Type::lifted(t.clone()),
        Type::Pc => Type::Pc,
        Type::Lifted(inner) => lift_type(inner),
        Type::List(e) => Type::list(lift_type(e)),
        Type::Pair(a, b) => Type::pair(lift_type(a), lift_type(b)),
        Type::Fn(a, b) => Type::func(lift_type(a), lift_type(b)),
    }
}

/// Parameter types of a curried function type, and its final result.
fn uncurry(t: &Type) -> (Vec<Type>, Type) {
    let mut params = Vec::new();
    let mut t = t;
    while let Type::Fn(a, b) = t {
        params.push((**a).clone());
        t = b;
    }
    (params, t.clone())
}

/// `λa1 ... an. apply (liftT f) a1 ... an` for the first `arity` parameters
/// of `ty`.
pub fn shallow_lift(name: &str, ty: &Type, arity: usize) -> Result<Rc<Term>, LiftError> {
    let (params, _) = uncurry(ty);
    if arity == 0 || arity > MAX_SHALLOW_ARITY || arity > params.len() {
        return Err(LiftError::Arity {
            name: name.to_string(),
            arity,
        });
    }
    Ok(eta_apply(Rc::new(Term::Var(name.into())), &params[..arity], Vec::new()))
}

fn param_name(i: usize) -> Name {
    format!("a__{i}").into()
}

/// Lambdas over the remaining parameters around a lifted application of
/// `f` to `given` followed by those parameters.
fn eta_apply(f: Rc<Term>, remaining: &[Type], given: Vec<Rc<Term>>) -> Rc<Term> {
    let start = given.len();
    let mut args = given;
    for i in 0..remaining.len() {
        args.push(Rc::new(Term::Var(param_name(start + i))));
    }
    let mut body = Rc::new(Term::Apply(Rc::new(Term::LiftT(f)), args));
    for (i, t) in remaining.iter().enumerate().rev() {
        body = Rc::new(Term::Abs(param_name(start + i), Type::lifted(t.clone()).normalize(), body));
    }
    body
}

/// Which definitions to rewrite. Every other definition is used as a black
/// box.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LiftPlan {
    pub deep: BTreeSet<Name>,
    pub shallow: BTreeSet<Name>,
    /// Lifted type of every planned name, filled in by [`LiftPlan::resolve`].
    pub signatures: BTreeMap<Name, Type>,
}

impl LiftPlan {
    pub fn deep<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> LiftPlan {
        LiftPlan {
            deep: names.into_iter().map(|n| n.as_ref().into()).collect(),
            ..LiftPlan::default()
        }
    }

    /// Checks the plan against the program; undeclared definitions become
    /// shallow and signatures are computed.
    pub fn resolve(&self, program: &Program) -> Result<LiftPlan, LiftError> {
        let types = typecheck_program(program)?;
        for n in self.deep.iter().chain(&self.shallow) {
            if program.def(n).is_none() {
                return Err(LiftError::Undefined(n.to_string()));
            }
        }
        if let Some(n) = self.deep.intersection(&self.shallow).next() {
            return Err(LiftError::Conflict(n.to_string()));
        }
        let mut plan = self.clone();
        for (name, ty) in &types.defs {
            let sig = if plan.deep.contains(name) {
                lift_type(ty)
            } else {
                plan.shallow.insert(name.clone());
                Type::lifted(ty.clone()).normalize()
            };
            plan.signatures.insert(name.clone(), sig);
        }
        Ok(plan)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewriteOutput {
    /// The original definitions, each deep one followed by its lifted
    /// counterpart.
    pub program: Program,
    pub names: BTreeMap<Name, Name>,
    pub diagnostics: Vec<String>,
    /// Term nodes visited by the rewriter.
    pub visits: usize,
    /// Term nodes in the rewritten definitions.
    pub node_count: usize,
}

/// Deep-lifts the planned definitions in one pass over each.
pub fn deep_rewrite(program: &Program, plan: &LiftPlan) -> Result<RewriteOutput, LiftError> {
    let plan = plan.resolve(program)?;
    let types = typecheck_program(program)?;
    let defined: BTreeSet<&str> = program.defs.iter().map(|(n, _)| &**n).collect();
    for n in &plan.deep {
        let l = lifted_name(n);
        if defined.contains(&*l) {
            return Err(LiftError::Collision(l.to_string()));
        }
    }
    let mut rw = Rewriter {
        globals: HashMap::new(),
        scope: Vec::new(),
        branches: Vec::new(),
        visits: 0,
        diagnostics: Vec::new(),
    };
    let mut defs = Vec::new();
    let mut names = BTreeMap::new();
    let mut node_count = 0;
    for ((name, term), (_, ty)) in program.defs.iter().zip(&types.defs) {
        defs.push((name.clone(), term.clone()));
        if plan.deep.contains(name) {
            let (lifted, _) = rw.rewrite(term)?;
            node_count += term.node_count();
            let l = lifted_name(name);
            defs.push((l.clone(), lifted));
            names.insert(name.clone(), l.clone());
            rw.globals.insert(name.clone(), Global::Deep(l, ty.clone()));
        } else {
            rw.globals.insert(name.clone(), Global::Shallow(ty.clone()));
        }
    }
    Ok(RewriteOutput {
        program: Program {
            defs,
            main: program.main.clone(),
        },
        names,
        diagnostics: rw.diagnostics,
        visits: rw.visits,
        node_count,
    })
}

/// Adds `f__L = shallow_lift(f)` for each named function definition.
pub fn shallow_program<S: AsRef<str>>(
    program: &Program,
    names: impl IntoIterator<Item = S>,
) -> Result<RewriteOutput, LiftError> {
    let types = typecheck_program(program)?;
    let wanted: BTreeSet<Name> = names.into_iter().map(|n| n.as_ref().into()).collect();
    for n in &wanted {
        if program.def(n).is_none() {
            return Err(LiftError::Undefined(n.to_string()));
        }
    }
    let mut defs = Vec::new();
    let mut map = BTreeMap::new();
    for ((name, term), (_, ty)) in program.defs.iter().zip(&types.defs) {
        defs.push((name.clone(), term.clone()));
        if wanted.contains(name) {
            let l = lifted_name(name);
            if program.def(&l).is_some() {
                return Err(LiftError::Collision(l.to_string()));
            }
            let arity = uncurry(ty).0.len();
            defs.push((l.clone(), shallow_lift(name, ty, arity)?));
            map.insert(name.clone(), l);
        }
    }
    Ok(RewriteOutput {
        program: Program {
            defs,
            main: program.main.clone(),
        },
        names: map,
        diagnostics: Vec::new(),
        visits: 0,
        node_count: 0,
    })
}

/// Wraps every free occurrence of the named variables in `t` with
/// `(restrict ctx x)` and abstracts over `ctx`.
pub fn restrict_rewrite(t: &Rc<Term>, restrictable: &BTreeSet<Name>, ctx: &str) -> Rc<Term> {
    fn go(t: &Rc<Term>, vars: &BTreeSet<Name>, bound: &mut Vec<Name>, ctx: &Name) -> Rc<Term> {
        let rec = |t: &Rc<Term>, bound: &mut Vec<Name>| go(t, vars, bound, ctx);
        let t2 = match &**t {
            Term::Var(x) => {
                if vars.contains(x) && !bound.contains(x) {
                    return Rc::new(Term::Restrict(Rc::new(Term::Var(ctx.clone())), t.clone()));
                }
                return t.clone();
            }
            Term::Abs(x, ty, b) => {
                bound.push(x.clone());
                let b = rec(b, bound);
                bound.pop();
                Term::Abs(x.clone(), ty.clone(), b)
            }
            Term::App(a, b) => Term::App(rec(a, bound), rec(b, bound)),
            Term::Fix(a) => Term::Fix(rec(a, bound)),
            Term::Num(_) | Term::Bool(_) | Term::Prim(_) | Term::Nil(_) => return t.clone(),
            Term::BinOp(op, a, b) => Term::BinOp(*op, rec(a, bound), rec(b, bound)),
            Term::IsZero(a) => Term::IsZero(rec(a, bound)),
            Term::If(c, a, b) => Term::If(rec(c, bound), rec(a, bound), rec(b, bound)),
            Term::Case(s, alts) => {
                let s = rec(s, bound);
                let alts = alts
                    .iter()
                    .map(|(p, body)| {
                        let n = bound.len();
                        bound.extend(p.vars());
                        let body = rec(body, bound);
                        bound.truncate(n);
                        (p.clone(), body)
                    })
                    .collect();
                Term::Case(s, alts)
            }
            Term::Pair(a, b) => Term::Pair(rec(a, bound), rec(b, bound)),
            Term::Fst(a) => Term::Fst(rec(a, bound)),
            Term::Snd(a) => Term::Snd(rec(a, bound)),
            Term::Cons(a, b) => Term::Cons(rec(a, bound), rec(b, bound)),
            Term::IsNil(a) => Term::IsNil(rec(a, bound)),
            Term::Head(a) => Term::Head(rec(a, bound)),
            Term::Tail(a) => Term::Tail(rec(a, bound)),
            Term::LiftT(a) => Term::LiftT(rec(a, bound)),
            Term::Apply(f, args) => {
                Term::Apply(rec(f, bound), args.iter().map(|a| rec(a, bound)).collect())
            }
            Term::LiftedIf(c, a, b) => Term::LiftedIf(rec(c, bound), rec(a, bound), rec(b, bound)),
            Term::LiftedCase(s, alts) => {
                let s = rec(s, bound);
                let alts = alts
                    .iter()
                    .map(|a| {
                        let n = bound.len();
                        bound.extend(a.pattern.vars());
                        bound.push(a.ctx.clone());
                        let body = rec(&a.body, bound);
                        bound.truncate(n);
                        LiftedAlt {
                            pattern: a.pattern.clone(),
                            ctx: a.ctx.clone(),
                            body,
                        }
                    })
                    .collect();
                Term::LiftedCase(s, alts)
            }
            Term::Restrict(c, a) => Term::Restrict(rec(c, bound), rec(a, bound)),
        };
        Rc::new(t2)
    }
    let ctx: Name = ctx.into();
    let body = go(t, restrictable, &mut Vec::new(), &ctx);
    Rc::new(Term::Abs(ctx, Type::Pc, body))
}

enum Global {
    Deep(Name, Type),
    Shallow(Type),
}

struct Local {
    name: Name,
    ty: Type,
}

struct Rewriter {
    globals: HashMap<Name, Global>,
    scope: Vec<Local>,
    /// Context variable and scope depth of each enclosing branch.
    branches: Vec<(Name, usize)>,
    visits: usize,
    diagnostics: Vec<String>,
}

fn reserved(name: &str) -> bool {
    name.contains("__")
}

impl Rewriter {
    fn bind(&mut self, name: &Name, ty: Type) -> Result<(), LiftError> {
        if reserved(name) {
            return Err(LiftError::Collision(name.to_string()));
        }
        self.scope.push(Local {
            name: name.clone(),
            ty,
        });
        Ok(())
    }

    fn rewrite(&mut self, t: &Rc<Term>) -> Result<(Rc<Term>, Type), LiftError> {
        stacker::maybe_grow(32 * 1024, 1024 * 1024, || self.rw(t))
    }

    /// Rewrites `body` as a continuation receiving its branch context.
    fn branch(
        &mut self,
        binds: Vec<(Name, Type)>,
        body: &Rc<Term>,
    ) -> Result<(Name, Rc<Term>, Type), LiftError> {
        let ctx: Name = format!("ctx__{}", self.branches.len() + 1).into();
        let depth = self.scope.len();
        self.branches.push((ctx.clone(), depth));
        for (x, ty) in binds {
            self.bind(&x, ty)?;
        }
        let r = self.rewrite(body);
        self.scope.truncate(depth);
        self.branches.pop();
        let (b, ty) = r?;
        Ok((ctx, b, ty))
    }

    fn rw(&mut self, t: &Rc<Term>) -> Result<(Rc<Term>, Type), LiftError> {
        self.visits += 1;
        let lift = |t: Term| Rc::new(Term::LiftT(Rc::new(t)));
        Ok(match &**t {
            Term::Var(x) => return self.variable(x),
            Term::Num(n) => (lift(Term::Num(n.clone())), Type::Nat),
            Term::Bool(b) => (lift(Term::Bool(*b)), Type::Bool),
            Term::Prim(p) => {
                let ty = p.ty();
                (eta_apply(Rc::new(Term::Prim(*p)), &uncurry(&ty).0, Vec::new()), ty)
            }
            Term::Abs(x, ty, body) => {
                let depth = self.scope.len();
                self.bind(x, ty.clone())?;
                let r = self.rewrite(body);
                self.scope.truncate(depth);
                let (b, bt) = r?;
                (
                    Rc::new(Term::Abs(x.clone(), lift_type(ty), b)),
                    Type::func(ty.clone(), bt),
                )
            }
            Term::App(..) => return self.application(t),
            Term::Fix(f) => {
                let (f2, ft) = self.rewrite(f)?;
                let Type::Fn(a, _) = ft else {
                    unreachable!("input typechecks")
                };
                (Rc::new(Term::Fix(f2)), *a)
            }
            Term::BinOp(op, a, b) => {
                let (a2, _) = self.rewrite(a)?;
                let (b2, _) = self.rewrite(b)?;
                let f = Rc::new(Term::LiftT(Rc::new(Term::Prim(op.prim()))));
                (Rc::new(Term::Apply(f, vec![a2, b2])), Type::Nat)
            }
            Term::IsZero(a) => {
                let (a2, _) = self.rewrite(a)?;
                let f = Rc::new(Term::LiftT(Rc::new(Term::Prim(Prim::IsZero))));
                (Rc::new(Term::Apply(f, vec![a2])), Type::Bool)
            }
            Term::If(c, a, b) => {
                let (c2, _) = self.rewrite(c)?;
                let (x, a2, ty) = self.branch(Vec::new(), a)?;
                let (y, b2, _) = self.branch(Vec::new(), b)?;
                let k1 = Rc::new(Term::Abs(x, Type::Pc, a2));
                let k2 = Rc::new(Term::Abs(y, Type::Pc, b2));
                (Rc::new(Term::LiftedIf(c2, k1, k2)), ty)
            }
            Term::Case(s, alts) => {
                let (s2, st) = self.rewrite(s)?;
                let mut out = Vec::with_capacity(alts.len());
                let mut result = None;
                for (p, body) in alts {
                    let mut binds = Vec::new();
                    pattern_types(p, &st, &mut binds);
                    let (ctx, b2, ty) = self.branch(binds, body)?;
                    result.get_or_insert(ty);
                    out.push(LiftedAlt {
                        pattern: p.clone(),
                        ctx,
                        body: b2,
                    });
                }
                let ty = result.expect("case has alternatives");
                (Rc::new(Term::LiftedCase(s2, out)), ty)
            }
            Term::Pair(a, b) => {
                let (a2, at) = self.rewrite(a)?;
                let (b2, bt) = self.rewrite(b)?;
                (Rc::new(Term::Pair(a2, b2)), Type::pair(at, bt))
            }
            Term::Fst(a) | Term::Snd(a) => {
                let (a2, at) = self.rewrite(a)?;
                let Type::Pair(x, y) = at else {
                    unreachable!("input typechecks")
                };
                if matches!(&**t, Term::Fst(_)) {
                    (Rc::new(Term::Fst(a2)), *x)
                } else {
                    (Rc::new(Term::Snd(a2)), *y)
                }
            }
            Term::Nil(ty) => (Rc::new(Term::Nil(lift_type(ty))), Type::list(ty.clone())),
            Term::Cons(a, b) => {
                let (a2, _) = self.rewrite(a)?;
                let (b2, bt) = self.rewrite(b)?;
                (Rc::new(Term::Cons(a2, b2)), bt)
            }
            Term::IsNil(a) => {
                let (a2, _) = self.rewrite(a)?;
                (lift(Term::IsNil(a2)), Type::Bool)
            }
            Term::Head(a) => {
                let (a2, at) = self.rewrite(a)?;
                let Type::List(e) = at else {
                    unreachable!("input typechecks")
                };
                (Rc::new(Term::Head(a2)), *e)
            }
            Term::Tail(a) => {
                let (a2, at) = self.rewrite(a)?;
                (Rc::new(Term::Tail(a2)), at)
            }
            Term::LiftT(_) => return Err(LiftError::AlreadyLifted("liftT")),
            Term::Apply(..) => return Err(LiftError::AlreadyLifted("apply")),
            Term::LiftedIf(..) => return Err(LiftError::AlreadyLifted("lifted-if")),
            Term::LiftedCase(..) => return Err(LiftError::AlreadyLifted("lifted-case")),
            Term::Restrict(..) => return Err(LiftError::AlreadyLifted("restrict")),
        })
    }

    fn variable(&mut self, x: &Name) -> Result<(Rc<Term>, Type), LiftError> {
        if let Some(i) = self.scope.iter().rposition(|l| l.name == *x) {
            let ty = self.scope[i].ty.clone();
            let var = Rc::new(Term::Var(x.clone()));
            // Variables bound outside the innermost branch are trimmed to
            // its context.
            if let Some((ctx, depth)) = self.branches.last() {
                if i < *depth && !ty.is_fn() {
                    let c = Rc::new(Term::Var(ctx.clone()));
                    return Ok((Rc::new(Term::Restrict(c, var)), ty));
                }
            }
            return Ok((var, ty));
        }
        match self.globals.get(x) {
            Some(Global::Deep(l, ty)) => Ok((Rc::new(Term::Var(l.clone())), ty.clone())),
            Some(Global::Shallow(ty)) => {
                let ty = ty.clone();
                let f = Rc::new(Term::Var(x.clone()));
                let (params, _) = uncurry(&ty);
                if params.is_empty() {
                    Ok((Rc::new(Term::LiftT(f)), ty))
                } else {
                    self.diagnostics
                        .push(format!("first-class use of `{x}` wrapped shallowly"));
                    Ok((eta_apply(f, &params, Vec::new()), ty))
                }
            }
            None => Err(LiftError::Undefined(x.to_string())),
        }
    }

    fn application(&mut self, t: &Rc<Term>) -> Result<(Rc<Term>, Type), LiftError> {
        // The App node itself was counted by `rw`; count the rest of the spine.
        let mut args = Vec::new();
        let mut head = t;
        while let Term::App(f, a) = &**head {
            args.push(a);
            head = f;
        }
        args.reverse();
        self.visits += args.len() - 1;

        let black_box = match &**head {
            Term::Prim(p) => Some((Rc::new(Term::Prim(*p)), p.ty())),
            Term::Var(x) if !self.scope.iter().any(|l| l.name == *x) => match self.globals.get(x) {
                Some(Global::Shallow(ty)) if ty.is_fn() => {
                    Some((Rc::new(Term::Var(x.clone())), ty.clone()))
                }
                _ => None,
            },
            _ => None,
        };

        if let Some((f, fty)) = black_box {
            self.visits += 1;
            let (params, _) = uncurry(&fty);
            let n = params.len().min(args.len());
            let mut given = Vec::with_capacity(args.len());
            for a in &args {
                given.push(self.rewrite(a)?.0);
            }
            let extra = given.split_off(n);
            let mut out = eta_apply(f, &params[n..], given);
            let mut ty = fty;
            for _ in 0..n {
                let Type::Fn(_, r) = ty else { unreachable!() };
                ty = *r;
            }
            if !extra.is_empty() {
                self.diagnostics
                    .push(format!("black-box call `{head}` returns a function"));
                for a in extra {
                    out = Rc::new(Term::App(out, a));
                    let Type::Fn(_, r) = ty else { unreachable!() };
                    ty = *r;
                }
            }
            return Ok((out, ty));
        }

        let (mut out, mut ty) = self.rewrite(head)?;
        for a in args {
            let (a2, _) = self.rewrite(a)?;
            out = Rc::new(Term::App(out, a2));
            let Type::Fn(_, r) = ty else {
                unreachable!("input typechecks")
            };
            ty = *r;
        }
        Ok((out, ty))
    }
}

/// Types of a pattern's variables, given the scrutinee's unlifted type.
fn pattern_types(p: &Pattern, ty: &Type, out: &mut Vec<(Name, Type)>) {
    match (p, ty) {
        (Pattern::Var(x), t) => out.push((x.clone(), t.clone())),
        (Pattern::Pair(a, b), Type::Pair(x, y)) => {
            pattern_types(a, x, out);
            pattern_types(b, y, out);
        }
        (Pattern::Cons(a, b), Type::List(e)) => {
            pattern_types(a, e, out);
            pattern_types(b, ty, out);
        }
        _ => {}
    }
}

/// Runs the unlifted `f` once per class and assembles the results.
///
/// Each class is a presence condition with the product input valid under
/// it; classes must be disjoint.
pub fn brute_force_lift(
    program: &Program,
    f: &str,
    model: &FeatureModel,
    classes: &[(Pc, Value)],
) -> Result<(Var<Datum>, crate::pcf::Counters), LiftError> {
    let mut interp = Interp::new();
    interp.load(program);
    let mut pairs = Vec::with_capacity(classes.len());
    for (pc, input) in classes {
        let r = interp
            .call_global(f, std::slice::from_ref(input))
            .and_then(|v| interp.to_datum(&v))
            .map_err(|error| LiftError::Product {
                config: pc
                    .pick_config()
                    .map(|c| model.render_config(c))
                    .unwrap_or_else(|| pc.to_string()),
                error,
            })?;
        pairs.push((r, pc.clone()));
    }
    Ok((Var::fragment(model, pairs), interp.counters().clone()))
}

/// Product classes of a variational first-order input: one per distinct
/// variant.
pub fn input_classes(model: &FeatureModel, input: &Value) -> Result<Vec<(Pc, Value)>, EvalError> {
    let mut interp = Interp::with_model(model);
    let variants = interp.lower_datum(input)?.compact();
    Ok(variants
        .into_pairs()
        .into_iter()
        .map(|(d, pc)| (pc, d.to_value()))
        .collect())
}

/// Evaluates `f__L` of a lifted program on a variational input.
pub fn run_lifted(
    program: &Program,
    f: &str,
    model: &FeatureModel,
    input: Value,
) -> Result<(Var<Datum>, crate::pcf::Counters), LiftError> {
    let mut interp = Interp::with_model(model);
    interp.load(program);
    let v = interp.call_global(&lifted_name(f), &[input])?;
    let counters = interp.counters().clone();
    Ok((interp.lower_datum(&v)?, counters))
}

#[cfg(test)]
mod tests;
