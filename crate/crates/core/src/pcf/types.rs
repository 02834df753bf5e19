//! Type checking. Each error names the rule whose premise failed.
//!
//! Returned types are in [`Type::normalize`] form.

use thiserror::Error;

use super::syntax::{LiftedAlt, Name, Pattern, Program, Term, Type};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{rule}: {message}")]
pub struct TypeError {
    pub rule: &'static str,
    pub message: String,
}

fn fail<T>(rule: &'static str, message: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError {
        rule,
        message: message.into(),
    })
}

/// Typing context; lookups return the innermost binding.
#[derive(Clone, Debug, Default)]
pub struct Ctx {
    bindings: Vec<(Name, Type)>,
}

impl Ctx {
    pub fn new() -> Self {
        Ctx::default()
    }

    pub fn push(&mut self, name: Name, ty: Type) {
        self.bindings.push((name, ty.normalize()));
    }

    pub fn lookup(&self, name: &str) -> Option<&Type> {
        self.bindings
            .iter()
            .rev()
            .find(|(n, _)| &**n == name)
            .map(|(_, t)| t)
    }

    fn scoped<T>(&mut self, extra: Vec<(Name, Type)>, f: impl FnOnce(&mut Self) -> T) -> T {
        let depth = self.bindings.len();
        for (n, t) in extra {
            self.push(n, t);
        }
        let r = f(self);
        self.bindings.truncate(depth);
        r
    }
}

pub fn typecheck(ctx: &mut Ctx, t: &Term) -> Result<Type, TypeError> {
    stacker::maybe_grow(32 * 1024, 1024 * 1024, || check(ctx, t))
}

/// Types of every definition and of `main`, checked in order.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgramTypes {
    pub defs: Vec<(Name, Type)>,
    pub main: Option<Type>,
}

pub fn typecheck_program(p: &Program) -> Result<ProgramTypes, TypeError> {
    typecheck_program_in(&mut Ctx::new(), p)
}

pub fn typecheck_program_in(ctx: &mut Ctx, p: &Program) -> Result<ProgramTypes, TypeError> {
    let mut defs = Vec::new();
    for (name, term) in &p.defs {
        let ty = typecheck(ctx, term).map_err(|e| TypeError {
            rule: e.rule,
            message: format!("in `{name}`: {}", e.message),
        })?;
        ctx.push(name.clone(), ty.clone());
        defs.push((name.clone(), ty));
    }
    let main = match &p.main {
        Some(m) => Some(typecheck(ctx, m)?),
        None => None,
    };
    Ok(ProgramTypes { defs, main })
}

fn expect(rule: &'static str, what: &str, found: &Type, want: &Type) -> Result<(), TypeError> {
    if found.same(want) {
        Ok(())
    } else {
        fail(rule, format!("{what} has type {found}, expected {want}"))
    }
}

fn check(ctx: &mut Ctx, t: &Term) -> Result<Type, TypeError> {
    let ty = match t {
        Term::Var(x) => match ctx.lookup(x) {
            Some(ty) => ty.clone(),
            None => return fail("T-var", format!("`{x}` is not bound")),
        },
        Term::Abs(x, ty, body) => {
            let b = ctx.scoped(vec![(x.clone(), ty.clone())], |c| typecheck(c, body))?;
            Type::func(ty.clone(), b)
        }
        Term::App(f, a) => {
            let ft = typecheck(ctx, f)?;
            let at = typecheck(ctx, a)?;
            match ft {
                Type::Fn(p, r) => {
                    expect("T-app", "argument", &at, &p)?;
                    *r
                }
                // A variational function: every variant receives the argument.
                Type::Lifted(inner) if inner.is_fn() => {
                    let Type::Fn(p, r) = *inner else { unreachable!() };
                    expect("T-app", "argument", &at, &p)?;
                    Type::lifted(*r)
                }
                other => return fail("T-app", format!("applying a non-function of type {other}")),
            }
        }
        Term::Fix(f) => match typecheck(ctx, f)? {
            Type::Fn(a, b) if a.same(&b) => *a,
            other => return fail("T-fix", format!("fix needs T -> T, got {other}")),
        },
        Term::Num(_) => Type::Nat,
        Term::Bool(_) => Type::Bool,
        Term::Prim(p) => p.ty(),
        Term::BinOp(op, a, b) => {
            let at = typecheck(ctx, a)?;
            let bt = typecheck(ctx, b)?;
            expect("T-binop", &format!("left operand of {}", op.symbol()), &at, &Type::Nat)?;
            expect("T-binop", &format!("right operand of {}", op.symbol()), &bt, &Type::Nat)?;
            Type::Nat
        }
        Term::IsZero(a) => {
            let at = typecheck(ctx, a)?;
            expect("T-iszero", "operand", &at, &Type::Nat)?;
            Type::Bool
        }
        Term::If(c, a, b) => {
            let ct = typecheck(ctx, c)?;
            expect("T-cond", "condition", &ct, &Type::Bool)?;
            let at = typecheck(ctx, a)?;
            let bt = typecheck(ctx, b)?;
            expect("T-cond", "else branch", &bt, &at)?;
            at
        }
        Term::Case(s, alts) => {
            let st = typecheck(ctx, s)?;
            let mut result: Option<Type> = None;
            for (p, body) in alts {
                let mut binds = Vec::new();
                bind_pattern(p, &st, false, &mut binds)?;
                let bt = ctx.scoped(binds, |c| typecheck(c, body))?;
                match &result {
                    None => result = Some(bt),
                    Some(r) => expect("T-case", "alternative", &bt, r)?,
                }
            }
            result.expect("parser guarantees an alternative")
        }
        Term::Pair(a, b) => Type::pair(typecheck(ctx, a)?, typecheck(ctx, b)?),
        Term::Fst(p) => match typecheck(ctx, p)? {
            Type::Pair(a, _) => *a,
            other => return fail("T-fst", format!("fst of non-pair type {other}")),
        },
        Term::Snd(p) => match typecheck(ctx, p)? {
            Type::Pair(_, b) => *b,
            other => return fail("T-snd", format!("snd of non-pair type {other}")),
        },
        Term::Nil(ty) => Type::list(ty.clone()),
        Term::Cons(h, tl) => {
            let ht = typecheck(ctx, h)?;
            let tt = typecheck(ctx, tl)?;
            expect("T-cons", "tail", &tt, &Type::list(ht.clone()))?;
            Type::list(ht)
        }
        Term::IsNil(l) => match typecheck(ctx, l)? {
            Type::List(_) => Type::Bool,
            other => return fail("T-isnil", format!("isnil of non-list type {other}")),
        },
        Term::Head(l) => match typecheck(ctx, l)? {
            Type::List(e) => *e,
            other => return fail("T-head", format!("head of non-list type {other}")),
        },
        Term::Tail(l) => match typecheck(ctx, l)? {
            Type::List(e) => Type::List(e),
            other => return fail("T-tail", format!("tail of non-list type {other}")),
        },
        Term::LiftT(a) => {
            let at = typecheck(ctx, a)?;
            if at == Type::Pc {
                return fail("T-liftT", "presence conditions cannot be lifted");
            }
            Type::lifted(at)
        }
        Term::Apply(f, args) => {
            let ft = typecheck(ctx, f)?;
            let mut rest = match ft {
                Type::Lifted(inner) if inner.is_fn() => *inner,
                other => {
                    return fail("T-apply", format!("applied value has type {other}, expected a lifted function"))
                }
            };
            for (i, a) in args.iter().enumerate() {
                let at = typecheck(ctx, a)?;
                match rest {
                    Type::Fn(p, r) => {
                        expect("T-apply", &format!("argument {}", i + 1), &at, &Type::lifted(*p))?;
                        rest = *r;
                    }
                    _ => return fail("T-apply", format!("too many arguments ({})", args.len())),
                }
            }
            Type::lifted(rest)
        }
        Term::LiftedIf(c, k1, k2) => {
            let ct = typecheck(ctx, c)?;
            expect("T-lifted-if", "condition", &ct, &Type::lifted(Type::Bool))?;
            let r1 = continuation(ctx, k1)?;
            let r2 = continuation(ctx, k2)?;
            expect("T-lifted-if", "else continuation result", &r2, &r1)?;
            r1
        }
        Term::LiftedCase(s, alts) => {
            let st = typecheck(ctx, s)?;
            let mut result: Option<Type> = None;
            for LiftedAlt { pattern, ctx: c, body } in alts {
                let mut binds = Vec::new();
                bind_pattern(pattern, &st, true, &mut binds)?;
                binds.push((c.clone(), Type::Pc));
                let bt = ctx.scoped(binds, |cx| typecheck(cx, body))?;
                match &result {
                    None => result = Some(bt),
                    Some(r) => expect("T-lifted-case", "alternative", &bt, r)?,
                }
            }
            result.expect("parser guarantees an alternative")
        }
        Term::Restrict(c, a) => {
            let ct = typecheck(ctx, c)?;
            expect("T-restrict", "context", &ct, &Type::Pc)?;
            let at = typecheck(ctx, a)?;
            if at.is_fn() || at == Type::Pc {
                return fail("T-restrict", format!("cannot restrict a value of type {at}"));
            }
            Type::lifted(at)
        }
    };
    Ok(ty.normalize())
}

fn continuation(ctx: &mut Ctx, k: &Term) -> Result<Type, TypeError> {
    match typecheck(ctx, k)? {
        Type::Fn(p, r) if *p == Type::Pc => Ok(*r),
        other => fail("T-lifted-if", format!("continuation has type {other}, expected (-> pc T)")),
    }
}

/// Checks `p` against the normalized type `ty`, collecting variable types.
/// With `lifted`, literal patterns also match variational scalars.
fn bind_pattern(
    p: &Pattern,
    ty: &Type,
    lifted: bool,
    out: &mut Vec<(Name, Type)>,
) -> Result<(), TypeError> {
    let rule = if lifted { "T-lifted-case" } else { "T-case" };
    let scalar = |want: Type| -> bool {
        ty == &want || (lifted && ty == &Type::lifted(want))
    };
    match (p, ty) {
        (Pattern::Var(x), _) => out.push((x.clone(), ty.clone())),
        (Pattern::Num(_), _) if scalar(Type::Nat) => {}
        (Pattern::True | Pattern::False, _) if scalar(Type::Bool) => {}
        (Pattern::Nil, Type::List(_)) => {}
        (Pattern::Pair(a, b), Type::Pair(at, bt)) => {
            bind_pattern(a, at, lifted, out)?;
            bind_pattern(b, bt, lifted, out)?;
        }
        (Pattern::Cons(h, t), Type::List(e)) => {
            bind_pattern(h, e, lifted, out)?;
            bind_pattern(t, ty, lifted, out)?;
        }
        _ => return fail(rule, format!("pattern {p} does not match type {ty}")),
    }
    Ok(())
}
