//! Variational values: finite maps from configurations to atoms, stored as
//! `(atom, presence condition)` pairs.
//!
//! A complete [`Var`] satisfies two invariants: the presence conditions are
//! pairwise disjoint, and their disjunction is the feature model constraint.
//! Fragments (results of [`Var::restrict`] and intermediate unions) only
//! satisfy disjointness and cover some subset of the configuration space.

use std::fmt;

use thiserror::Error;

use crate::presence::{Configuration, FeatureModel, Pc, PresenceError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VarError {
    #[error("presence condition {0} is unsatisfiable")]
    UnsatisfiablePc(String),
    #[error("fragments overlap on {0}")]
    Overlap(String),
    #[error("presence conditions {0} and {1} are not disjoint")]
    NotDisjoint(String, String),
    #[error("value covers {covered} instead of {expected}")]
    Coverage { covered: String, expected: String },
    #[error("no atom covers configuration {0}")]
    NotCovered(String),
    #[error("branch result covers {covered}, outside its context {context}")]
    EscapesContext { covered: String, context: String },
    #[error("splitter chose alternative {index} of {count}")]
    SplitterOutOfRange { index: usize, count: usize },
    #[error(transparent)]
    Presence(#[from] PresenceError),
}

/// Presence conditions of the true and false atoms of a partitioned value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionResult {
    pub pc_true: Pc,
    pub pc_false: Pc,
}

#[derive(Clone)]
pub struct Var<T> {
    model: FeatureModel,
    pairs: Vec<(T, Pc)>,
}

impl<T> Var<T> {
    /// The singleton `{(atom, True)}`.
    pub fn mk_var_t(model: &FeatureModel, atom: T) -> Self {
        Var {
            model: model.clone(),
            pairs: vec![(atom, model.pc_true())],
        }
    }

    /// The fragment `{(atom, pc)}`.
    pub fn mk_var(pc: &Pc, atom: T) -> Result<Self, VarError> {
        if !pc.is_sat_quiet() {
            return Err(VarError::UnsatisfiablePc(pc.to_string()));
        }
        Ok(Var {
            model: pc.model().clone(),
            pairs: vec![(atom, pc.clone())],
        })
    }

    /// The fragment covering no configuration.
    pub fn empty(model: &FeatureModel) -> Self {
        Var {
            model: model.clone(),
            pairs: Vec::new(),
        }
    }

    /// Builds a complete value, checking both invariants.
    pub fn from_pairs(model: &FeatureModel, pairs: Vec<(T, Pc)>) -> Result<Self, VarError> {
        let v = Self::fragment(model, pairs);
        v.check_invariants()?;
        Ok(v)
    }

    /// Builds a value without checking invariants.
    pub fn fragment(model: &FeatureModel, pairs: Vec<(T, Pc)>) -> Self {
        Var {
            model: model.clone(),
            pairs,
        }
    }

    pub fn model(&self) -> &FeatureModel {
        &self.model
    }

    /// Pairs in production order.
    pub fn pairs(&self) -> &[(T, Pc)] {
        &self.pairs
    }

    pub fn into_pairs(self) -> Vec<(T, Pc)> {
        self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &T> {
        self.pairs.iter().map(|(a, _)| a)
    }

    /// Disjunction of all presence conditions.
    pub fn cover(&self) -> Pc {
        self.pairs
            .iter()
            .fold(self.model.pc_false(), |acc, (_, p)| acc.or(p))
    }

    /// The atom selected by `cfg`.
    pub fn index(&self, cfg: Configuration) -> Result<&T, VarError> {
        self.pairs
            .iter()
            .find(|(_, p)| p.satisfied_by(cfg))
            .map(|(a, _)| a)
            .ok_or_else(|| VarError::NotCovered(self.model.render_config(cfg)))
    }

    /// Checks non-empty pcs, pairwise disjointness, and full coverage.
    pub fn check_invariants(&self) -> Result<(), VarError> {
        self.check_disjoint()?;
        let cover = self.cover();
        if !cover.is_taut() {
            return Err(VarError::Coverage {
                covered: cover.to_string(),
                expected: self.model.constraint().to_string(),
            });
        }
        Ok(())
    }

    /// Checks non-empty pcs and pairwise disjointness only.
    pub fn check_disjoint(&self) -> Result<(), VarError> {
        for (i, (_, p)) in self.pairs.iter().enumerate() {
            if !p.is_sat_quiet() {
                return Err(VarError::UnsatisfiablePc(p.to_string()));
            }
            for (_, q) in &self.pairs[i + 1..] {
                if p.and(q).is_sat_quiet() {
                    return Err(VarError::NotDisjoint(p.to_string(), q.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Keeps each atom only where `pc` holds; drops atoms left with no
    /// configuration.
    pub fn restrict(&self, pc: &Pc) -> Self
    where
        T: Clone,
    {
        let pairs = self
            .pairs
            .iter()
            .filter_map(|(a, p)| restrict_pc(p, pc).map(|q| (a.clone(), q)))
            .collect();
        Var {
            model: self.model.clone(),
            pairs,
        }
    }

    /// Concatenates two fragments with disjoint coverage.
    pub fn union(mut self, other: Var<T>) -> Result<Self, VarError> {
        if self.model != other.model {
            return Err(PresenceError::MixedModels.into());
        }
        if self.is_empty() {
            return Ok(other);
        }
        if other.is_empty() {
            return Ok(self);
        }
        let overlap = self.cover().and(&other.cover());
        if overlap.is_sat_quiet() {
            return Err(VarError::Overlap(overlap.to_string()));
        }
        self.pairs.extend(other.pairs);
        Ok(self)
    }

    /// Splits the configuration space by a predicate on atoms.
    pub fn partition(&self, mut pred: impl FnMut(&T) -> bool) -> PartitionResult {
        let mut pc_true = self.model.pc_false();
        let mut pc_false = self.model.pc_false();
        for (a, p) in &self.pairs {
            if pred(a) {
                pc_true = pc_true.or(p);
            } else {
                pc_false = pc_false.or(p);
            }
        }
        PartitionResult { pc_true, pc_false }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Var<U> {
        Var {
            model: self.model.clone(),
            pairs: self.pairs.iter().map(|(a, p)| (f(a), p.clone())).collect(),
        }
    }

    /// Sequencing: `⋃ restrict(f(atom), pc)` over the pairs of `self`.
    pub fn bind<U: Clone, E>(
        &self,
        mut f: impl FnMut(&T, &Pc) -> Result<Var<U>, E>,
    ) -> Result<Var<U>, E> {
        let mut pairs = Vec::new();
        for (a, p) in &self.pairs {
            let inner = f(a, p)?;
            for (b, q) in inner.pairs {
                if let Some(r) = restrict_pc(&q, p) {
                    pairs.push((b, r));
                }
            }
        }
        Ok(Var {
            model: self.model.clone(),
            pairs,
        })
    }

    /// Merges pairs whose atoms are related by `eq`, disjoining their pcs.
    /// The first atom of each group is kept, in first-occurrence order.
    pub fn compact_by(&self, mut eq: impl FnMut(&T, &T) -> bool) -> Self
    where
        T: Clone,
    {
        let mut out: Vec<(T, Pc)> = Vec::with_capacity(self.pairs.len());
        for (a, p) in &self.pairs {
            match out.iter_mut().find(|(b, _)| eq(b, a)) {
                Some((_, q)) => *q = q.or(p),
                None => out.push((a.clone(), p.clone())),
            }
        }
        Var {
            model: self.model.clone(),
            pairs: out,
        }
    }

    pub fn compact(&self) -> Self
    where
        T: Clone + PartialEq,
    {
        self.compact_by(|a, b| a == b)
    }

    /// Pairs sorted by a history-independent key derived from each pc, so
    /// equal values render identically regardless of how they were built.
    pub fn canonical_pairs(&self) -> Vec<&(T, Pc)> {
        let mut keyed: Vec<(Vec<bool>, &(T, Pc))> =
            self.pairs.iter().map(|pair| (pair.1.order_key(), pair)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.into_iter().map(|(_, pair)| pair).collect()
    }

    /// Renders with a custom atom formatter, in canonical order.
    pub fn render_with(&self, mut atom: impl FnMut(&T) -> String) -> String {
        let parts: Vec<String> = self
            .canonical_pairs()
            .into_iter()
            .map(|(a, p)| format!("({}, {})", atom(a), p))
            .collect();
        format!("{{{}}}", parts.join("; "))
    }
}

impl<T: Clone + PartialEq> Var<T> {
    /// Builds the compacted value mapping every valid configuration to
    /// `f(cfg)`.
    pub fn tabulate(model: &FeatureModel, mut f: impl FnMut(Configuration) -> T) -> Self {
        let pairs = model
            .valid_configs()
            .into_iter()
            .map(|c| (f(c), model.config_to_pc(c)))
            .collect();
        Var::fragment(model, pairs).compact()
    }
}

fn restrict_pc(p: &Pc, ctx: &Pc) -> Option<Pc> {
    meet(p, ctx)
}

/// `a ∧ b` if satisfiable, for `a` and `b` each known to be satisfiable.
///
/// The satisfiability decision (and its counter) is skipped when the
/// conjunction is canonically equal to one of the operands.
pub fn meet(a: &Pc, b: &Pc) -> Option<Pc> {
    let q = a.and(b);
    if q.is_false() {
        None
    } else if &q == a || &q == b {
        Some(q)
    } else if !q.is_sat() {
        None
    } else {
        Some(q)
    }
}

fn conj_sat(known: &Pc, other: &Pc, q: &Pc) -> bool {
    !q.is_false() && (q == known || q == other || q.is_sat())
}

/// Lifted application of an `n`-ary function: the cross product of function
/// atoms and argument atoms, with satisfiability checked before every call.
///
/// Pairs are produced in the order of nested unary applications.
pub fn apply_n_with<F, X, U, E>(
    vf: &Var<F>,
    args: &[&Var<X>],
    mut call: impl FnMut(&F, &[&X]) -> Result<U, E>,
) -> Result<Var<U>, E>
where
    E: From<VarError>,
{
    for a in args {
        if a.model != vf.model {
            return Err(VarError::from(PresenceError::MixedModels).into());
        }
    }
    let mut out = Vec::new();
    let mut chosen: Vec<&X> = Vec::with_capacity(args.len());
    for (f, fpc) in &vf.pairs {
        cross(f, fpc, args, &mut chosen, &mut call, &mut out)?;
    }
    Ok(Var {
        model: vf.model.clone(),
        pairs: out,
    })
}

fn cross<'a, F, X, U, E>(
    f: &F,
    pc: &Pc,
    rest: &[&'a Var<X>],
    chosen: &mut Vec<&'a X>,
    call: &mut impl FnMut(&F, &[&X]) -> Result<U, E>,
    out: &mut Vec<(U, Pc)>,
) -> Result<(), E> {
    match rest.split_first() {
        None => {
            let u = call(f, chosen)?;
            out.push((u, pc.clone()));
        }
        Some((arg, rest)) => {
            for (x, xpc) in &arg.pairs {
                let q = pc.and(xpc);
                if conj_sat(pc, xpc, &q) {
                    chosen.push(x);
                    cross(f, &q, rest, chosen, call, out)?;
                    chosen.pop();
                }
            }
        }
    }
    Ok(())
}

pub fn apply_with<F, X, U, E>(
    vf: &Var<F>,
    vx: &Var<X>,
    mut call: impl FnMut(&F, &X) -> Result<U, E>,
) -> Result<Var<U>, E>
where
    E: From<VarError>,
{
    apply_n_with(vf, &[vx], |f, xs| call(f, xs[0]))
}

/// `{(f(x), fpc ∧ xpc) | sat(fpc ∧ xpc)}`.
pub fn apply<F, X, U>(vf: &Var<F>, vx: &Var<X>) -> Var<U>
where
    F: Fn(&X) -> U,
{
    let r: Result<_, VarError> = apply_with(vf, vx, |f, x| Ok(f(x)));
    r.expect("infallible")
}

pub fn apply2<F, X, Y, U>(vf: &Var<F>, vx: &Var<X>, vy: &Var<Y>) -> Var<U>
where
    F: Fn(&X, &Y) -> U,
{
    let mut out = Vec::new();
    for (f, fpc) in &vf.pairs {
        for (x, xpc) in &vx.pairs {
            let p = fpc.and(xpc);
            if !conj_sat(fpc, xpc, &p) {
                continue;
            }
            for (y, ypc) in &vy.pairs {
                let q = p.and(ypc);
                if conj_sat(&p, ypc, &q) {
                    out.push((f(x, y), q));
                }
            }
        }
    }
    Var {
        model: vf.model.clone(),
        pairs: out,
    }
}

pub fn apply3<F, X, Y, Z, U>(vf: &Var<F>, vx: &Var<X>, vy: &Var<Y>, vz: &Var<Z>) -> Var<U>
where
    F: Fn(&X, &Y, &Z) -> U,
{
    let mut out = Vec::new();
    for (f, fpc) in &vf.pairs {
        for (x, xpc) in &vx.pairs {
            let p = fpc.and(xpc);
            if !conj_sat(fpc, xpc, &p) {
                continue;
            }
            for (y, ypc) in &vy.pairs {
                let q = p.and(ypc);
                if !conj_sat(&p, ypc, &q) {
                    continue;
                }
                for (z, zpc) in &vz.pairs {
                    let r = q.and(zpc);
                    if conj_sat(&q, zpc, &r) {
                        out.push((f(x, y, z), r));
                    }
                }
            }
        }
    }
    Var {
        model: vf.model.clone(),
        pairs: out,
    }
}

/// Checks that a branch result stays within the context it was given.
pub fn check_within<T>(frag: &Var<T>, ctx: &Pc) -> Result<(), VarError> {
    let cover = frag.cover();
    if cover.implies(ctx) {
        Ok(())
    } else {
        Err(VarError::EscapesContext {
            covered: cover.to_string(),
            context: ctx.to_string(),
        })
    }
}

/// Variational conditional over any atom type with a truth predicate.
///
/// Each continuation receives its context before anything in the branch is
/// evaluated, and is skipped when that context is unsatisfiable.
pub fn lifted_if_by<B, T, E>(
    cond: &Var<B>,
    pred: impl FnMut(&B) -> bool,
    then_k: impl FnOnce(&Pc) -> Result<Var<T>, E>,
    else_k: impl FnOnce(&Pc) -> Result<Var<T>, E>,
) -> Result<Var<T>, E>
where
    E: From<VarError>,
{
    let PartitionResult { pc_true, pc_false } = cond.partition(pred);
    let mut out = Var::empty(cond.model());
    if pc_true.is_sat() {
        let frag = then_k(&pc_true)?;
        check_within(&frag, &pc_true)?;
        out = out.union(frag)?;
    }
    if pc_false.is_sat() {
        let frag = else_k(&pc_false)?;
        check_within(&frag, &pc_false)?;
        out = out.union(frag)?;
    }
    Ok(out)
}

pub fn lifted_if<T, E>(
    cond: &Var<bool>,
    then_k: impl FnOnce(&Pc) -> Result<Var<T>, E>,
    else_k: impl FnOnce(&Pc) -> Result<Var<T>, E>,
) -> Result<Var<T>, E>
where
    E: From<VarError>,
{
    lifted_if_by(cond, |b| *b, then_k, else_k)
}

/// Variational pattern matching in three stages.
///
/// 1. Splitting: `splitter` picks the first matching alternative for every
///    atom; each alternative's context is the disjunction of its atoms' pcs.
/// 2. Binding: `binder` extracts the pattern variables of a matched atom;
///    variable `j` of an alternative becomes a fragment pairing each
///    matched atom's `j`-th binding with that atom's pc.
/// 3. Evaluation: `alternative` runs once per alternative with a
///    satisfiable context; the fragments are united.
pub fn lifted_case<T, B, U, E>(
    scrutinee: &Var<T>,
    alternatives: usize,
    mut splitter: impl FnMut(&T) -> Result<usize, E>,
    mut binder: impl FnMut(&T, usize) -> Result<Vec<B>, E>,
    mut alternative: impl FnMut(usize, &Pc, Vec<Var<B>>) -> Result<Var<U>, E>,
) -> Result<Var<U>, E>
where
    E: From<VarError>,
{
    let model = scrutinee.model();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); alternatives];
    for (i, (atom, _)) in scrutinee.pairs.iter().enumerate() {
        let k = splitter(atom)?;
        if k >= alternatives {
            return Err(VarError::SplitterOutOfRange {
                index: k,
                count: alternatives,
            }
            .into());
        }
        groups[k].push(i);
    }
    let mut out = Var::empty(model);
    for (k, members) in groups.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let mut ctx = model.pc_false();
        let mut bindings: Vec<Vec<(B, Pc)>> = Vec::new();
        for i in members {
            let (atom, pc) = &scrutinee.pairs[i];
            ctx = ctx.or(pc);
            let values = binder(atom, k)?;
            if bindings.is_empty() {
                bindings.resize_with(values.len(), Vec::new);
            }
            for (slot, v) in bindings.iter_mut().zip(values) {
                slot.push((v, pc.clone()));
            }
        }
        if !ctx.is_sat() {
            continue;
        }
        let frags = bindings
            .into_iter()
            .map(|pairs| Var::fragment(model, pairs))
            .collect();
        let frag = alternative(k, &ctx, frags)?;
        check_within(&frag, &ctx)?;
        out = out.union(frag)?;
    }
    Ok(out)
}

impl<T: PartialEq> PartialEq for Var<T> {
    /// Set equality of pairs, comparing pcs relative to the feature model.
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model
            && self.pairs.len() == other.pairs.len()
            && self
                .pairs
                .iter()
                .all(|(a, p)| other.pairs.iter().any(|(b, q)| a == b && p.equiv(q)))
    }
}

impl<T: fmt::Display> fmt::Display for Var<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render_with(|a| a.to_string()))
    }
}

impl<T: fmt::Debug> fmt::Debug for Var<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render_with(|a| format!("{a:?}")))
    }
}
