//! Presence conditions over a feature model.
//!
//! Every [`FeatureModel`] owns a hash-consed BDD arena. A [`Pc`] is an index
//! into that arena, so equality of presence conditions is an integer
//! comparison. Variable order is the declaration order of the features.
//!
//! Stored presence conditions are raw boolean functions; the feature model
//! constraint is only conjoined in at decision points ([`Pc::is_sat`],
//! [`Pc::is_taut`], [`Pc::sat_count`]).

mod bdd;
mod expr;

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

use thiserror::Error;

use bdd::{Bdd, NodeId, FALSE, TRUE};
pub use expr::PcExpr;

/// Default upper bound on the number of features.
pub const DEFAULT_FEATURE_CAP: usize = 24;
/// Hard upper bound: configurations are bitmasks over a `u64`.
pub const MAX_FEATURE_CAP: usize = 63;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresenceError {
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("duplicate feature `{0}`")]
    DuplicateFeature(String),
    #[error("empty feature name")]
    EmptyFeatureName,
    #[error("feature model constraint is unsatisfiable")]
    UnsatisfiableModel,
    #[error("{count} features exceed the cap of {cap}")]
    TooManyFeatures { count: usize, cap: usize },
    #[error("presence condition parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("presence conditions belong to different feature models")]
    MixedModels,
    #[error("configuration {0} does not satisfy the feature model")]
    InvalidConfiguration(String),
    #[error("malformed feature model file: {0}")]
    ModelFile(String),
}

struct ModelInner {
    features: Vec<String>,
    index: HashMap<String, u32>,
    constraint: NodeId,
    cap: usize,
    bdd: Mutex<Bdd>,
    sat_checks: AtomicU64,
}

/// A feature set together with its constraint (the feature model).
///
/// Cloning is cheap; clones share the presence-condition arena.
#[derive(Clone)]
pub struct FeatureModel(Arc<ModelInner>);

impl fmt::Debug for FeatureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeatureModel")
            .field("features", &self.0.features)
            .field("constraint", &self.constraint().to_string())
            .finish()
    }
}

impl PartialEq for FeatureModel {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for FeatureModel {}

impl FeatureModel {
    /// A model over `features` with no constraint (Φ = true).
    pub fn new<I, S>(features: I) -> Result<Self, PresenceError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::with_constraint(features, &PcExpr::True)
    }

    pub fn with_constraint<I, S>(features: I, constraint: &PcExpr) -> Result<Self, PresenceError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::with_cap(features, constraint, DEFAULT_FEATURE_CAP)
    }

    pub fn with_cap<I, S>(
        features: I,
        constraint: &PcExpr,
        cap: usize,
    ) -> Result<Self, PresenceError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let cap = cap.min(MAX_FEATURE_CAP);
        let features: Vec<String> = features.into_iter().map(Into::into).collect();
        if features.len() > cap {
            return Err(PresenceError::TooManyFeatures {
                count: features.len(),
                cap,
            });
        }
        let mut index = HashMap::new();
        for (i, f) in features.iter().enumerate() {
            if f.is_empty() {
                return Err(PresenceError::EmptyFeatureName);
            }
            if index.insert(f.clone(), i as u32).is_some() {
                return Err(PresenceError::DuplicateFeature(f.clone()));
            }
        }
        let mut bdd = Bdd::new();
        let constraint = build(&mut bdd, &index, constraint)?;
        if constraint == FALSE {
            return Err(PresenceError::UnsatisfiableModel);
        }
        Ok(FeatureModel(Arc::new(ModelInner {
            features,
            index,
            constraint,
            cap,
            bdd: Mutex::new(bdd),
            sat_checks: AtomicU64::new(0),
        })))
    }

    /// Parses the feature model file format:
    ///
    /// ```text
    /// features: A, B, C
    /// constraint: A || B
    /// ```
    ///
    /// The constraint line is optional. Lines starting with `#` or `;;` are
    /// comments.
    pub fn parse(text: &str) -> Result<Self, PresenceError> {
        let mut features: Option<Vec<String>> = None;
        let mut constraint = PcExpr::True;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(";;") {
                continue;
            }
            if let Some(rest) = line.strip_prefix("features:") {
                features = Some(
                    rest.split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect(),
                );
            } else if let Some(rest) = line.strip_prefix("constraint:") {
                constraint = PcExpr::parse(rest)?;
            } else {
                return Err(PresenceError::ModelFile(format!("unrecognized line `{line}`")));
            }
        }
        let features =
            features.ok_or_else(|| PresenceError::ModelFile("missing `features:` line".into()))?;
        Self::with_constraint(features, &constraint)
    }

    pub fn features(&self) -> &[String] {
        &self.0.features
    }

    pub fn feature_count(&self) -> usize {
        self.0.features.len()
    }

    pub fn cap(&self) -> usize {
        self.0.cap
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.0.index.get(name).map(|&i| i as usize)
    }

    fn lock(&self) -> MutexGuard<'_, Bdd> {
        self.0.bdd.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn pc(&self, node: NodeId) -> Pc {
        Pc {
            model: self.clone(),
            node,
        }
    }

    pub fn pc_true(&self) -> Pc {
        self.pc(TRUE)
    }

    pub fn pc_false(&self) -> Pc {
        self.pc(FALSE)
    }

    pub fn pc_var(&self, feature: &str) -> Result<Pc, PresenceError> {
        let i = self
            .feature_index(feature)
            .ok_or_else(|| PresenceError::UnknownFeature(feature.to_string()))?;
        let node = self.lock().var(i as u32);
        Ok(self.pc(node))
    }

    /// The constraint Φ as a presence condition.
    pub fn constraint(&self) -> Pc {
        self.pc(self.0.constraint)
    }

    pub fn pc_from_expr(&self, e: &PcExpr) -> Result<Pc, PresenceError> {
        let node = build(&mut self.lock(), &self.0.index, e)?;
        Ok(self.pc(node))
    }

    pub fn parse_pc(&self, text: &str) -> Result<Pc, PresenceError> {
        self.pc_from_expr(&PcExpr::parse(text)?)
    }

    /// Conjunction of `f` for selected and `!f` for unselected features.
    pub fn config_to_pc(&self, cfg: Configuration) -> Pc {
        let mut bdd = self.lock();
        let mut node = TRUE;
        for i in (0..self.feature_count() as u32).rev() {
            let v = bdd.var(i);
            let lit = if cfg.contains(i as usize) { v } else { bdd.not(v) };
            node = bdd.and(lit, node);
        }
        drop(bdd);
        self.pc(node)
    }

    /// Builds a configuration from feature names, checking it against Φ.
    pub fn config<S: AsRef<str>>(&self, selected: &[S]) -> Result<Configuration, PresenceError> {
        let mut mask = 0u64;
        for s in selected {
            let i = self
                .feature_index(s.as_ref())
                .ok_or_else(|| PresenceError::UnknownFeature(s.as_ref().to_string()))?;
            mask |= 1 << i;
        }
        let cfg = Configuration(mask);
        if !self.is_valid(cfg) {
            return Err(PresenceError::InvalidConfiguration(self.render_config(cfg)));
        }
        Ok(cfg)
    }

    pub fn is_valid(&self, cfg: Configuration) -> bool {
        cfg.0 >> self.feature_count() == 0 && self.lock().eval(self.0.constraint, cfg.0)
    }

    /// All configurations satisfying Φ, ordered by selected-feature bitmask
    /// (feature `i` is bit `i`).
    pub fn valid_configs(&self) -> Vec<Configuration> {
        let n = self.feature_count();
        let bdd = self.lock();
        (0..(1u64 << n))
            .filter(|&m| bdd.eval(self.0.constraint, m))
            .map(Configuration)
            .collect()
    }

    pub fn render_config(&self, cfg: Configuration) -> String {
        let names: Vec<&str> = self
            .features()
            .iter()
            .enumerate()
            .filter(|(i, _)| cfg.contains(*i))
            .map(|(_, f)| f.as_str())
            .collect();
        format!("{{{}}}", names.join(", "))
    }

    /// Number of satisfiability decisions made against this model so far.
    pub fn sat_checks(&self) -> u64 {
        self.0.sat_checks.load(Ordering::Relaxed)
    }

    /// Number of BDD nodes allocated in the arena.
    pub fn arena_size(&self) -> usize {
        self.lock().len()
    }
}

fn build(bdd: &mut Bdd, index: &HashMap<String, u32>, e: &PcExpr) -> Result<NodeId, PresenceError> {
    Ok(match e {
        PcExpr::True => TRUE,
        PcExpr::False => FALSE,
        PcExpr::Feature(f) => {
            let i = *index
                .get(f)
                .ok_or_else(|| PresenceError::UnknownFeature(f.clone()))?;
            bdd.var(i)
        }
        PcExpr::Not(a) => {
            let a = build(bdd, index, a)?;
            bdd.not(a)
        }
        PcExpr::And(a, b) => {
            let a = build(bdd, index, a)?;
            let b = build(bdd, index, b)?;
            bdd.and(a, b)
        }
        PcExpr::Or(a, b) => {
            let a = build(bdd, index, a)?;
            let b = build(bdd, index, b)?;
            bdd.or(a, b)
        }
    })
}

/// A set of selected features, as a bitmask in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Configuration(pub u64);

impl Configuration {
    pub fn contains(self, feature: usize) -> bool {
        self.0 & (1u64 << feature) != 0
    }

    pub fn mask(self) -> u64 {
        self.0
    }
}

/// A canonical boolean function over the features of one model.
#[derive(Clone)]
pub struct Pc {
    model: FeatureModel,
    node: NodeId,
}

impl PartialEq for Pc {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node && self.model == other.model
    }
}

impl Eq for Pc {}

impl Hash for Pc {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.node.hash(state);
        (Arc::as_ptr(&self.model.0) as usize).hash(state);
    }
}

impl fmt::Debug for Pc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pc({self})")
    }
}

impl Pc {
    pub fn model(&self) -> &FeatureModel {
        &self.model
    }

    /// Arena index of the canonical node.
    pub fn id(&self) -> u32 {
        self.node
    }

    fn same_model(&self, other: &Pc) -> Result<(), PresenceError> {
        if self.model == other.model {
            Ok(())
        } else {
            Err(PresenceError::MixedModels)
        }
    }

    pub fn try_and(&self, other: &Pc) -> Result<Pc, PresenceError> {
        self.same_model(other)?;
        let node = self.model.lock().and(self.node, other.node);
        Ok(self.model.pc(node))
    }

    pub fn try_or(&self, other: &Pc) -> Result<Pc, PresenceError> {
        self.same_model(other)?;
        let node = self.model.lock().or(self.node, other.node);
        Ok(self.model.pc(node))
    }

    /// # Panics
    /// If the operands belong to different feature models.
    pub fn and(&self, other: &Pc) -> Pc {
        self.try_and(other).expect("mixed feature models")
    }

    /// # Panics
    /// If the operands belong to different feature models.
    pub fn or(&self, other: &Pc) -> Pc {
        self.try_or(other).expect("mixed feature models")
    }

    pub fn not(&self) -> Pc {
        let node = self.model.lock().not(self.node);
        self.model.pc(node)
    }

    /// Syntactically the constant false function (ignores Φ).
    pub fn is_false(&self) -> bool {
        self.node == FALSE
    }

    /// Syntactically the constant true function (ignores Φ).
    pub fn is_true(&self) -> bool {
        self.node == TRUE
    }

    /// Some configuration of the model satisfies both `self` and Φ.
    pub fn is_sat(&self) -> bool {
        self.model.0.sat_checks.fetch_add(1, Ordering::Relaxed);
        if self.node == FALSE {
            return false;
        }
        let phi = self.model.0.constraint;
        self.model.lock().and(self.node, phi) != FALSE
    }

    /// Like [`Pc::is_sat`] without touching the sat-check counter; used by
    /// invariant checks so instrumentation only reflects runtime work.
    pub fn is_sat_quiet(&self) -> bool {
        if self.node == FALSE {
            return false;
        }
        let phi = self.model.0.constraint;
        self.model.lock().and(self.node, phi) != FALSE
    }

    /// `self ∧ Φ ≡ Φ`.
    pub fn is_taut(&self) -> bool {
        if self.node == TRUE {
            return true;
        }
        let phi = self.model.0.constraint;
        self.model.lock().and(self.node, phi) == phi
    }

    /// Equivalent relative to Φ.
    pub fn equiv(&self, other: &Pc) -> bool {
        if self == other {
            return true;
        }
        let phi = self.model.0.constraint;
        let mut bdd = self.model.lock();
        bdd.and(self.node, phi) == bdd.and(other.node, phi)
    }

    /// `self ∧ Φ` implies `other`.
    pub fn implies(&self, other: &Pc) -> bool {
        let phi = self.model.0.constraint;
        let mut bdd = self.model.lock();
        let lhs = bdd.and(self.node, phi);
        bdd.and(lhs, other.node) == lhs
    }

    pub fn satisfied_by(&self, cfg: Configuration) -> bool {
        self.model.lock().eval(self.node, cfg.0)
    }

    /// Number of valid configurations satisfying `self`.
    pub fn sat_count(&self) -> u128 {
        let phi = self.model.0.constraint;
        let mut bdd = self.model.lock();
        let n = bdd.and(self.node, phi);
        bdd.sat_count(n, self.model.feature_count() as u32)
    }

    /// A valid configuration satisfying `self`, choosing unselected
    /// features wherever possible in declaration order.
    pub fn pick_config(&self) -> Option<Configuration> {
        let phi = self.model.0.constraint;
        let mut bdd = self.model.lock();
        let n = bdd.and(self.node, phi);
        bdd.pick(n).map(Configuration)
    }

    /// Deterministic, history-independent ordering key: the picked
    /// configuration of `self ∧ Φ`, as booleans in declaration order.
    /// Distinct for disjoint satisfiable conditions.
    pub fn order_key(&self) -> Vec<bool> {
        let n = self.model.feature_count();
        match self.pick_config() {
            Some(c) => (0..n).map(|i| c.contains(i)).collect(),
            None => vec![true; n + 1],
        }
    }

    /// Features the function depends on.
    pub fn support(&self) -> Vec<String> {
        let vars = self.model.lock().support(self.node);
        vars.into_iter()
            .map(|v| self.model.features()[v as usize].clone())
            .collect()
    }

    /// Disjunctive normal form read off the BDD paths.
    pub fn to_expr(&self) -> PcExpr {
        match self.node {
            TRUE => return PcExpr::True,
            FALSE => return PcExpr::False,
            _ => {}
        }
        let cubes = self.model.lock().cubes(self.node);
        let feats = self.model.features();
        cubes
            .into_iter()
            .map(|cube| {
                cube.into_iter()
                    .map(|(v, pol)| {
                        let f = PcExpr::Feature(feats[v as usize].clone());
                        if pol {
                            f
                        } else {
                            f.not()
                        }
                    })
                    .reduce(PcExpr::and)
                    .unwrap_or(PcExpr::True)
            })
            .reduce(PcExpr::or)
            .unwrap_or(PcExpr::False)
    }
}

impl fmt::Display for Pc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl std::ops::BitAnd for &Pc {
    type Output = Pc;
    fn bitand(self, rhs: &Pc) -> Pc {
        self.and(rhs)
    }
}

impl std::ops::BitOr for &Pc {
    type Output = Pc;
    fn bitor(self, rhs: &Pc) -> Pc {
        self.or(rhs)
    }
}

impl std::ops::Not for &Pc {
    type Output = Pc;
    fn not(self) -> Pc {
        Pc::not(self)
    }
}
