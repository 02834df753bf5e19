//! Annotative product lines: `#ifdef`-annotated source preprocessed into a
//! variational token stream.

pub mod lexer;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::pcf::Value;
use crate::presence::{Configuration, FeatureModel, PcExpr, Pc, PresenceError};
use crate::vvalue::Var;

pub use lexer::{codes, Interner, LexKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SplError {
    #[error("line {line}: {message}")]
    Lex { line: usize, message: String },
    #[error("line {line}: `#{directive}` without matching `#if`")]
    Unmatched { line: usize, directive: String },
    #[error("line {line}: second `#else` for the same `#if`")]
    DuplicateElse { line: usize },
    #[error("line {line}: `#elif` is not supported")]
    Elif { line: usize },
    #[error("line {line}: `#{directive}` needs a condition")]
    MissingCondition { line: usize, directive: String },
    #[error("line {line}: unterminated `#if` block")]
    Unterminated { line: usize },
    #[error("line {line}: {source}")]
    Condition {
        line: usize,
        #[source]
        source: PresenceError,
    },
}

#[derive(Clone, Debug)]
pub struct AnnotatedToken {
    pub lexeme: String,
    pub code: u64,
    pub pc: Pc,
    pub line: usize,
}

/// The 150% representation of a source file: every token of every variant,
/// each with its presence condition.
#[derive(Clone, Debug)]
pub struct TokenStream {
    pub tokens: Vec<AnnotatedToken>,
    pub model: FeatureModel,
    pub interner: Interner,
}

struct Frame {
    cond: Pc,
    in_else: bool,
    line: usize,
}

/// Tokenizes `source` and annotates each token with the conjunction of the
/// enclosing conditional directives. Tokens in blocks that no valid
/// configuration can reach are dropped.
pub fn preprocess(source: &str, model: &FeatureModel) -> Result<TokenStream, SplError> {
    let items = lexer::lex(source).map_err(|e| SplError::Lex {
        line: e.line,
        message: e.message,
    })?;
    let mut interner = Interner::new();
    let mut stack: Vec<Frame> = Vec::new();
    let mut current = model.pc_true();
    let mut reachable: HashMap<Pc, bool> = HashMap::new();
    let mut tokens = Vec::new();
    for item in items {
        match item {
            lexer::Item::Token(lx) => {
                let live = *reachable
                    .entry(current.clone())
                    .or_insert_with(|| current.is_sat());
                if live {
                    tokens.push(AnnotatedToken {
                        lexeme: lx.text.to_string(),
                        code: interner.code(lx.text, lx.kind),
                        pc: current.clone(),
                        line: lx.line,
                    });
                }
            }
            lexer::Item::Directive(d) => {
                let line = d.line;
                let cond = |text: &str| -> Result<Pc, SplError> {
                    if text.is_empty() {
                        return Err(SplError::MissingCondition {
                            line,
                            directive: d.name.to_string(),
                        });
                    }
                    PcExpr::parse(text)
                        .and_then(|e| model.pc_from_expr(&e))
                        .map_err(|source| SplError::Condition { line, source })
                };
                match d.name {
                    "if" | "ifdef" => stack.push(Frame {
                        cond: cond(&d.argument)?,
                        in_else: false,
                        line,
                    }),
                    "ifndef" => stack.push(Frame {
                        cond: cond(&d.argument)?.not(),
                        in_else: false,
                        line,
                    }),
                    "else" => {
                        let top = stack.last_mut().ok_or_else(|| SplError::Unmatched {
                            line,
                            directive: "else".into(),
                        })?;
                        if top.in_else {
                            return Err(SplError::DuplicateElse { line });
                        }
                        top.in_else = true;
                    }
                    "endif" => {
                        stack.pop().ok_or_else(|| SplError::Unmatched {
                            line,
                            directive: "endif".into(),
                        })?;
                    }
                    _ => return Err(SplError::Elif { line }),
                }
                current = stack.iter().fold(model.pc_true(), |acc, f| {
                    acc.and(&if f.in_else { f.cond.not() } else { f.cond.clone() })
                });
            }
        }
    }
    if let Some(open) = stack.first() {
        return Err(SplError::Unterminated { line: open.line });
    }
    Ok(TokenStream {
        tokens,
        model: model.clone(),
        interner,
    })
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Distinct presence conditions in order of first occurrence.
    pub fn distinct_pcs(&self) -> Vec<Pc> {
        let mut seen = Vec::<Pc>::new();
        for t in &self.tokens {
            if !seen.contains(&t.pc) {
                seen.push(t.pc.clone());
            }
        }
        seen
    }

    /// Token codes of the product selected by `cfg`.
    pub fn derive_product(&self, cfg: Configuration) -> Vec<u64> {
        self.tokens
            .iter()
            .filter(|t| t.pc.satisfied_by(cfg))
            .map(|t| t.code)
            .collect()
    }

    /// Lexemes of the product selected by `cfg`.
    pub fn derive_text(&self, cfg: Configuration) -> Vec<&str> {
        self.tokens
            .iter()
            .filter(|t| t.pc.satisfied_by(cfg))
            .map(|t| t.lexeme.as_str())
            .collect()
    }

    /// Partitions the valid configurations into classes that derive the same
    /// token sequence. Each class comes with a representative configuration.
    pub fn effective_combinations(&self) -> Vec<(Pc, Configuration)> {
        let mut classes = vec![self.model.constraint()];
        for pc in self.distinct_pcs() {
            let mut next = Vec::with_capacity(classes.len() * 2);
            for c in classes {
                let pos = c.and(&pc);
                if pos == c {
                    next.push(c);
                    continue;
                }
                let neg = c.and(&pc.not());
                if neg == c {
                    next.push(c);
                    continue;
                }
                if pos.is_sat() {
                    next.push(pos);
                }
                if neg.is_sat() {
                    next.push(neg);
                }
            }
            classes = next;
        }
        // Different pc patterns can still yield the same code sequence.
        let mut merged: Vec<(Vec<u64>, Pc)> = Vec::new();
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        for c in classes {
            let cfg = c.pick_config().expect("class is satisfiable");
            let product = self.derive_product(cfg);
            match index.get(&product) {
                Some(&i) => merged[i].1 = merged[i].1.or(&c),
                None => {
                    index.insert(product.clone(), merged.len());
                    merged.push((product, c));
                }
            }
        }
        merged
            .into_iter()
            .map(|(_, pc)| {
                let cfg = pc.pick_config().expect("class is satisfiable");
                (pc, cfg)
            })
            .collect()
    }

    /// The deep-lifted list: one cell per token, padded with the empty
    /// token 0 outside the token's presence condition.
    pub fn to_var_list(&self) -> Vec<Var<u64>> {
        let mut taut: HashMap<Pc, bool> = HashMap::new();
        self.tokens
            .iter()
            .map(|t| {
                let always = *taut.entry(t.pc.clone()).or_insert_with(|| t.pc.is_taut());
                if always {
                    Var::mk_var_t(&self.model, t.code)
                } else {
                    Var::fragment(
                        &self.model,
                        vec![(t.code, t.pc.clone()), (codes::EMPTY, t.pc.not())],
                    )
                    .compact()
                }
            })
            .collect()
    }

    /// [`TokenStream::to_var_list`] as a runtime list of variational naturals.
    pub fn to_value(&self) -> Value {
        Value::list(
            self.to_var_list()
                .into_iter()
                .map(|cell| Value::Var(Rc::new(cell.map(|&c| Value::nat(c))))),
        )
    }

    /// Product `cfg` as a plain runtime list.
    pub fn product_value(&self, cfg: Configuration) -> Value {
        Value::nat_list(&self.derive_product(cfg))
    }

    /// Renders tokens with their presence conditions, one per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for t in &self.tokens {
            out.push_str(&format!("{:>4}  {:<12} {:>7}  {}\n", t.line, t.lexeme, t.code, t.pc));
        }
        out
    }

    /// Token codes grouped by presence condition, in stream order.
    pub fn groups(&self) -> BTreeMap<String, Vec<&str>> {
        let mut out: BTreeMap<String, Vec<&str>> = BTreeMap::new();
        for t in &self.tokens {
            out.entry(t.pc.to_string()).or_default().push(&t.lexeme);
        }
        out
    }
}

impl fmt::Display for TokenStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let texts: Vec<&str> = self.tokens.iter().map(|t| t.lexeme.as_str()).collect();
        write!(f, "{}", texts.join(" "))
    }
}

#[cfg(test)]
mod tests;
