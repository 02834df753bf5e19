//! Shared helpers for the integration tests: plain Rust reference versions of
//! the bundled analyses, working on lexeme text, and a random generator of
//! small variational C-like files.
#![allow(dead_code)]

pub mod rules;

use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use varlift::bench::CorpusFile;
use varlift::pcf::Datum;
use varlift::presence::{FeatureModel, Pc, PcExpr};
use varlift::spl::{lexer, preprocess, TokenStream};
use varlift::vvalue::Var;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn corpus_file(name: &str) -> CorpusFile {
    CorpusFile::load(&corpus_dir().join(name)).unwrap()
}

pub fn corpus() -> Vec<CorpusFile> {
    varlift::bench::load_corpus(&corpus_dir()).unwrap()
}

const KEYWORDS: &[&str] = &[
    "switch", "case", "break", "default", "return", "goto", "int", "char", "long", "unsigned",
    "void", "struct", "if", "else", "while", "for", "do", "continue", "short", "float", "double",
    "static", "const", "sizeof", "typedef", "enum", "union", "signed", "extern", "volatile",
    "register", "inline", "auto",
];

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_') && !KEYWORDS.contains(&s)
}

fn is_decl_keyword(s: &str) -> bool {
    ["int", "char", "long", "unsigned", "void", "struct"].contains(&s)
}

fn density(a: u64, b: u64) -> Datum {
    Datum::pair(Datum::nat(a), Datum::nat(b))
}

/// Reference result of the named analysis on one product's lexemes.
pub fn reference(analysis: &str, toks: &[&str]) -> Datum {
    match analysis {
        "token_count" => Datum::nat(toks.len() as u64),
        "case_termination" => Datum::Bool(case_termination(toks)),
        "dangling_switch" => Datum::Bool(dangling_switch(toks)),
        "fn_return_checker" => Datum::Bool(fn_return_checker(toks)),
        "return_density" => {
            let (rets, _, fns) = function_counts(toks);
            density(rets, fns)
        }
        "call_density" => {
            let (_, calls, fns) = function_counts(toks);
            density(calls, fns)
        }
        "goto_density" => goto_density(toks),
        other => panic!("no reference for {other}"),
    }
}

fn case_termination(toks: &[&str]) -> bool {
    struct Switch {
        depth: u64,
        labelled: bool,
    }
    let mut pending = false;
    let mut stack: Vec<Switch> = Vec::new();
    let (mut p2, mut p1) = ("", "");
    let ends = |p2: &str, p1: &str| p1 == ":" || p1 == "{" || (p2 == "break" && p1 == ";");
    for &t in toks {
        match t {
            "switch" => pending = true,
            "case" | "default" => {
                if let Some(top) = stack.last_mut() {
                    if top.labelled && !ends(p2, p1) {
                        return false;
                    }
                    top.labelled = true;
                }
            }
            "{" => {
                if pending {
                    pending = false;
                    stack.push(Switch {
                        depth: 0,
                        labelled: false,
                    });
                } else if let Some(top) = stack.last_mut() {
                    top.depth += 1;
                }
            }
            "}" => {
                if let Some(top) = stack.last_mut() {
                    if top.depth == 0 {
                        if top.labelled && !ends(p2, p1) {
                            return false;
                        }
                        stack.pop();
                    } else {
                        top.depth -= 1;
                    }
                }
            }
            _ => {}
        }
        p2 = p1;
        p1 = t;
    }
    true
}

fn dangling_switch(toks: &[&str]) -> bool {
    #[derive(PartialEq)]
    enum M {
        Outside,
        AwaitBrace,
        StatementStart,
        InDeclaration,
    }
    let mut m = M::Outside;
    for &t in toks {
        m = match m {
            M::Outside if t == "switch" => M::AwaitBrace,
            M::Outside => M::Outside,
            M::AwaitBrace if t == "{" => M::StatementStart,
            M::AwaitBrace => M::AwaitBrace,
            M::StatementStart => match t {
                "case" | "default" | "}" => M::Outside,
                t if is_decl_keyword(t) => M::InDeclaration,
                _ => return true,
            },
            M::InDeclaration if t == ";" => M::StatementStart,
            M::InDeclaration => M::InDeclaration,
        };
    }
    false
}

fn fn_return_checker(toks: &[&str]) -> bool {
    #[derive(PartialEq)]
    enum Body {
        None,
        Value,
        Void,
    }
    let mut depth = 0u64;
    let (mut header, mut void, mut ret) = (false, false, false);
    let mut body = Body::None;
    let mut prev = "";
    for &t in toks {
        match t {
            "{" if depth == 0 => {
                if header {
                    body = if void { Body::Void } else { Body::Value };
                    ret = false;
                } else {
                    body = Body::None;
                }
                header = false;
                depth = 1;
            }
            "{" => depth += 1,
            "}" if depth == 0 => {
                header = false;
                void = false;
                body = Body::None;
            }
            "}" if depth == 1 => {
                if body == Body::Value && !ret {
                    return false;
                }
                depth = 0;
                header = false;
                void = false;
                body = Body::None;
                ret = false;
            }
            "}" => depth -= 1,
            ";" if depth == 0 => {
                header = false;
                void = false;
            }
            "(" if depth == 0 => header = header || is_ident(prev),
            "void" if depth == 0 && !header => void = true,
            "return" => ret = true,
            _ => {}
        }
        prev = t;
    }
    true
}

/// (returns in bodies, calls in bodies, function bodies).
fn function_counts(toks: &[&str]) -> (u64, u64, u64) {
    let mut depth = 0u64;
    let (mut header, mut inside) = (false, false);
    let (mut rets, mut calls, mut fns) = (0, 0, 0);
    let mut prev = "";
    for &t in toks {
        match t {
            "{" if depth == 0 => {
                inside = header;
                if header {
                    fns += 1;
                }
                header = false;
                depth = 1;
            }
            "{" => depth += 1,
            "}" if depth <= 1 => {
                depth = 0;
                header = false;
                inside = false;
            }
            "}" => depth -= 1,
            ";" if depth == 0 => header = false,
            "(" if depth == 0 => header = header || is_ident(prev),
            "(" if inside && is_ident(prev) => calls += 1,
            "return" if inside => rets += 1,
            _ => {}
        }
        prev = t;
    }
    (rets, calls, fns)
}

fn goto_density(toks: &[&str]) -> Datum {
    let (mut gotos, mut labels) = (0, 0);
    let (mut p2, mut p1) = ("", "");
    for &t in toks {
        if t == "goto" {
            gotos += 1;
        }
        if t == ":" && is_ident(p1) && ["", ";", "{", "}", ":"].contains(&p2) {
            labels += 1;
        }
        p2 = p1;
        p1 = t;
    }
    density(gotos, labels)
}

const LINES: &[&str] = &[
    "int f(int a) {",
    "void g(void) {",
    "long h(char *p, int n) {",
    "static int k(void) {",
    "struct s { int x; };",
    "int counter;",
    "}",
    "}",
    "} }",
    "{",
    "switch (x) {",
    "case 1:",
    "case K:",
    "default:",
    "break;",
    "return;",
    "return a + 1;",
    "goto out;",
    "out:",
    "retry: x = x - 1;",
    "f(a, b);",
    "log(x);",
    "x = y ? a : b;",
    "if (x) {",
    "if (n > 0) return n;",
    "while (n) { n = step(n); }",
    "int y = 3;",
    "char c;",
    "x++;",
    "a = mix(a, 7) * 2;",
];

/// A random variational file with at most `max_features` features and at
/// most `max_tokens` tokens in its 150% representation. Conditional blocks
/// nest up to two levels and may have `#else` branches.
pub fn random_vsrc(seed: u64, max_features: usize, max_tokens: usize) -> CorpusFile {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_features);
    let features: Vec<String> = (1..=n).map(|i| format!("F{i}")).collect();
    let constraint = if n >= 2 && rng.gen_bool(0.3) {
        format!("!({} && {})", features[0], features[1])
    } else {
        "true".to_string()
    };
    let model = FeatureModel::with_constraint(features.clone(), &PcExpr::parse(&constraint).unwrap()).unwrap();

    let mut out = String::new();
    let mut tokens = 0;
    let mut open: Vec<bool> = Vec::new(); // per open block: has #else
    let mut lines = 0;
    while lines < 60 {
        lines += 1;
        let roll = rng.gen_range(0..10);
        if roll < 3 && open.len() < 2 {
            let cond = random_condition(&mut rng, &features);
            if rng.gen_bool(0.5) {
                out.push_str(&format!("#if {cond}\n"));
            } else if rng.gen_bool(0.5) {
                out.push_str(&format!("#ifdef {}\n", features.choose(&mut rng).unwrap()));
            } else {
                out.push_str(&format!("#ifndef {}\n", features.choose(&mut rng).unwrap()));
            }
            open.push(false);
            continue;
        }
        if roll < 6 {
            if let Some(has_else) = open.last_mut() {
                if !*has_else && rng.gen_bool(0.5) {
                    *has_else = true;
                    out.push_str("#else\n");
                } else {
                    open.pop();
                    out.push_str("#endif\n");
                }
                continue;
            }
        }
        let line = LINES.choose(&mut rng).unwrap();
        let cost = lexer::lex(line).unwrap().len();
        if tokens + cost > max_tokens {
            break;
        }
        tokens += cost;
        out.push_str(line);
        out.push('\n');
    }
    while open.pop().is_some() {
        out.push_str("#endif\n");
    }
    CorpusFile::new(format!("random_{seed}.vsrc"), out, model)
}

fn random_condition(rng: &mut StdRng, features: &[String]) -> String {
    let atom = |rng: &mut StdRng| {
        let f = features.choose(rng).unwrap();
        if rng.gen_bool(0.3) {
            format!("!{f}")
        } else {
            f.clone()
        }
    };
    match rng.gen_range(0..3) {
        0 => atom(rng),
        1 => format!("{} && {}", atom(rng), atom(rng)),
        _ => format!("({} || {})", atom(rng), atom(rng)),
    }
}

pub fn stream(file: &CorpusFile) -> TokenStream {
    preprocess(&file.source, &file.model).unwrap()
}

/// A random complete value: every valid configuration is mapped to one of
/// `atoms`, then configurations sharing an atom are merged.
pub fn random_var<T: Clone + PartialEq>(rng: &mut StdRng, model: &FeatureModel, atoms: &[T]) -> Var<T> {
    let mut pairs: Vec<(T, Pc)> = Vec::new();
    for cfg in model.valid_configs() {
        let atom = atoms.choose(rng).unwrap().clone();
        let pc = model.config_to_pc(cfg);
        match pairs.iter_mut().find(|(a, _)| *a == atom) {
            Some((_, p)) => *p = p.or(&pc),
            None => pairs.push((atom, pc)),
        }
    }
    Var::from_pairs(model, pairs).unwrap()
}

/// A random model over at most `max` features, sometimes constrained.
pub fn random_model(rng: &mut StdRng, max: usize) -> FeatureModel {
    let n = rng.gen_range(1..=max);
    let features: Vec<String> = (0..n).map(|i| format!("F{i}")).collect();
    if n >= 2 && rng.gen_bool(0.3) {
        let c = PcExpr::parse(&format!("!(F0 && F{})", n - 1)).unwrap();
        FeatureModel::with_constraint(features, &c).unwrap()
    } else {
        FeatureModel::new(features).unwrap()
    }
}

/// Exactly one pair of `v` holds in every valid configuration.
pub fn partitions_configurations<T>(v: &Var<T>) -> bool {
    v.model()
        .valid_configs()
        .into_iter()
        .all(|cfg| v.pairs().iter().filter(|(_, p)| p.satisfied_by(cfg)).count() == 1)
}

pub type UnaryFn = fn(&u64) -> u64;

pub const UNARY: [UnaryFn; 5] = [
    |x| x + 1,
    |x| x * 2,
    |x| x * x % 97,
    |_| 7,
    |x| x.saturating_sub(3),
];
