//! Syntactic analyses over token-code lists, written in PCF+ and runnable
//! per product, shallow-lifted or deep-lifted.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::lifting::{
    brute_force_lift, deep_rewrite, run_lifted, shallow_program, LiftError, LiftPlan,
    RewriteOutput,
};
use crate::pcf::{parse_program, typecheck_program, Datum, ParseError, Program, Type, TypeError};
use crate::spl::TokenStream;
use crate::vvalue::Var;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResultKind {
    Nat,
    Bool,
    /// A (numerator, denominator) pair.
    Density,
}

impl ResultKind {
    pub fn ty(self) -> Type {
        match self {
            ResultKind::Nat => Type::Nat,
            ResultKind::Bool => Type::Bool,
            ResultKind::Density => Type::pair(Type::Nat, Type::Nat),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AnalysisDef {
    /// Command-line name.
    pub name: &'static str,
    /// The PCF+ definition to run, of type `(-> (list nat) result)`.
    pub entry: &'static str,
    pub source: &'static str,
    pub result: ResultKind,
    pub description: &'static str,
}

pub const TOKEN_COUNT: AnalysisDef = AnalysisDef {
    name: "token_count",
    entry: "tokenCount",
    source: include_str!("../../analyses/token_count.pcf"),
    result: ResultKind::Nat,
    description: "number of tokens",
};

pub const CASE_TERMINATION: AnalysisDef = AnalysisDef {
    name: "case_termination",
    entry: "caseTermination",
    source: include_str!("../../analyses/case_termination.pcf"),
    result: ResultKind::Bool,
    description: "every non-empty case body ends with a break",
};

pub const DANGLING_SWITCH: AnalysisDef = AnalysisDef {
    name: "dangling_switch",
    entry: "danglingSwitch",
    source: include_str!("../../analyses/dangling_switch.pcf"),
    result: ResultKind::Bool,
    description: "some switch has code before its first label",
};

pub const FN_RETURN_CHECKER: AnalysisDef = AnalysisDef {
    name: "fn_return_checker",
    entry: "fnReturnChecker",
    source: include_str!("../../analyses/fn_return_checker.pcf"),
    result: ResultKind::Bool,
    description: "every non-void function returns",
};

pub const RETURN_DENSITY: AnalysisDef = AnalysisDef {
    name: "return_density",
    entry: "returnDensity",
    source: include_str!("../../analyses/return_density.pcf"),
    result: ResultKind::Density,
    description: "return statements per function",
};

pub const CALL_DENSITY: AnalysisDef = AnalysisDef {
    name: "call_density",
    entry: "callDensity",
    source: include_str!("../../analyses/call_density.pcf"),
    result: ResultKind::Density,
    description: "calls per function",
};

pub const GOTO_DENSITY: AnalysisDef = AnalysisDef {
    name: "goto_density",
    entry: "gotoDensity",
    source: include_str!("../../analyses/goto_density.pcf"),
    result: ResultKind::Density,
    description: "goto statements per label",
};

/// Every bundled analysis.
pub const ALL: [AnalysisDef; 7] = [
    TOKEN_COUNT,
    CASE_TERMINATION,
    DANGLING_SWITCH,
    FN_RETURN_CHECKER,
    RETURN_DENSITY,
    CALL_DENSITY,
    GOTO_DENSITY,
];

/// The control-flow-lite analyses, without token counting.
pub const TABLE: [AnalysisDef; 6] = [
    CASE_TERMINATION,
    DANGLING_SWITCH,
    FN_RETURN_CHECKER,
    RETURN_DENSITY,
    GOTO_DENSITY,
    CALL_DENSITY,
];

/// Looks an analysis up by command-line name or entry definition name.
pub fn find(name: &str) -> Option<AnalysisDef> {
    ALL.iter()
        .find(|a| a.name == name || a.entry == name)
        .copied()
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("unknown analysis `{0}`")]
    Unknown(String),
    #[error("analysis `{name}`: {source}")]
    Parse {
        name: &'static str,
        #[source]
        source: ParseError,
    },
    #[error("analysis `{name}`: {source}")]
    Type {
        name: &'static str,
        #[source]
        source: TypeError,
    },
    #[error("analysis `{name}` has type {found}, expected {expected}")]
    Signature {
        name: &'static str,
        expected: Type,
        found: Type,
    },
    #[error("analysis `{name}` ({mode}): {source}")]
    Run {
        name: &'static str,
        mode: Mode,
        #[source]
        source: LiftError,
    },
}

impl AnalysisDef {
    /// Parses and typechecks the bundled source.
    pub fn program(&self) -> Result<Program, AnalysisError> {
        let p = parse_program(self.source).map_err(|source| AnalysisError::Parse {
            name: self.name,
            source,
        })?;
        let types = typecheck_program(&p).map_err(|source| AnalysisError::Type {
            name: self.name,
            source,
        })?;
        let expected = Type::func(Type::list(Type::Nat), self.result.ty());
        let found = types
            .defs
            .iter()
            .find(|(n, _)| &**n == self.entry)
            .map(|(_, t)| t.clone())
            .unwrap_or(Type::Nat);
        if found != expected {
            return Err(AnalysisError::Signature {
                name: self.name,
                expected,
                found,
            });
        }
        Ok(p)
    }

    /// The program with every definition deep-lifted.
    pub fn deep_program(&self) -> Result<RewriteOutput, AnalysisError> {
        let p = self.program()?;
        let plan = LiftPlan::deep(p.defs.iter().map(|(n, _)| n.clone()));
        deep_rewrite(&p, &plan).map_err(|source| AnalysisError::Run {
            name: self.name,
            mode: Mode::Deep,
            source,
        })
    }

    /// The program with the entry point shallow-lifted.
    pub fn shallow_program(&self) -> Result<RewriteOutput, AnalysisError> {
        let p = self.program()?;
        shallow_program(&p, [self.entry]).map_err(|source| AnalysisError::Run {
            name: self.name,
            mode: Mode::Shallow,
            source,
        })
    }

    /// Renders one result atom; densities also show their quotient.
    pub fn render(&self, d: &Datum) -> String {
        match (self.result, d) {
            (ResultKind::Density, Datum::Pair(n, m)) => match (n.as_u64(), m.as_u64()) {
                (Some(n), Some(m)) if m > 0 => format!("{n}/{m} = {:.3}", n as f64 / m as f64),
                (Some(n), Some(m)) => format!("{n}/{m}"),
                _ => d.to_string(),
            },
            _ => d.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Run the plain analysis once per effective combination.
    Brute,
    Shallow,
    Deep,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Brute, Mode::Shallow, Mode::Deep];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Brute => "brute",
            Mode::Shallow => "shallow",
            Mode::Deep => "deep",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected brute, shallow or deep)"))
    }
}

#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub analysis: &'static str,
    pub mode: Mode,
    pub result: Var<Datum>,
    pub underlying_calls: u64,
    pub sat_checks: u64,
    pub elapsed: Duration,
}

/// A loaded analysis, rewritten for every mode.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub def: AnalysisDef,
    pub plain: Program,
    pub shallow: Program,
    pub deep: Program,
}

impl Prepared {
    pub fn new(def: AnalysisDef) -> Result<Prepared, AnalysisError> {
        Ok(Prepared {
            def,
            plain: def.program()?,
            shallow: def.shallow_program()?.program,
            deep: def.deep_program()?.program,
        })
    }

    /// Runs the analysis over a variational token stream. Counters cover
    /// everything the mode needs, including enumerating products for brute
    /// force and building the lifted list for the lifted modes.
    pub fn run(&self, stream: &TokenStream, mode: Mode) -> Result<AnalysisReport, AnalysisError> {
        let model = &stream.model;
        let sat_before = model.sat_checks();
        let start = Instant::now();
        let run = match mode {
            Mode::Brute => {
                let classes: Vec<_> = stream
                    .effective_combinations()
                    .into_iter()
                    .map(|(pc, cfg)| (pc, stream.product_value(cfg)))
                    .collect();
                brute_force_lift(&self.plain, self.def.entry, model, &classes)
            }
            Mode::Shallow => run_lifted(&self.shallow, self.def.entry, model, stream.to_value()),
            Mode::Deep => run_lifted(&self.deep, self.def.entry, model, stream.to_value()),
        };
        let elapsed = start.elapsed();
        let (result, counters) = run.map_err(|source| AnalysisError::Run {
            name: self.def.name,
            mode,
            source,
        })?;
        Ok(AnalysisReport {
            analysis: self.def.name,
            mode,
            result: result.compact(),
            underlying_calls: counters.underlying_calls,
            sat_checks: model.sat_checks() - sat_before,
            elapsed,
        })
    }
}

/// Runs one analysis in one mode.
pub fn run(
    def: AnalysisDef,
    stream: &TokenStream,
    mode: Mode,
) -> Result<AnalysisReport, AnalysisError> {
    Prepared::new(def)?.run(stream, mode)
}

/// First pair of reports whose results differ, if any.
pub fn disagreement(reports: &[AnalysisReport]) -> Option<(&AnalysisReport, &AnalysisReport)> {
    let first = reports.first()?;
    reports
        .iter()
        .skip(1)
        .find(|r| r.result != first.result)
        .map(|r| (first, r))
}
