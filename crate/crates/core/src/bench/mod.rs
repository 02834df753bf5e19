//! Brute-force versus lifted benchmark harness.
//!
//! Counters (underlying calls, sat checks) are the primary metric: they are
//! deterministic. Wall time is recorded as a secondary, best-effort figure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use thiserror::Error;

use crate::analyses::{AnalysisDef, AnalysisError, AnalysisReport, Mode, Prepared};
use crate::pcf::Datum;
use crate::presence::{FeatureModel, PcExpr, PresenceError};
use crate::spl::{lexer, preprocess, SplError};
use crate::vvalue::Var;

pub const CSV_HEADER: &str = "file,combos,analysis,mode,mean_seconds,underlying_calls,sat_checks,reps";
pub const MIN_REPS: usize = 3;
/// Largest synthetic file: 2^10 effective combinations.
pub const MAX_SYNTHETIC_BLOCKS: usize = 10;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Model {
        path: PathBuf,
        #[source]
        source: PresenceError,
    },
    #[error("{0}")]
    Spl(#[from] SplError),
    #[error("{0}")]
    Analysis(#[from] AnalysisError),
    #[error("at least {MIN_REPS} repetitions are required, got {0}")]
    TooFewReps(usize),
    #[error("synthetic files have between 1 and {MAX_SYNTHETIC_BLOCKS} blocks, got {0}")]
    SyntheticSize(usize),
    #[error("{file}/{analysis}/{mode}: counters changed between repetitions")]
    Nondeterministic {
        file: String,
        analysis: String,
        mode: Mode,
    },
}

/// A variational source file with its feature model.
#[derive(Clone, Debug)]
pub struct CorpusFile {
    pub name: String,
    pub source: String,
    pub model: FeatureModel,
}

impl CorpusFile {
    pub fn new(name: impl Into<String>, source: impl Into<String>, model: FeatureModel) -> Self {
        CorpusFile {
            name: name.into(),
            source: source.into(),
            model,
        }
    }

    /// Reads `path`, taking the feature model from the sibling `.fm` file
    /// or, failing that, from the features named in its directives.
    pub fn load(path: &Path) -> Result<CorpusFile, BenchError> {
        let io = |source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        };
        let source = std::fs::read_to_string(path).map_err(io)?;
        let fm_path = path.with_extension("fm");
        let model = if fm_path.exists() {
            let text = std::fs::read_to_string(&fm_path).map_err(|source| BenchError::Io {
                path: fm_path.clone(),
                source,
            })?;
            FeatureModel::parse(&text).map_err(|source| BenchError::Model {
                path: fm_path.clone(),
                source,
            })?
        } else {
            infer_model(&source).map_err(|source| BenchError::Model {
                path: path.to_path_buf(),
                source,
            })?
        };
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(CorpusFile::new(name, source, model))
    }
}

/// An unconstrained model over the features named in conditional
/// directives, in order of first appearance.
pub fn infer_model(source: &str) -> Result<FeatureModel, PresenceError> {
    let mut features: Vec<String> = Vec::new();
    if let Ok(items) = lexer::lex(source) {
        for item in items {
            if let lexer::Item::Directive(d) = item {
                if d.argument.is_empty() {
                    continue;
                }
                for f in PcExpr::parse(&d.argument)?.features() {
                    if !features.iter().any(|g| g == f) {
                        features.push(f.to_string());
                    }
                }
            }
        }
    }
    FeatureModel::new(features)
}

/// All `.vsrc` files of a directory, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusFile>, BenchError> {
    let io = |source| BenchError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "vsrc"))
        .collect();
    paths.sort();
    paths.iter().map(|p| CorpusFile::load(p)).collect()
}

/// A file with `n` independent optional blocks, so `2^n` effective
/// combinations. Blocks are spread through a function with a switch.
pub fn synthetic(n: usize) -> Result<CorpusFile, BenchError> {
    if n == 0 || n > MAX_SYNTHETIC_BLOCKS {
        return Err(BenchError::SyntheticSize(n));
    }
    let features: Vec<String> = (1..=n).map(|i| format!("F{i}")).collect();
    let mut src = String::from("int step(int x, int y) {\n  int acc = x;\n  switch (y) {\n");
    for (i, f) in features.iter().enumerate() {
        let _ = write!(
            src,
            "  case {i}:\n    acc = acc + y * {i};\n#ifdef {f}\n    acc = mix{i}(acc, {i});\n    log{i}(acc);\n#endif\n    break;\n"
        );
    }
    src.push_str("  default:\n    acc = 0;\n    break;\n  }\n  return acc;\n}\n");
    let model = FeatureModel::new(features).map_err(|source| BenchError::Model {
        path: PathBuf::from(format!("synthetic_{n}.vsrc")),
        source,
    })?;
    Ok(CorpusFile::new(format!("synthetic_{n}.vsrc"), src, model))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub file: String,
    pub combos: usize,
    pub analysis: String,
    pub mode: Mode,
    pub mean_seconds: f64,
    pub underlying_calls: u64,
    pub sat_checks: u64,
    pub reps: usize,
    pub result: Var<Datum>,
}

/// A (file, analysis) pair whose modes disagreed.
#[derive(Clone, Debug)]
pub struct Mismatch {
    pub file: String,
    pub analysis: String,
    pub results: Vec<(Mode, String)>,
}

#[derive(Debug, Default)]
pub struct BenchOutcome {
    pub records: Vec<BenchRecord>,
    pub mismatches: Vec<Mismatch>,
    /// Files or analyses that could not be run, with the reason.
    pub failures: Vec<(String, String)>,
}

impl BenchOutcome {
    pub fn is_ok(&self) -> bool {
        self.mismatches.is_empty() && self.failures.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub analyses: Vec<AnalysisDef>,
    pub modes: Vec<Mode>,
    pub reps: usize,
}

/// Runs every (file, analysis, mode) triple: one discarded warm-up run,
/// a cross-mode equivalence check, then `reps` timed runs.
pub fn run_benchmark(files: &[CorpusFile], config: &BenchConfig) -> Result<BenchOutcome, BenchError> {
    if config.reps < MIN_REPS {
        return Err(BenchError::TooFewReps(config.reps));
    }
    let mut prepared = Vec::new();
    for def in &config.analyses {
        prepared.push(Prepared::new(*def)?);
    }
    let mut out = BenchOutcome::default();
    for file in files {
        let stream = match preprocess(&file.source, &file.model) {
            Ok(s) => s,
            Err(e) => {
                out.failures.push((file.name.clone(), e.to_string()));
                continue;
            }
        };
        let combos = stream.effective_combinations().len();
        for p in &prepared {
            let mut warm: Vec<AnalysisReport> = Vec::new();
            let mut failed = false;
            for &mode in &config.modes {
                match p.run(&stream, mode) {
                    Ok(r) => warm.push(r),
                    Err(e) => {
                        out.failures.push((file.name.clone(), e.to_string()));
                        failed = true;
                        break;
                    }
                }
            }
            if failed {
                continue;
            }
            if crate::analyses::disagreement(&warm).is_some() {
                out.mismatches.push(Mismatch {
                    file: file.name.clone(),
                    analysis: p.def.name.to_string(),
                    results: warm
                        .iter()
                        .map(|r| (r.mode, r.result.to_string()))
                        .collect(),
                });
                continue;
            }
            for w in warm {
                let mut total = Duration::ZERO;
                for _ in 0..config.reps {
                    let r = p.run(&stream, w.mode)?;
                    if r.underlying_calls != w.underlying_calls || r.sat_checks != w.sat_checks {
                        return Err(BenchError::Nondeterministic {
                            file: file.name.clone(),
                            analysis: p.def.name.to_string(),
                            mode: w.mode,
                        });
                    }
                    total += r.elapsed;
                }
                out.records.push(BenchRecord {
                    file: file.name.clone(),
                    combos,
                    analysis: p.def.name.to_string(),
                    mode: w.mode,
                    mean_seconds: total.as_secs_f64() / config.reps as f64,
                    underlying_calls: w.underlying_calls,
                    sat_checks: w.sat_checks,
                    reps: config.reps,
                    result: w.result,
                });
            }
        }
    }
    Ok(out)
}

fn number(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.2}")
    }
}

/// One CSV row per record. Without timing the seconds column is left empty,
/// which makes the output reproducible.
pub fn records_csv(records: &[BenchRecord], timing: bool) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in records {
        let secs = if timing {
            format!("{:.6}", r.mean_seconds)
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.file, r.combos, r.analysis, r.mode, secs, r.underlying_calls, r.sat_checks, r.reps
        );
    }
    out
}

/// Averages records per (effective combinations, analysis, mode). The file
/// column lists the grouped files separated by `;`.
pub fn group_and_summarize(records: &[BenchRecord], timing: bool) -> String {
    let mut groups: BTreeMap<(usize, &str, Mode), Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.combos, r.analysis.as_str(), r.mode))
            .or_default()
            .push(r);
    }
    let mut out = format!("{CSV_HEADER}\n");
    for ((combos, analysis, mode), rs) in groups {
        let n = rs.len() as f64;
        let files: Vec<&str> = rs.iter().map(|r| r.file.as_str()).collect();
        let mean = |f: &dyn Fn(&BenchRecord) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
        let secs = if timing {
            format!("{:.6}", mean(&|r| r.mean_seconds))
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            files.join(";"),
            combos,
            analysis,
            mode,
            secs,
            number(mean(&|r| r.underlying_calls as f64)),
            number(mean(&|r| r.sat_checks as f64)),
            rs.iter().map(|r| r.reps).min().unwrap_or(0)
        );
    }
    out
}
