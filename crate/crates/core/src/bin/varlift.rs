use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use varlift::analyses::{self, AnalysisDef, Mode, Prepared};
use varlift::bench::{self, BenchConfig};
use varlift::lifting::{deep_rewrite, shallow_program, LiftPlan};
use varlift::pcf::{parse_program, typecheck_program, Interp};
use varlift::presence::{FeatureModel, PcExpr};
use varlift::spl::preprocess;

#[derive(Parser)]
#[command(name = "varlift", version, about = "Run, lift and benchmark PCF+ analyses over product lines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the `main` term of a PCF+ program.
    Run {
        file: PathBuf,
        /// Evaluation step budget.
        #[arg(long)]
        fuel: Option<u64>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Typecheck a PCF+ program and print the type of each definition.
    Check { file: PathBuf },
    /// Rewrite definitions into lifted form.
    Lift {
        file: PathBuf,
        /// Definitions to deep-lift (comma separated).
        #[arg(long, value_delimiter = ',')]
        deep: Vec<String>,
        /// Definitions to wrap shallowly (comma separated).
        #[arg(long, value_delimiter = ',')]
        shallow: Vec<String>,
        /// Write the rewritten program here instead of standard output.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Run a bundled analysis over a variational source file.
    Analyze {
        file: PathBuf,
        /// Analysis name, e.g. tokenCount or case_termination.
        #[arg(long)]
        analysis: String,
        /// brute, shallow, deep or all.
        #[arg(long, default_value = "all")]
        mode: String,
        /// Print the annotated token stream first.
        #[arg(long)]
        dump_var: bool,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Print the effective combinations of a variational source file.
    Combos {
        file: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Benchmark analyses in every mode over a corpus.
    Bench {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Also include synthetic files with 1..=N independent blocks.
        #[arg(long)]
        synthetic: Option<usize>,
        /// Comma separated analysis names, or `all`.
        #[arg(long, default_value = "all")]
        analyses: String,
        #[arg(long, default_value = "brute,shallow,deep", value_delimiter = ',')]
        modes: Vec<Mode>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Write one row per file instead of grouping by combination count.
        #[arg(long)]
        per_file: bool,
        /// Leave the timing column empty.
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Features, comma separated. Defaults to the sibling `.fm` file.
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
    /// Feature model constraint, e.g. `!(A && B)`.
    #[arg(long)]
    constraint: Option<String>,
}

type Res<T> = Result<T, Box<dyn std::error::Error>>;

impl ModelArgs {
    fn resolve(&self, file: &Path, source: &str) -> Res<FeatureModel> {
        let constraint = match &self.constraint {
            Some(c) => PcExpr::parse(c)?,
            None => PcExpr::True,
        };
        if let Some(fs) = &self.features {
            return Ok(FeatureModel::with_constraint(fs.clone(), &constraint)?);
        }
        let fm = file.with_extension("fm");
        if fm.exists() {
            return Ok(FeatureModel::parse(&std::fs::read_to_string(fm)?)?);
        }
        let inferred = bench::infer_model(source)?;
        Ok(FeatureModel::with_constraint(inferred.features().to_vec(), &constraint)?)
    }
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Res<ExitCode> {
    match command {
        Command::Run { file, fuel, model } => {
            let program = parse_program(&read(&file)?)?;
            typecheck_program(&program)?;
            let mut interp = match (&model.features, &model.constraint) {
                (None, None) => Interp::new(),
                _ => Interp::with_model(&model.resolve(&file, "")?),
            };
            if let Some(f) = fuel {
                interp.set_fuel(f);
            }
            match interp.run(&program)? {
                Some(v) => println!("{}", interp.render(&v)?),
                None => println!("(no main)"),
            }
        }
        Command::Check { file } => {
            let program = parse_program(&read(&file)?)?;
            let types = typecheck_program(&program)?;
            for (name, ty) in &types.defs {
                println!("{name} : {ty}");
            }
            if let Some(t) = types.main {
                println!("main : {t}");
            }
        }
        Command::Lift {
            file,
            deep,
            shallow,
            emit,
        } => {
            let program = parse_program(&read(&file)?)?;
            let out = if deep.is_empty() {
                shallow_program(&program, &shallow)?
            } else {
                let mut plan = LiftPlan::deep(&deep);
                plan.shallow = shallow.iter().map(|s| s.as_str().into()).collect();
                deep_rewrite(&program, &plan)?
            };
            for d in &out.diagnostics {
                eprintln!("note: {d}");
            }
            match emit {
                Some(path) => std::fs::write(&path, out.program.to_string())?,
                None => print!("{}", out.program),
            }
        }
        Command::Analyze {
            file,
            analysis,
            mode,
            dump_var,
            model,
        } => {
            let def = analyses::find(&analysis)
                .ok_or_else(|| analyses::AnalysisError::Unknown(analysis.clone()))?;
            let source = read(&file)?;
            let fm = model.resolve(&file, &source)?;
            let stream = preprocess(&source, &fm)?;
            if dump_var {
                print!("{}", stream.dump());
            }
            let modes = if mode == "all" {
                Mode::ALL.to_vec()
            } else {
                vec![mode.parse::<Mode>()?]
            };
            let prepared = Prepared::new(def)?;
            let mut reports = Vec::new();
            for m in modes {
                let r = prepared.run(&stream, m)?;
                let atoms: Vec<String> = r
                    .result
                    .canonical_pairs()
                    .iter()
                    .map(|(d, pc)| format!("({}, {pc})", def.render(d)))
                    .collect();
                println!(
                    "{:<8} {{{}}}  calls={} sat={} time={:.3}ms",
                    m.name(),
                    atoms.join(", "),
                    r.underlying_calls,
                    r.sat_checks,
                    r.elapsed.as_secs_f64() * 1e3
                );
                reports.push(r);
            }
            if let Some((a, b)) = analyses::disagreement(&reports) {
                eprintln!("error: {} and {} disagree", a.mode, b.mode);
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Combos { file, model } => {
            let source = read(&file)?;
            let fm = model.resolve(&file, &source)?;
            let stream = preprocess(&source, &fm)?;
            let classes = stream.effective_combinations();
            println!("{} effective combination(s)", classes.len());
            for (pc, cfg) in classes {
                println!("  {pc}  e.g. {}", fm.render_config(cfg));
            }
        }
        Command::Bench {
            corpus,
            synthetic,
            analyses: names,
            modes,
            reps,
            per_file,
            no_timing,
            out,
        } => {
            let mut files = match &corpus {
                Some(dir) => bench::load_corpus(dir)?,
                None => Vec::new(),
            };
            for n in 1..=synthetic.unwrap_or(0) {
                files.push(bench::synthetic(n)?);
            }
            if files.is_empty() {
                return Err("nothing to benchmark: pass --corpus or --synthetic".into());
            }
            let analyses = select_analyses(&names)?;
            let outcome = bench::run_benchmark(&files, &BenchConfig { analyses, modes, reps })?;
            let csv = if per_file {
                bench::records_csv(&outcome.records, !no_timing)
            } else {
                bench::group_and_summarize(&outcome.records, !no_timing)
            };
            match out {
                Some(p) => std::fs::write(&p, csv)?,
                None => print!("{csv}"),
            }
            for (file, reason) in &outcome.failures {
                eprintln!("failed: {file}: {reason}");
            }
            for m in &outcome.mismatches {
                eprintln!("mode mismatch: {} / {}", m.file, m.analysis);
                for (mode, r) in &m.results {
                    eprintln!("  {mode}: {r}");
                }
            }
            if !outcome.mismatches.is_empty() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn select_analyses(names: &str) -> Res<Vec<AnalysisDef>> {
    if names == "all" {
        return Ok(analyses::ALL.to_vec());
    }
    if names == "table" {
        return Ok(analyses::TABLE.to_vec());
    }
    names
        .split(',')
        .map(|n| {
            analyses::find(n.trim())
                .ok_or_else(|| analyses::AnalysisError::Unknown(n.to_string()).into())
        })
        .collect()
}
