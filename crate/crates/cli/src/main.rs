use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mutlab_core::corpus;
use mutlab_core::fuzz::{fuzz_program, fuzz_program_wild};
use mutlab_core::report::{self, DEFAULT_SEED};
use mutlab_core::{AnalysisError, Strategy, Subject, DEFAULT_BUDGET_MULT};

#[derive(Parser)]
#[command(name = "mutlab", version, about = "Mutation analysis with execution taints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one strategy on a program and report its verdicts.
    Analyze {
        #[arg(long)]
        program: PathBuf,
        #[arg(long, default_value = "exec-taints")]
        strategy: Strategy,
        /// Re-execute diverged mutants instead of forking (execution-taint strategies).
        #[arg(long)]
        no_fork: bool,
        /// Disable the call memo (execution-taint strategies).
        #[arg(long)]
        no_memo: bool,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every strategy on a program and check that they agree.
    Compare {
        #[arg(long)]
        program: PathBuf,
        #[arg(long, required = true)]
        all: bool,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Mutants {
        #[command(subcommand)]
        command: MutantsCommand,
    },
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
    /// Differential check of all strategies on generated programs.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Allow data-dependent loops and recursion in generated programs.
        #[arg(long)]
        wild: bool,
        #[arg(long, env = "MUTLAB_BUDGET_MULT", default_value_t = DEFAULT_BUDGET_MULT)]
        budget_mult: u64,
    },
}

#[derive(Subcommand)]
enum MutantsCommand {
    /// Print every mutant of a program.
    List {
        #[arg(long)]
        program: PathBuf,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Compare all strategies on the bundled programs.
    Run {
        /// Write one JSON report per program plus summary.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, env = "MUTLAB_BUDGET_MULT", default_value_t = DEFAULT_BUDGET_MULT)]
    budget_mult: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    InvalidTest(anyhow::Error),
    Usage(anyhow::Error),
    Inconsistent(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::InvalidTest(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Inconsistent(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::InvalidTest(e) | Failure::Usage(e) | Failure::Inconsistent(e) => e,
        }
    }

    fn with_context(self, ctx: String) -> Failure {
        match self {
            Failure::InvalidTest(e) => Failure::InvalidTest(e.context(ctx)),
            Failure::Usage(e) => Failure::Usage(e.context(ctx)),
            Failure::Inconsistent(e) => Failure::Inconsistent(e.context(ctx)),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::InvalidTest { .. } => Failure::InvalidTest(e.into()),
            AnalysisError::Parse(_) => Failure::Usage(e.into()),
            AnalysisError::Inconsistent(_) => Failure::Inconsistent(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn load(path: &Path) -> Result<Subject, Failure> {
    let source = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let name = path.file_stem().map_or_else(|| "program".to_string(), |s| s.to_string_lossy().into_owned());
    Subject::parse(name, &source).map_err(|e| Failure::Usage(anyhow::Error::new(e).context(path.display().to_string())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { program, strategy, no_fork, no_memo, common, format, out } => {
            let strategy = match strategy.engine_config() {
                Some(cfg) => Strategy::exec_taints(cfg.fork && !no_fork, cfg.memo && !no_memo),
                None if no_fork || no_memo => {
                    return Err(Failure::Usage(anyhow::anyhow!("--no-fork and --no-memo apply only to exec-taints")))
                }
                None => strategy,
            };
            let subject = load(&program)?;
            let r = report::analyze(&subject, strategy, common.seed, common.budget_mult)?;
            let text = match format {
                Format::Json => report::to_json(&r),
                Format::Csv => report::to_csv([&r]),
            };
            emit(&text, out.as_deref())
        }
        Command::Compare { program, all: _, common, format, out } => {
            let subject = load(&program)?;
            let c = report::compare(&subject, common.seed, common.budget_mult)?;
            let text = match format {
                Format::Json => report::to_json(&c),
                Format::Csv => report::to_csv(&c.runs),
            };
            emit(&text, out.as_deref())
        }
        Command::Mutants { command: MutantsCommand::List { program } } => {
            let subject = load(&program)?;
            for m in &subject.meta.mutants {
                println!("{m} in {}", subject.meta.points[m.point].function);
            }
            Ok(())
        }
        Command::Corpus { command: CorpusCommand::Run { out, common } } => corpus_run(out.as_deref(), &common),
        Command::Fuzz { count, seed, wild, budget_mult } => {
            for s in seed..seed.saturating_add(count) {
                let src = if wild { fuzz_program_wild(s) } else { fuzz_program(s) };
                let subject = Subject::parse(format!("fuzz-{s}"), &src)?;
                let c = report::compare(&subject, s, budget_mult)
                    .map_err(|e| Failure::from(e).with_context(format!("seed {s}\n{src}")))?;
                let t = c.runs[0].totals;
                println!("seed {s}: {} mutants, {} killed, 7 strategies agree", t.mutants, t.killed);
            }
            Ok(())
        }
    }
}

fn corpus_run(out: Option<&Path>, common: &Common) -> Result<(), Failure> {
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut reports = Vec::new();
    for p in corpus::CORPUS {
        let c = report::compare(&p.subject(), common.seed, common.budget_mult)?;
        if let Some(dir) = out {
            emit(&report::to_json(&c), Some(&dir.join(format!("{}.json", p.name))))?;
        }
        let stmts = |s: Strategy| c.runs.iter().find(|r| r.strategy == s).map_or(0, |r| r.program_stmts);
        let ratio = stmts(Strategy::exec_taints(true, true)) as f64 / stmts(Strategy::Traditional) as f64;
        eprintln!("{}: {} mutants (reference {}), exec-taints/traditional = {ratio:.3}", p.name, c.runs[0].totals.mutants, p.reference_mutants);
        reports.push((c, ratio));
    }
    let mean = reports.iter().map(|(_, r)| r).sum::<f64>() / reports.len() as f64;
    eprintln!("mean exec-taints/traditional = {mean:.3}");
    let csv = report::to_csv(reports.iter().flat_map(|(c, _)| &c.runs));
    emit(&csv, out.map(|dir| dir.join("summary.csv")).as_deref())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disagreement_exits_with_three() {
        assert_eq!(Failure::from(AnalysisError::Inconsistent("x".into())).code(), 3);
    }
}
