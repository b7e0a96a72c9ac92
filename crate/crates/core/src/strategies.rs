//! Strategy drivers and kill-matrix assembly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bytecode::Program;
use crate::engine::{run_test, EngineConfig, HitSample};
use crate::lang::{parse_program, Ast, Evaluator, Loc, ParseError, TestOutcome};
use crate::memo::MemoStats;
use crate::mutagen::{discover_mutation_points, generate_meta_mutant, MetaAst, MutantId, MutationPoint};
use crate::stream::{run_modulo_state, run_split_stream};
use crate::verdict::{KillCause, Verdict};

pub const DEFAULT_BUDGET_MULT: u64 = 10;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("parse error")]
    Parse(#[from] ParseError),
    #[error("test {test} fails on the original program: {outcome}")]
    InvalidTest { test: String, outcome: TestOutcome },
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "traditional")]
    Traditional,
    #[serde(rename = "split-stream")]
    SplitStream,
    #[serde(rename = "modulo-state")]
    ModuloState,
    #[serde(rename = "exec-taints-f-m")]
    TaintsForkMemo,
    #[serde(rename = "exec-taints-f-nm")]
    TaintsForkNoMemo,
    #[serde(rename = "exec-taints-nf-m")]
    TaintsNoForkMemo,
    #[serde(rename = "exec-taints-nf-nm")]
    TaintsNoForkNoMemo,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Traditional,
        Strategy::SplitStream,
        Strategy::ModuloState,
        Strategy::TaintsForkMemo,
        Strategy::TaintsForkNoMemo,
        Strategy::TaintsNoForkMemo,
        Strategy::TaintsNoForkNoMemo,
    ];

    pub fn exec_taints(fork: bool, memo: bool) -> Strategy {
        match (fork, memo) {
            (true, true) => Strategy::TaintsForkMemo,
            (true, false) => Strategy::TaintsForkNoMemo,
            (false, true) => Strategy::TaintsNoForkMemo,
            (false, false) => Strategy::TaintsNoForkNoMemo,
        }
    }

    /// Fork and memo flags of an execution-taint strategy.
    pub fn engine_config(self) -> Option<EngineConfig> {
        let (fork, memo) = match self {
            Strategy::TaintsForkMemo => (true, true),
            Strategy::TaintsForkNoMemo => (true, false),
            Strategy::TaintsNoForkMemo => (false, true),
            Strategy::TaintsNoForkNoMemo => (false, false),
            _ => return None,
        };
        Some(EngineConfig { fork, memo, ..EngineConfig::default() })
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Traditional => "traditional",
            Strategy::SplitStream => "split-stream",
            Strategy::ModuloState => "modulo-state",
            Strategy::TaintsForkMemo => "exec-taints-f-m",
            Strategy::TaintsForkNoMemo => "exec-taints-f-nm",
            Strategy::TaintsNoForkMemo => "exec-taints-nf-m",
            Strategy::TaintsNoForkNoMemo => "exec-taints-nf-nm",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "exec-taints" {
            return Ok(Strategy::TaintsForkMemo);
        }
        Strategy::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

/// A parsed program with its meta-mutant and compiled code.
#[derive(Clone, Debug)]
pub struct Subject {
    pub name: String,
    pub ast: Ast,
    pub meta: MetaAst,
    pub program: Program,
    pub tests: Vec<String>,
}

impl Subject {
    pub fn from_ast(name: impl Into<String>, ast: Ast) -> Subject {
        let points = discover_mutation_points(&ast);
        Subject::with_points(name, ast, &points)
    }

    /// Subject over a chosen set of mutation points.
    pub fn with_points(name: impl Into<String>, ast: Ast, points: &[MutationPoint]) -> Subject {
        let meta = generate_meta_mutant(&ast, points);
        let program = Program::compile(&meta);
        let tests = ast.tests().into_iter().map(String::from).collect();
        Subject { name: name.into(), ast, meta, program, tests }
    }

    pub fn parse(name: impl Into<String>, source: &str) -> Result<Subject, AnalysisError> {
        Ok(Subject::from_ast(name, parse_program(source)?))
    }

    pub fn mutant_count(&self) -> usize {
        self.meta.mutants.len()
    }
}

/// The original program's run of one test, which fixes the step budget.
#[derive(Clone, Debug)]
pub struct Calibration {
    pub test: String,
    pub stmts: u64,
    pub budget: u64,
    pub covered: BTreeSet<Loc>,
}

/// Runs every test on the original program. Fails when any test does not pass.
pub fn calibrate(subject: &Subject, budget_mult: u64) -> Result<Vec<Calibration>, AnalysisError> {
    subject
        .tests
        .iter()
        .map(|test| {
            let run = Evaluator::new(&subject.ast, crate::lang::DEFAULT_STEP_CAP).run(test, &BTreeMap::new());
            if !run.outcome.is_pass() {
                return Err(AnalysisError::InvalidTest { test: test.clone(), outcome: run.outcome });
            }
            Ok(Calibration {
                test: test.clone(),
                stmts: run.stmts,
                budget: budget_mult.saturating_mul(run.stmts),
                covered: run.covered,
            })
        })
        .collect()
}

/// Result of one strategy on one test.
#[derive(Clone, Debug, PartialEq)]
pub struct TestReport {
    pub test: String,
    /// Verdict per mutant, indexed by `id - 1`.
    pub verdicts: Vec<Verdict>,
    pub program_stmts: u64,
    pub infra_ops: u64,
    pub contexts: u64,
    pub memo: MemoStats,
    pub hit_samples: Vec<HitSample>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrategyRun {
    pub strategy: Strategy,
    pub tests: Vec<TestReport>,
}

impl StrategyRun {
    pub fn program_stmts(&self) -> u64 {
        self.tests.iter().map(|t| t.program_stmts).sum()
    }

    pub fn infra_ops(&self) -> u64 {
        self.tests.iter().map(|t| t.infra_ops).sum()
    }

    pub fn memo(&self) -> MemoStats {
        self.tests.iter().fold(MemoStats::default(), |acc, t| MemoStats {
            hits: acc.hits + t.memo.hits,
            misses: acc.misses + t.memo.misses,
            stores: acc.stores + t.memo.stores,
            clears: acc.clears + t.memo.clears,
        })
    }

    pub fn kill_matrix(&self) -> KillMatrix {
        KillMatrix {
            tests: self.tests.iter().map(|t| t.test.clone()).collect(),
            outcomes: self.tests.iter().map(|t| t.verdicts.clone()).collect(),
        }
    }
}

/// Verdict per (test, mutant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KillMatrix {
    pub tests: Vec<String>,
    /// `outcomes[t][id - 1]`.
    pub outcomes: Vec<Vec<Verdict>>,
}

impl KillMatrix {
    pub fn mutant_count(&self) -> usize {
        self.outcomes.first().map_or(0, Vec::len)
    }

    /// Overall verdict per mutant: killed by the first test that kills it,
    /// else survived if any test covers it.
    pub fn overall(&self) -> Vec<Verdict> {
        (0..self.mutant_count())
            .map(|i| {
                let col = self.outcomes.iter().map(|row| row[i]);
                col.clone()
                    .find(|v| v.is_killed())
                    .or_else(|| col.clone().find(|v| *v == Verdict::Survived))
                    .unwrap_or(Verdict::NotCovered)
            })
            .collect()
    }

    pub fn score(&self) -> f64 {
        let all = self.overall();
        if all.is_empty() {
            return 0.0;
        }
        all.iter().filter(|v| v.is_killed()).count() as f64 / all.len() as f64
    }

    /// Cells where `other` differs from `self`, as `(test, mutant, ours, theirs)`.
    pub fn differences(&self, other: &KillMatrix) -> Vec<(String, MutantId, Verdict, Verdict)> {
        let mut out = Vec::new();
        for (t, (a, b)) in self.outcomes.iter().zip(&other.outcomes).enumerate() {
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                if x != y {
                    out.push((self.tests[t].clone(), MutantId(i as u32 + 1), *x, *y));
                }
            }
        }
        out
    }
}

/// Checks that every strategy produced the same kill matrix as the first.
pub fn reconcile(runs: &[StrategyRun]) -> Result<KillMatrix, AnalysisError> {
    let Some(first) = runs.first() else {
        return Ok(KillMatrix { tests: Vec::new(), outcomes: Vec::new() });
    };
    let reference = first.kill_matrix();
    for run in &runs[1..] {
        let km = run.kill_matrix();
        if km.tests != reference.tests {
            return Err(AnalysisError::Inconsistent(format!("{} ran a different test set", run.strategy)));
        }
        if let Some((test, m, a, b)) = reference.differences(&km).into_iter().next() {
            return Err(AnalysisError::Inconsistent(format!(
                "{test} {m}: {} says {a}, {} says {b}",
                first.strategy, run.strategy
            )));
        }
    }
    Ok(reference)
}

pub(crate) fn outcome_verdict(outcome: &TestOutcome) -> Verdict {
    match outcome {
        TestOutcome::Pass => Verdict::Survived,
        TestOutcome::AssertionFailure { .. } => Verdict::Killed(KillCause::Assertion),
        TestOutcome::RuntimeException { .. } => Verdict::Killed(KillCause::Exception),
        TestOutcome::Timeout => Verdict::Killed(KillCause::Timeout),
    }
}

/// Runs the original once per test, then every covered mutant in isolation.
pub fn run_traditional(subject: &Subject, calibration: &[Calibration]) -> StrategyRun {
    let asts: Vec<Ast> = subject.meta.mutant_ids().map(|m| subject.meta.mutant_ast(m)).collect();
    let tests = calibration
        .iter()
        .map(|cal| {
            let mut stmts = cal.stmts;
            let mut runs = 0;
            let verdicts = subject
                .meta
                .mutants
                .iter()
                .zip(&asts)
                .map(|(m, ast)| {
                    if !cal.covered.contains(&m.loc) {
                        return Verdict::NotCovered;
                    }
                    let run = Evaluator::new(ast, cal.budget).run(&cal.test, &BTreeMap::new());
                    stmts += run.stmts;
                    runs += 1;
                    outcome_verdict(&run.outcome)
                })
                .collect();
            TestReport {
                test: cal.test.clone(),
                verdicts,
                program_stmts: stmts,
                infra_ops: 0,
                contexts: runs,
                memo: MemoStats::default(),
                hit_samples: Vec::new(),
            }
        })
        .collect();
    StrategyRun { strategy: Strategy::Traditional, tests }
}

/// Runs every test under the execution-taint engine.
pub fn run_exec_taints(subject: &Subject, calibration: &[Calibration], cfg: EngineConfig) -> Result<StrategyRun, AnalysisError> {
    let strategy = Strategy::exec_taints(cfg.fork, cfg.memo);
    let tests = calibration
        .iter()
        .map(|cal| {
            let run = run_test(&subject.program, &cal.test, cal.budget, &cfg);
            if !run.outcome.is_pass() {
                return Err(AnalysisError::Inconsistent(format!(
                    "{strategy}: original {} ended with {} under the engine",
                    cal.test, run.outcome
                )));
            }
            if run.unmerged_at_return != 0 {
                return Err(AnalysisError::Inconsistent(format!(
                    "{strategy}: {} diverged mutants left unmerged in {}",
                    run.unmerged_at_return, cal.test
                )));
            }
            Ok(TestReport {
                test: cal.test.clone(),
                verdicts: run.verdicts,
                program_stmts: run.program_stmts,
                infra_ops: run.infra_ops,
                contexts: run.contexts,
                memo: run.memo,
                hit_samples: run.hit_samples,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(StrategyRun { strategy, tests })
}

pub fn run_strategy(subject: &Subject, calibration: &[Calibration], strategy: Strategy) -> Result<StrategyRun, AnalysisError> {
    match strategy {
        Strategy::Traditional => Ok(run_traditional(subject, calibration)),
        Strategy::SplitStream => run_split_stream(subject, calibration),
        Strategy::ModuloState => run_modulo_state(subject, calibration),
        other => run_exec_taints(subject, calibration, other.engine_config().expect("execution-taint strategy")),
    }
}
