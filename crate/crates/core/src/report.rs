//! Run reports and their JSON/CSV forms.

use serde::{Deserialize, Serialize};

use crate::memo::MemoStats;
use crate::strategies::{calibrate, reconcile, run_strategy, AnalysisError, KillMatrix, Strategy, StrategyRun, Subject};
use crate::verdict::{KillCause, Verdict};

pub const SCHEMA: &str = "mutlab/1";
pub const DEFAULT_SEED: u64 = 42;
pub const CSV_HEADER: [&str; 8] =
    ["program", "strategy", "mutants", "killed", "survived", "not_covered", "program_stmts", "infra_ops"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub mutants: usize,
    pub killed: usize,
    pub killed_assertion: usize,
    pub killed_exception: usize,
    pub killed_timeout: usize,
    pub survived: usize,
    pub not_covered: usize,
}

impl Totals {
    pub fn from_verdicts(verdicts: &[Verdict]) -> Totals {
        let mut t = Totals { mutants: verdicts.len(), ..Totals::default() };
        for v in verdicts {
            match v {
                Verdict::Killed(cause) => {
                    t.killed += 1;
                    match cause {
                        KillCause::Assertion => t.killed_assertion += 1,
                        KillCause::Exception => t.killed_exception += 1,
                        KillCause::Timeout => t.killed_timeout += 1,
                    }
                }
                Verdict::Survived => t.survived += 1,
                Verdict::NotCovered => t.not_covered += 1,
            }
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCost {
    pub test: String,
    pub program_stmts: u64,
    pub infra_ops: u64,
    pub contexts: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantVerdict {
    pub id: String,
    pub location: String,
    pub mutation: String,
    #[serde(flatten)]
    pub verdict: Verdict,
    /// First test that kills the mutant.
    pub killed_by: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub program: String,
    pub strategy: Strategy,
    pub seed: u64,
    pub budget_mult: u64,
    pub totals: Totals,
    pub program_stmts: u64,
    pub infra_ops: u64,
    pub contexts: u64,
    pub memo: MemoStats,
    pub tests: Vec<TestCost>,
    pub mutants: Vec<MutantVerdict>,
}

impl RunReport {
    pub fn new(subject: &Subject, run: &StrategyRun, seed: u64, budget_mult: u64) -> RunReport {
        let km = run.kill_matrix();
        let overall = km.overall();
        let mutants = subject
            .meta
            .mutants
            .iter()
            .zip(&overall)
            .map(|(m, v)| MutantVerdict {
                id: m.id.to_string(),
                location: m.loc.to_string(),
                mutation: format!("{} -> {}", m.original, m.replacement),
                verdict: *v,
                killed_by: killer(&km, m.id.index() - 1),
            })
            .collect();
        RunReport {
            schema: SCHEMA.to_string(),
            program: subject.name.clone(),
            strategy: run.strategy,
            seed,
            budget_mult,
            totals: Totals::from_verdicts(&overall),
            program_stmts: run.program_stmts(),
            infra_ops: run.infra_ops(),
            contexts: run.tests.iter().map(|t| t.contexts).sum(),
            memo: run.memo(),
            tests: run
                .tests
                .iter()
                .map(|t| TestCost {
                    test: t.test.clone(),
                    program_stmts: t.program_stmts,
                    infra_ops: t.infra_ops,
                    contexts: t.contexts,
                })
                .collect(),
            mutants,
        }
    }

    fn csv_record(&self) -> [String; 8] {
        [
            self.program.clone(),
            self.strategy.to_string(),
            self.totals.mutants.to_string(),
            self.totals.killed.to_string(),
            self.totals.survived.to_string(),
            self.totals.not_covered.to_string(),
            self.program_stmts.to_string(),
            self.infra_ops.to_string(),
        ]
    }
}

fn killer(km: &KillMatrix, i: usize) -> Option<String> {
    km.outcomes.iter().position(|row| row[i].is_killed()).map(|t| km.tests[t].clone())
}

/// All seven strategies on one program, after checking they agree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema: String,
    pub program: String,
    pub seed: u64,
    pub budget_mult: u64,
    pub runs: Vec<RunReport>,
}

pub fn analyze(subject: &Subject, strategy: Strategy, seed: u64, budget_mult: u64) -> Result<RunReport, AnalysisError> {
    let cal = calibrate(subject, budget_mult)?;
    let run = run_strategy(subject, &cal, strategy)?;
    Ok(RunReport::new(subject, &run, seed, budget_mult))
}

/// Runs every strategy (one thread each) and reconciles their kill matrices.
pub fn compare(subject: &Subject, seed: u64, budget_mult: u64) -> Result<CompareReport, AnalysisError> {
    let cal = calibrate(subject, budget_mult)?;
    let runs: Vec<Result<StrategyRun, AnalysisError>> = std::thread::scope(|s| {
        let handles: Vec<_> =
            Strategy::ALL.iter().map(|st| s.spawn(|| run_strategy(subject, &cal, *st))).collect();
        handles.into_iter().map(|h| h.join().expect("strategy thread panicked")).collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    reconcile(&runs)?;
    Ok(CompareReport {
        schema: SCHEMA.to_string(),
        program: subject.name.clone(),
        seed,
        budget_mult,
        runs: runs.iter().map(|r| RunReport::new(subject, r, seed, budget_mult)).collect(),
    })
}

pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

pub fn to_csv<'a>(reports: impl IntoIterator<Item = &'a RunReport>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in reports {
        w.write_record(r.csv_record()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn euler() -> Subject {
        corpus::find("euler").unwrap().subject()
    }

    #[test]
    fn totals_add_up() {
        let r = analyze(&euler(), Strategy::exec_taints(true, true), DEFAULT_SEED, 10).unwrap();
        let t = r.totals;
        assert_eq!(t.mutants, 35);
        assert_eq!(t.killed + t.survived + t.not_covered, t.mutants);
        assert_eq!(t.killed_assertion + t.killed_exception + t.killed_timeout, t.killed);
        assert_eq!(r.mutants.len(), t.mutants);
    }

    #[test]
    fn json_round_trips() {
        let r = analyze(&euler(), Strategy::SplitStream, 7, 10).unwrap();
        let json = to_json(&r);
        assert!(json.starts_with("{\n  \"schema\": \"mutlab/1\""));
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn no_mutants_gives_zero_counts() {
        let subject = Subject::parse("id", "def f(x):\n  return x\n\ndef test_f():\n  assert f(1) == 1\n").unwrap();
        let r = analyze(&subject, Strategy::Traditional, DEFAULT_SEED, 10).unwrap();
        assert_eq!(r.totals, Totals::default());
        let v: serde_json::Value = serde_json::from_str(&to_json(&r)).unwrap();
        assert_eq!(v["totals"]["killed"], 0);
        assert_eq!(v["infra_ops"], 0);
    }

    #[test]
    fn csv_has_one_row_per_strategy() {
        let c = compare(&euler(), DEFAULT_SEED, 10).unwrap();
        let text = to_csv(&c.runs);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), Strategy::ALL.len() + 1);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("euler,traditional,35,"));
        let kills: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(3).unwrap()).collect();
        assert!(kills.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn compare_is_deterministic() {
        let a = to_json(&compare(&euler(), DEFAULT_SEED, 10).unwrap());
        let b = to_json(&compare(&euler(), DEFAULT_SEED, 10).unwrap());
        assert_eq!(a, b);
    }
}
