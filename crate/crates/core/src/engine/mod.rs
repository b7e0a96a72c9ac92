//! Execution-taint interpreter. One root context runs the original program
//! with every mutant riding along as taints on values. A mutant whose branch
//! decision differs from the original's leaves the root context, either as a
//! snapshot child resumed at the enclosing function's return (fork mode) or as
//! a wounded mutant re-executing that function (no-fork mode). Either way its
//! return value is merged back as a taint and it rejoins the root context.

mod machine;

use serde::{Deserialize, Serialize};

use crate::bytecode::Program;
use crate::lang::{Loc, PlainValue, TestOutcome};
use crate::memo::MemoStats;
use crate::mutagen::MutantId;
use crate::taint::TaintedValue;
use crate::verdict::Verdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub fork: bool,
    pub memo: bool,
    /// Memo hits to record in [`TestRun::hit_samples`].
    pub hit_samples: usize,
    /// Record every variable store of the root context in [`TestRun::stores`].
    pub trace_stores: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { fork: true, memo: true, hit_samples: 0, trace_stores: false }
    }
}

/// A mutant taking a different branch than the mainline it rode with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceEvent {
    pub site: Loc,
    pub mutant: MutantId,
    /// Branch decision the mutant took; the mainline took the other one.
    pub decision: bool,
}

/// A memoized call result that was reused, for checking against re-execution.
#[derive(Clone, Debug, PartialEq)]
pub struct HitSample {
    pub function: String,
    pub args: Vec<PlainValue>,
    pub mutant: MutantId,
    pub value: PlainValue,
}

/// A value assigned to a variable in the root context.
#[derive(Clone, Debug, PartialEq)]
pub struct StoreEvent {
    pub function: String,
    pub variable: String,
    pub loc: Loc,
    pub value: TaintedValue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestRun {
    pub test: String,
    /// Outcome of the original program; verdicts are meaningful only on pass.
    pub outcome: TestOutcome,
    /// Verdict per mutant, indexed by `id - 1`.
    pub verdicts: Vec<Verdict>,
    pub program_stmts: u64,
    pub infra_ops: u64,
    pub memo: MemoStats,
    /// Child and re-execution contexts created.
    pub contexts: u64,
    pub events: Vec<DivergenceEvent>,
    /// Wrapped-call returns that left a diverged mutant neither merged nor killed.
    pub unmerged_at_return: u64,
    pub hit_samples: Vec<HitSample>,
    pub stores: Vec<StoreEvent>,
}

/// Runs one test over the meta-mutant with the given statement budget per mutant.
pub fn run_test(program: &Program, test: &str, budget: u64, cfg: &EngineConfig) -> TestRun {
    machine::Machine::new(program, budget, cfg).run(test)
}

#[cfg(test)]
mod tests;
