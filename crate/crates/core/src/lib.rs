pub mod bytecode;
pub mod corpus;
pub mod engine;
pub mod fuzz;
pub mod lang;
pub mod memo;
pub mod mutagen;
pub mod report;
pub mod strategies;
pub mod stream;
pub mod taint;
pub mod verdict;

pub use engine::{run_test, EngineConfig, TestRun};
pub use lang::{parse_program, Ast, ErrorKind, Loc, ParseError, PlainValue, TestOutcome};
pub use mutagen::{discover_mutation_points, enumerate_mutants, generate_meta_mutant, MetaAst, Mutant, MutantId, MutationPoint};
pub use report::{analyze, compare, CompareReport, RunReport, Totals};
pub use strategies::{
    calibrate, reconcile, run_strategy, AnalysisError, Calibration, KillMatrix, Strategy, StrategyRun, Subject, TestReport,
    DEFAULT_BUDGET_MULT,
};
pub use taint::TaintedValue;
pub use verdict::{KillCause, Verdict};
