//! One line per acceptance criterion; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use mutlab_core::corpus::{self, CORPUS};
use mutlab_core::fuzz::fuzz_program;
use mutlab_core::lang::{Evaluator, PlainValue, DEFAULT_STEP_CAP};
use mutlab_core::report::{compare, to_json, DEFAULT_SEED};
use mutlab_core::taint::apply_binary;
use mutlab_core::{
    calibrate, reconcile, run_strategy, run_test, EngineConfig, MutantId, Strategy, StrategyRun, Subject, TaintedValue,
    DEFAULT_BUDGET_MULT,
};

const FUZZ_SEEDS: u64 = 200;
const MEAN_RATIO_LIMIT: f64 = 0.30;
const MEMO_SAMPLES: usize = 1000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn tv(base: i64, taints: &[(u32, i64)]) -> TaintedValue {
    TaintedValue::from_entries(PlainValue::Int(base), taints.iter().map(|&(m, v)| (MutantId(m), PlainValue::Int(v))))
}

fn all_runs(subject: &Subject) -> Vec<StrategyRun> {
    let cal = calibrate(subject, DEFAULT_BUDGET_MULT).unwrap();
    Strategy::ALL.iter().map(|s| run_strategy(subject, &cal, *s).unwrap()).collect()
}

fn stmts(runs: &[StrategyRun], s: Strategy) -> u64 {
    runs.iter().find(|r| r.strategy == s).unwrap().program_stmts()
}

fn fuzz_subjects() -> Vec<Subject> {
    (0..FUZZ_SEEDS).map(|s| Subject::parse(format!("fuzz{s}"), &fuzz_program(s)).unwrap()).collect()
}

fn taint_rules() -> Outcome {
    let add = mutlab_core::lang::BinOp::Add;
    let r4 = apply_binary(&tv(1, &[(1, 2)]), add, &[], &tv(3, &[(1, 4)])).unwrap().value;
    let r7 = apply_binary(&tv(1, &[(1, 2)]), add, &[], &tv(3, &[(2, 5)])).unwrap().value;
    let subject = corpus::partitioned_process_curated();
    let cal = calibrate(&subject, DEFAULT_BUDGET_MULT).unwrap();
    let cfg = EngineConfig { trace_stores: true, ..EngineConfig::default() };
    let run = run_test(&subject.program, &cal[0].test, cal[0].budget, &cfg);
    let a = run
        .stores
        .iter()
        .filter(|s| s.function == "partitioned_process" && s.variable == "a")
        .nth(1)
        .map(|s| s.value.to_string())
        .unwrap_or_default();
    let ok = r4 == tv(4, &[(1, 6)]) && r7 == tv(4, &[(1, 5), (2, 6)]) && a == "{M0:1.0, M2:4, M3:4}";
    outcome(ok, format!("rule4 {r4}, rule7 {r7}, a after first loop body {a}"))
}

fn oracle_equivalence(fuzz: &[Subject]) -> Outcome {
    let mut subjects = corpus::subjects();
    subjects.extend(fuzz.iter().cloned());
    let mut mutants = 0;
    for s in &subjects {
        let runs = all_runs(s);
        if let Err(e) = reconcile(&runs) {
            return outcome(false, format!("{}: {e}", s.name));
        }
        mutants += s.mutant_count();
    }
    outcome(true, format!("{} programs, {mutants} mutants, 7 strategies agree", subjects.len()))
}

fn cost_monotonicity() -> Outcome {
    let et = Strategy::exec_taints;
    let mut bad = Vec::new();
    for s in corpus::subjects() {
        let runs = all_runs(&s);
        let st = |x| stmts(&runs, x);
        let pairs = [
            (Strategy::ModuloState, Strategy::SplitStream),
            (et(true, true), et(true, false)),
            (et(true, true), et(false, true)),
            (et(true, false), et(false, false)),
            (et(false, true), et(false, false)),
            (et(true, true), et(false, false)),
        ];
        for (lo, hi) in pairs {
            if st(lo) > st(hi) {
                bad.push(format!("{}: {lo}={} > {hi}={}", s.name, st(lo), st(hi)));
            }
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "all orderings hold on 5 programs".into() } else { bad.join("; ") })
}

fn reduction() -> Outcome {
    let mut parts = Vec::new();
    let mut sum = 0.0;
    for s in corpus::subjects() {
        let cal = calibrate(&s, DEFAULT_BUDGET_MULT).unwrap();
        let full = run_strategy(&s, &cal, Strategy::exec_taints(true, true)).unwrap().program_stmts();
        let trad = run_strategy(&s, &cal, Strategy::Traditional).unwrap().program_stmts();
        let ratio = full as f64 / trad as f64;
        sum += ratio;
        parts.push(format!("{} {full}/{trad}={ratio:.3}", s.name));
    }
    let mean = sum / CORPUS.len() as f64;
    outcome(mean <= MEAN_RATIO_LIMIT, format!("mean {mean:.3} (limit {MEAN_RATIO_LIMIT}); {}", parts.join(", ")))
}

fn merge_back(fuzz: &[Subject]) -> Outcome {
    let mut calls = 0;
    for s in fuzz.iter().cloned().chain(corpus::subjects()) {
        let cal = calibrate(&s, DEFAULT_BUDGET_MULT).unwrap();
        for c in &cal {
            for (fork, memo) in [(true, true), (true, false), (false, true), (false, false)] {
                let r = run_test(&s.program, &c.test, c.budget, &EngineConfig { fork, memo, ..EngineConfig::default() });
                calls += 1;
                if r.unmerged_at_return != 0 || !r.outcome.is_pass() {
                    return outcome(false, format!("{} {} fork={fork} memo={memo}: {} unmerged", s.name, c.test, r.unmerged_at_return));
                }
            }
        }
    }
    outcome(true, format!("{calls} engine runs, no divergent mutant left pending"))
}

fn memo(fuzz: &[Subject]) -> Outcome {
    for s in fuzz.iter().cloned().chain(corpus::subjects()) {
        let runs = all_runs(&s);
        for fork in [true, false] {
            let km = |m| runs.iter().find(|r| r.strategy == Strategy::exec_taints(fork, m)).unwrap().kill_matrix();
            if km(true) != km(false) {
                return outcome(false, format!("{}: memo changes the kill matrix (fork={fork})", s.name));
            }
        }
    }
    let mut checked = 0;
    'outer: for s in corpus::subjects().into_iter().chain(fuzz.iter().cloned()) {
        let cal = calibrate(&s, DEFAULT_BUDGET_MULT).unwrap();
        for fork in [false, true] {
            for c in &cal {
                let cfg = EngineConfig { fork, memo: true, hit_samples: MEMO_SAMPLES, trace_stores: false };
                for h in run_test(&s.program, &c.test, c.budget, &cfg).hit_samples {
                    let ast = s.meta.mutant_ast(h.mutant);
                    let func = ast.function(&h.function).unwrap();
                    let env: BTreeMap<_, _> = func.params.iter().cloned().zip(h.args.iter().cloned()).collect();
                    let fresh = Evaluator::new(&ast, DEFAULT_STEP_CAP).run(&h.function, &env);
                    if fresh.value.as_ref() != Some(&h.value) {
                        return outcome(false, format!("{}: {}({:?}) under {} cached {:?}", s.name, h.function, h.args, h.mutant, h.value));
                    }
                    checked += 1;
                    if checked == MEMO_SAMPLES {
                        break 'outer;
                    }
                }
            }
        }
    }
    outcome(checked == MEMO_SAMPLES, format!("memo on/off identical; {checked}/{MEMO_SAMPLES} sampled hits match re-execution"))
}

fn determinism() -> Outcome {
    let render = || -> String { corpus::subjects().iter().map(|s| to_json(&compare(s, DEFAULT_SEED, DEFAULT_BUDGET_MULT).unwrap())).collect() };
    let (a, b) = (render(), render());
    outcome(a == b, format!("{} bytes of compare JSON, identical across runs", a.len()))
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if took > limit {
        o.pass = false;
        o.detail.push_str(&format!(" (over time limit {limit:?})"));
    }
    (o, took)
}

fn main() {
    let fuzz = fuzz_subjects();
    let results = [
        ("taint-rule conformance", timed(Duration::from_secs(1), taint_rules)),
        ("oracle equivalence", timed(Duration::from_secs(300), || oracle_equivalence(&fuzz))),
        ("cost monotonicity", timed(Duration::from_secs(300), cost_monotonicity)),
        ("reduction magnitude", timed(Duration::from_secs(60), reduction)),
        ("merge-back totality", timed(Duration::from_secs(300), || merge_back(&fuzz))),
        ("memo transparency and soundness", timed(Duration::from_secs(300), || memo(&fuzz))),
        ("determinism", timed(Duration::from_secs(300), determinism)),
    ];
    let mut failed = 0;
    for (i, (name, (o, took))) in results.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {}. {name}: {} [{:.2}s]", i + 1, o.detail, took.as_secs_f64());
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
