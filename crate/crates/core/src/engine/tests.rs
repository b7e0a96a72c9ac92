use super::*;
use crate::corpus;
use crate::lang::{Evaluator, PlainValue};
use crate::strategies::{calibrate, reconcile, run_strategy, Strategy, Subject};
use crate::verdict::KillCause;

fn modes() -> [EngineConfig; 4] {
    [(true, true), (true, false), (false, true), (false, false)]
        .map(|(fork, memo)| EngineConfig { fork, memo, ..EngineConfig::default() })
}

fn run(subject: &Subject, test: &str, cfg: EngineConfig) -> TestRun {
    let cal = calibrate(subject, 10).unwrap();
    let budget = cal.iter().find(|c| c.test == test).unwrap().budget;
    run_test(&subject.program, test, budget, &cfg)
}

fn agree(src: &str) -> Subject {
    let subject = Subject::parse("t", src).unwrap();
    let cal = calibrate(&subject, 10).unwrap();
    let runs: Vec<_> = Strategy::ALL.iter().map(|s| run_strategy(&subject, &cal, *s).unwrap()).collect();
    reconcile(&runs).unwrap();
    subject
}

fn tv(base: PlainValue, taints: &[(u32, PlainValue)]) -> TaintedValue {
    TaintedValue::from_entries(base, taints.iter().map(|(m, v)| (MutantId(*m), v.clone())))
}

#[test]
fn running_example_taints_on_a() {
    let subject = corpus::partitioned_process_curated();
    assert_eq!(subject.mutant_count(), 4);
    for cfg in modes() {
        let cfg = EngineConfig { trace_stores: true, ..cfg };
        let r = run(&subject, "test_process", cfg);
        assert!(r.outcome.is_pass());
        let a: Vec<&TaintedValue> =
            r.stores.iter().filter(|s| s.function == "partitioned_process" && s.variable == "a").map(|s| &s.value).collect();
        assert_eq!(a.len(), 3);
        // M1 computes 1 << 1 == 1 + 1 and is pruned.
        assert_eq!(*a[0], tv(PlainValue::Int(2), &[]));
        assert_eq!(*a[1], tv(PlainValue::Float(1.0), &[(2, PlainValue::Int(4)), (3, PlainValue::Int(4))]));
        assert_eq!(*a[2], tv(PlainValue::Float(0.5), &[(2, PlainValue::Int(6)), (3, PlainValue::Int(8))]));
        assert_eq!(a[1].to_string(), "{M0:1.0, M2:4, M3:4}");
    }
}

#[test]
fn only_the_branch_mutant_diverges() {
    let subject = corpus::partitioned_process_curated();
    for cfg in modes() {
        let r = run(&subject, "test_process", cfg);
        assert_eq!(r.events.len(), 1, "{cfg:?}");
        let e = r.events[0];
        assert_eq!(e.mutant, MutantId(4));
        assert!(e.decision);
        assert_eq!(r.contexts, 1);
        assert_eq!(r.unmerged_at_return, 0);
        // res does not depend on a, and process(0) is 0 either way.
        assert!(r.verdicts.iter().all(|v| *v == Verdict::Survived));
    }
}

#[test]
fn traditional_runs_original_plus_each_covered_mutant() {
    let subject = corpus::partitioned_process_curated();
    let cal = calibrate(&subject, 10).unwrap();
    let trad = run_strategy(&subject, &cal, Strategy::Traditional).unwrap();
    assert_eq!(trad.tests[0].contexts, 4);
}

#[test]
fn flipped_comparison_is_killed_by_assertion() {
    let subject = agree(corpus::TP1);
    let m = subject.meta.mutants.iter().find(|m| m.replacement == crate::lang::BinOp::Gt).unwrap().id;
    for cfg in modes() {
        let r = run(&subject, "test_f", cfg);
        assert_eq!(r.verdicts[m.index() - 1], Verdict::Killed(KillCause::Assertion));
    }
}

#[test]
fn no_mutants_is_a_plain_run() {
    let subject = agree("def f(x):\n  return x\n\ndef test_f():\n  assert f(3) == 3\n");
    let r = run(&subject, "test_f", EngineConfig::default());
    assert_eq!(r.program_stmts, 2);
    assert_eq!(r.infra_ops, 0);
    assert!(r.verdicts.is_empty() && r.events.is_empty());
}

#[test]
fn looping_mutants_time_out() {
    let src = "def count(n):\n  i = 0\n  while i < n:\n    i = i + 1\n  return i\n\ndef test_c():\n  assert count(5) == 5\n";
    let subject = agree(src);
    let r = run(&subject, "test_c", EngineConfig::default());
    let timeouts = r.verdicts.iter().filter(|v| **v == Verdict::Killed(KillCause::Timeout)).count();
    assert!(timeouts >= 2, "{:?}", r.verdicts);
}

#[test]
fn runaway_recursion_is_an_exception() {
    let src = "def down(n):\n  if n == 0:\n    return 0\n  return down(n - 1)\n\ndef test_d():\n  assert down(60) == 0\n";
    let subject = agree(src);
    let sub = subject.meta.mutants.iter().find(|m| m.replacement == crate::lang::BinOp::Add).unwrap().id;
    for cfg in modes() {
        let r = run(&subject, "test_d", cfg);
        assert_eq!(r.verdicts[sub.index() - 1], Verdict::Killed(KillCause::Exception));
    }
}

#[test]
fn short_circuit_operands_diverge() {
    let src = "def inside(x):\n  return x > 0 and x < 10\n\ndef test_i():\n  assert inside(5)\n  assert not inside(20)\n";
    let subject = agree(src);
    let r = run(&subject, "test_i", EngineConfig::default());
    assert!(!r.events.is_empty());
}

#[test]
fn memo_hits_match_fresh_execution() {
    let subject = corpus::find("prime").unwrap().subject();
    let cfg = EngineConfig { fork: false, memo: true, hit_samples: 200, trace_stores: false };
    let r = run(&subject, "test_primes", cfg);
    assert!(r.memo.hits > 0 && !r.hit_samples.is_empty());
    for s in &r.hit_samples {
        let ast = subject.meta.mutant_ast(s.mutant);
        let func = ast.function(&s.function).unwrap();
        let env = func.params.iter().cloned().zip(s.args.iter().cloned()).collect();
        let fresh = Evaluator::new(&ast, crate::lang::DEFAULT_STEP_CAP).run(&s.function, &env);
        assert_eq!(fresh.value.as_ref(), Some(&s.value), "{s:?}");
    }
}

#[test]
fn memo_is_transparent() {
    for p in corpus::CORPUS {
        let subject = p.subject();
        for fork in [true, false] {
            let on = run(&subject, &subject.tests[0], EngineConfig { fork, memo: true, ..EngineConfig::default() });
            let off = run(&subject, &subject.tests[0], EngineConfig { fork, memo: false, ..EngineConfig::default() });
            assert_eq!(on.verdicts, off.verdicts, "{}", p.name);
            assert!(on.program_stmts <= off.program_stmts, "{}", p.name);
        }
    }
}
