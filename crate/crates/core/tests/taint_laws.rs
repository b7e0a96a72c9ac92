use std::collections::BTreeMap;

use mutlab_core::lang::{ops, BinOp, PlainValue};
use mutlab_core::taint::{apply_binary, Applied};
use mutlab_core::{MutantId, TaintedValue};
use proptest::prelude::*;

const IDS: u32 = 6;

fn all_ops() -> Vec<BinOp> {
    BinOp::ARITHMETIC.iter().chain(BinOp::COMPARISON.iter()).copied().collect()
}

fn plain() -> impl Strategy<Value = PlainValue> {
    prop_oneof![
        4 => (-20i64..20).prop_map(PlainValue::Int),
        1 => prop::sample::select(vec![0.0, 0.5, -1.5, 2.0, 3.25]).prop_map(PlainValue::Float),
    ]
}

fn tainted() -> impl Strategy<Value = TaintedValue> {
    (plain(), prop::collection::btree_map(1..=IDS, plain(), 0..4))
        .prop_map(|(base, t)| TaintedValue::from_entries(base, t.into_iter().map(|(m, v)| (MutantId(m), v))))
}

fn op() -> impl Strategy<Value = BinOp> {
    prop::sample::select(all_ops())
}

/// Operator mutations on ids not tainting either input.
fn op_mutations(a: &TaintedValue, b: &TaintedValue, picks: &[(u32, BinOp)]) -> Vec<(MutantId, BinOp)> {
    let mut seen = BTreeMap::new();
    for &(m, o) in picks {
        let id = MutantId(m);
        if !a.taints().contains_key(&id) && !b.taints().contains_key(&id) {
            seen.entry(id).or_insert(o);
        }
    }
    seen.into_iter().collect()
}

/// What the result says about `m`: its value, or the error that killed it.
fn view(r: &Result<Applied, mutlab_core::ErrorKind>, m: MutantId) -> Option<Result<PlainValue, mutlab_core::ErrorKind>> {
    let r = r.as_ref().ok()?;
    Some(match r.kills.iter().find(|(k, _)| *k == m) {
        Some((_, e)) => Err(*e),
        None => Ok(r.value.get(m).clone()),
    })
}

fn without(v: &TaintedValue, m: MutantId) -> TaintedValue {
    let mut v = v.clone();
    v.retain(|k| k != m);
    v
}

proptest! {
    #[test]
    fn mutants_never_interact(
        a in tainted(), b in tainted(), o in op(),
        picks in prop::collection::vec((1..=IDS, op()), 0..3),
        i in 1..=IDS, noise in prop::collection::vec((1..=IDS, plain(), plain()), 1..4),
    ) {
        let muts = op_mutations(&a, &b, &picks);
        let before = apply_binary(&a, o, &muts, &b);
        let (mut a2, mut b2) = (a.clone(), b.clone());
        for (j, x, y) in noise {
            let j = MutantId(j);
            if j == MutantId(i) || muts.iter().any(|(m, _)| *m == j) {
                continue;
            }
            a2.set(j, x);
            b2.set(j, y);
        }
        let after = apply_binary(&a2, o, &muts, &b2);
        prop_assert_eq!(view(&before, MutantId(i)), view(&after, MutantId(i)));
    }

    #[test]
    fn entries_equal_to_the_original_are_redundant(
        a in tainted(), b in tainted(), o in op(), i in 1..=IDS,
    ) {
        let m = MutantId(i);
        let (mut a_full, mut b_full) = (a.clone(), b.clone());
        // Explicit entries equal to M0 are what the fallback supplies anyway.
        a_full.set(m, a.value().clone());
        b_full.set(m, b.value().clone());
        let full = apply_binary(&a_full, o, &[], &b_full);
        let pruned = apply_binary(&without(&a, m), o, &[], &without(&b, m));
        prop_assert_eq!(view(&full, m), view(&pruned, m));
    }

    #[test]
    fn results_only_carry_input_and_operator_taints(
        a in tainted(), b in tainted(), o in op(),
        picks in prop::collection::vec((1..=IDS, op()), 0..3),
    ) {
        let muts = op_mutations(&a, &b, &picks);
        if let Ok(r) = apply_binary(&a, o, &muts, &b) {
            for m in r.value.taints().keys() {
                prop_assert!(a.taints().contains_key(m) || b.taints().contains_key(m) || muts.iter().any(|(x, _)| x == m));
            }
        }
    }
}

#[test]
fn untainted_operands_match_the_plain_operator() {
    let values: Vec<PlainValue> =
        (-6i64..=6).map(PlainValue::Int).chain([-1.5, 0.0, 0.5, 2.0].map(PlainValue::Float)).collect();
    for o in all_ops() {
        for x in &values {
            for y in &values {
                let expected = ops::binary(o, x, y);
                let got = apply_binary(&TaintedValue::plain(x.clone()), o, &[], &TaintedValue::plain(y.clone()));
                match (expected, got) {
                    (Ok(e), Ok(g)) => {
                        assert_eq!(g.value, TaintedValue::plain(e), "{x:?} {o} {y:?}");
                        assert!(g.kills.is_empty() && g.evals == 0);
                    }
                    (Err(e), Err(g)) => assert_eq!(e, g),
                    (e, g) => panic!("{x:?} {o} {y:?}: {e:?} vs {g:?}"),
                }
            }
        }
    }
}
