//! Values carrying per-mutant execution taints, and the transmission rules
//! that propagate them through operators.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::lang::ast::{BinOp, UnaryOp};
use crate::lang::{ops, ErrorKind, PlainValue};
use crate::mutagen::MutantId;

/// A plain value (the original program's, `M0`) plus the values other
/// mutants compute at the same place where they differ from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaintedValue {
    base: PlainValue,
    taints: BTreeMap<MutantId, PlainValue>,
}

impl From<PlainValue> for TaintedValue {
    fn from(v: PlainValue) -> Self {
        TaintedValue::plain(v)
    }
}

impl TaintedValue {
    pub fn plain(base: PlainValue) -> Self {
        TaintedValue { base, taints: BTreeMap::new() }
    }

    /// Builds a value from `M0`'s entry and other entries; entries equal to
    /// `M0`'s are dropped.
    pub fn from_entries(base: PlainValue, entries: impl IntoIterator<Item = (MutantId, PlainValue)>) -> Self {
        let mut v = TaintedValue::plain(base);
        for (m, x) in entries {
            v.set(m, x);
        }
        v
    }

    /// The original program's value.
    pub fn value(&self) -> &PlainValue {
        &self.base
    }

    pub fn into_value(self) -> PlainValue {
        self.base
    }

    /// Value seen by mutant `m`: its own entry, else `M0`'s.
    pub fn get(&self, m: MutantId) -> &PlainValue {
        self.taints.get(&m).unwrap_or(&self.base)
    }

    pub fn taints(&self) -> &BTreeMap<MutantId, PlainValue> {
        &self.taints
    }

    pub fn is_tainted(&self) -> bool {
        !self.taints.is_empty()
    }

    /// Installs `m`'s value; a value equal to `M0`'s removes the entry.
    pub fn set(&mut self, m: MutantId, v: PlainValue) {
        if m.is_original() {
            self.base = v;
        } else if v == self.base {
            self.taints.remove(&m);
        } else {
            self.taints.insert(m, v);
        }
    }

    pub fn retain(&mut self, mut keep: impl FnMut(MutantId) -> bool) {
        self.taints.retain(|m, _| keep(*m));
    }

    /// The same value as seen by `m`, with no taints.
    pub fn concretize(&self, m: MutantId) -> TaintedValue {
        TaintedValue::plain(self.get(m).clone())
    }
}

/// `taint_get(v, m)`: `m`'s entry if present, else the original value.
pub fn taint_get(v: &TaintedValue, m: MutantId) -> PlainValue {
    v.get(m).clone()
}

impl fmt::Display for TaintedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{M0:{}", self.base)?;
        for (m, v) in &self.taints {
            write!(f, ", {m}:{v}")?;
        }
        f.write_str("}")
    }
}

/// Result of applying an operation to tainted operands when the original
/// computation succeeded. Mutants whose own computation raised are listed in
/// `kills` and have no entry in `value`.
#[derive(Clone, Debug, PartialEq)]
pub struct Applied {
    pub value: TaintedValue,
    pub kills: Vec<(MutantId, ErrorKind)>,
    /// Per-mutant evaluations performed (excluding `M0`).
    pub evals: u64,
}

fn tainted_keys<'a>(inputs: impl IntoIterator<Item = &'a TaintedValue>, active: &impl Fn(MutantId) -> bool) -> BTreeSet<MutantId> {
    let mut keys = BTreeSet::new();
    for v in inputs {
        keys.extend(v.taints.keys().copied().filter(|m| active(*m)));
    }
    keys
}

/// Evaluates `f` for `M0` and for every active mutant tainting an input.
pub fn apply_pointwise(
    inputs: &[&TaintedValue],
    active: &impl Fn(MutantId) -> bool,
    f: impl Fn(&[&PlainValue]) -> Result<PlainValue, ErrorKind>,
) -> Result<Applied, ErrorKind> {
    let bases: Vec<&PlainValue> = inputs.iter().map(|v| &v.base).collect();
    let mut out = TaintedValue::plain(f(&bases)?);
    let mut kills = Vec::new();
    let keys = tainted_keys(inputs.iter().copied(), active);
    let evals = keys.len() as u64;
    for m in keys {
        let args: Vec<&PlainValue> = inputs.iter().map(|v| v.get(m)).collect();
        match f(&args) {
            Ok(x) => out.set(m, x),
            Err(k) => kills.push((m, k)),
        }
    }
    Ok(Applied { value: out, kills, evals })
}

/// Binary operation with operator mutations: a mutant listed in
/// `op_mutations` uses its own operator on its own view of the operands;
/// other tainted mutants use `op` on theirs.
pub fn apply_binary_among(
    a: &TaintedValue,
    op: BinOp,
    op_mutations: &[(MutantId, BinOp)],
    b: &TaintedValue,
    active: &impl Fn(MutantId) -> bool,
) -> Result<Applied, ErrorKind> {
    let mut out = TaintedValue::plain(ops::binary(op, &a.base, &b.base)?);
    let mut kills = Vec::new();
    let mut evals = 0;
    let mut apply = |m: MutantId, o: BinOp, out: &mut TaintedValue| {
        evals += 1;
        match ops::binary(o, a.get(m), b.get(m)) {
            Ok(x) => out.set(m, x),
            Err(k) => kills.push((m, k)),
        }
    };
    let mutated = |m: MutantId| op_mutations.iter().any(|(x, _)| *x == m);
    for m in tainted_keys([a, b], active) {
        if !mutated(m) {
            apply(m, op, &mut out);
        }
    }
    for &(m, o) in op_mutations {
        if active(m) {
            apply(m, o, &mut out);
        }
    }
    kills.sort();
    Ok(Applied { value: out, kills, evals })
}

/// [`apply_binary_among`] with every mutant considered active.
pub fn apply_binary(a: &TaintedValue, op: BinOp, op_mutations: &[(MutantId, BinOp)], b: &TaintedValue) -> Result<Applied, ErrorKind> {
    apply_binary_among(a, op, op_mutations, b, &|_| true)
}

pub fn apply_unary(op: UnaryOp, a: &TaintedValue) -> Result<Applied, ErrorKind> {
    apply_pointwise(&[a], &|_| true, |x| ops::unary(op, x[0]))
}

/// Mutants with an entry in any of `vs`.
pub fn active_taints(vs: &[TaintedValue]) -> BTreeSet<MutantId> {
    tainted_keys(vs, &|_| true)
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Partition {
    pub mainline: bool,
    /// Tainted mutants that take the same branch as the mainline.
    pub follow: BTreeSet<MutantId>,
    /// Tainted mutants that take the other branch.
    pub diverge: BTreeSet<MutantId>,
    /// Tainted mutants whose condition is not a boolean.
    pub kills: Vec<(MutantId, ErrorKind)>,
}

/// Splits the tainted mutants of a condition by the branch they take.
/// An error means the original's own condition is not a boolean.
pub fn partition_condition(c: &TaintedValue) -> Result<Partition, ErrorKind> {
    let mainline = ops::truth(&c.base)?;
    let mut p = Partition { mainline, ..Partition::default() };
    for (m, v) in &c.taints {
        match ops::truth(v) {
            Ok(d) if d == mainline => {
                p.follow.insert(*m);
            }
            Ok(_) => {
                p.diverge.insert(*m);
            }
            Err(k) => p.kills.push((*m, k)),
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use PlainValue::{Bool, Float, Int};

    fn tv(base: PlainValue, entries: &[(u32, PlainValue)]) -> TaintedValue {
        TaintedValue::from_entries(base, entries.iter().map(|(m, v)| (MutantId(*m), v.clone())))
    }

    #[test]
    fn fallback_law() {
        let v = tv(Int(1), &[(2, Int(4))]);
        assert_eq!(taint_get(&v, MutantId(2)), Int(4));
        assert_eq!(taint_get(&v, MutantId(7)), Int(1));
        assert_eq!(taint_get(&tv(Int(1), &[]), MutantId::ORIGINAL), Int(1));
    }

    #[test]
    fn rule_four_same_mutant() {
        let r = apply_binary(&tv(Int(1), &[(1, Int(2))]), BinOp::Add, &[], &tv(Int(3), &[(1, Int(4))])).unwrap();
        assert_eq!(r.value.to_string(), "{M0:4, M1:6}");
    }

    #[test]
    fn rule_seven_mutants_never_interact() {
        let r = apply_binary(&tv(Int(1), &[(1, Int(2))]), BinOp::Add, &[], &tv(Int(3), &[(2, Int(5))])).unwrap();
        assert_eq!(r.value.to_string(), "{M0:4, M1:5, M2:6}");
    }

    #[test]
    fn rule_three_operator_mutation() {
        let r = apply_binary(&tv(Int(1), &[]), BinOp::Add, &[(MutantId(1), BinOp::Sub)], &tv(Int(1), &[])).unwrap();
        assert_eq!(r.value.to_string(), "{M0:2, M1:0}");
    }

    #[test]
    fn rule_one_untainted() {
        let r = apply_binary(&tv(Int(5), &[]), BinOp::Mul, &[], &tv(Int(3), &[])).unwrap();
        assert_eq!(r.value.to_string(), "{M0:15}");
        assert_eq!(r.evals, 0);
    }

    #[test]
    fn rule_five_operator_and_data_taint() {
        // M1 both taints the operands (from an earlier loop iteration) and mutates the operator.
        let a = tv(Int(6), &[(1, Int(2))]);
        let b = tv(Int(3), &[]);
        let r = apply_binary(&a, BinOp::Add, &[(MutantId(1), BinOp::Mul)], &b).unwrap();
        assert_eq!(r.value.to_string(), "{M0:9, M1:6}");
    }

    #[test]
    fn running_example_choice() {
        let a = tv(Int(2), &[]);
        let two = tv(Int(2), &[]);
        let r = apply_binary(&a, BinOp::Div, &[(MutantId(2), BinOp::Add), (MutantId(3), BinOp::Mul)], &two).unwrap();
        assert_eq!(r.value, tv(Float(1.0), &[(2, Int(4)), (3, Int(4))]));
        let none = apply_binary_among(&a, BinOp::Div, &[(MutantId(2), BinOp::Add)], &two, &|_| false).unwrap();
        assert_eq!(none.value.to_string(), "{M0:1.0}");
    }

    #[test]
    fn exceptions_are_per_mutant() {
        let zero = tv(Int(0), &[]);
        let one = tv(Int(1), &[]);
        assert_eq!(apply_binary(&one, BinOp::Div, &[(MutantId(5), BinOp::Add)], &zero), Err(ErrorKind::ZeroDivision));
        let r = apply_binary(&one, BinOp::Add, &[(MutantId(5), BinOp::FloorDiv)], &zero).unwrap();
        assert_eq!(r.value.to_string(), "{M0:1}");
        assert_eq!(r.kills, vec![(MutantId(5), ErrorKind::ZeroDivision)]);
    }

    #[test]
    fn unary_pointwise() {
        let r = apply_unary(UnaryOp::Neg, &tv(Int(1), &[(1, Int(2))])).unwrap();
        assert_eq!(r.value.to_string(), "{M0:-1, M1:-2}");
        let r = apply_unary(UnaryOp::Not, &tv(Bool(true), &[])).unwrap();
        assert_eq!(r.value.to_string(), "{M0:False}");
        let r = apply_unary(UnaryOp::Neg, &tv(Int(1), &[(3, Int(i64::MIN))])).unwrap();
        assert_eq!(r.value.to_string(), "{M0:-1}");
        assert_eq!(r.kills, vec![(MutantId(3), ErrorKind::Overflow)]);
    }

    #[test]
    fn active_taint_sets() {
        let vs = [tv(Int(1), &[(2, Int(4))]), tv(Int(3), &[(3, Int(9))])];
        assert_eq!(active_taints(&vs), BTreeSet::from([MutantId(2), MutantId(3)]));
        assert!(active_taints(&[tv(Int(1), &[])]).is_empty());
        assert!(active_taints(&[]).is_empty());
    }

    #[test]
    fn condition_partition() {
        let p = partition_condition(&tv(Bool(true), &[(4, Bool(false))])).unwrap();
        assert!(p.mainline);
        assert_eq!(p.diverge, BTreeSet::from([MutantId(4)]));
        assert!(p.follow.is_empty());
        // An entry equal to M0's is pruned, so M2 follows by fallback.
        let p = partition_condition(&tv(Bool(true), &[(2, Bool(true))])).unwrap();
        assert!(p.diverge.is_empty() && p.follow.is_empty());
        let p = partition_condition(&tv(Bool(false), &[])).unwrap();
        assert!(!p.mainline && p.diverge.is_empty());
        let p = partition_condition(&tv(Bool(true), &[(1, Int(1))])).unwrap();
        assert_eq!(p.kills, vec![(MutantId(1), ErrorKind::Type)]);
        assert_eq!(partition_condition(&tv(Int(0), &[])), Err(ErrorKind::Type));
    }
}
