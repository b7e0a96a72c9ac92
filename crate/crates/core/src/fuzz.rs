//! Grammar-bounded program generator for differential testing. Programs have
//! at most three functions and two loops with literal bounds, so the original
//! always terminates; the test asserts the value the original computes.

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lang::{eval_plain, parse_program, Evaluator, PlainValue};

const ARITH: [&str; 11] = ["+", "-", "*", "/", "%", "<<", ">>", "|", "^", "&", "//"];
const CMP: [&str; 6] = ["==", "!=", "<", "<=", ">", ">="];
const MAX_FUNCTIONS: usize = 3;
const MAX_LOOPS: usize = 2;
const MAX_ORIGINAL_STMTS: u64 = 5_000;

struct Gen {
    rng: ChaCha8Rng,
    loops_left: usize,
    out: String,
    /// Data-dependent loop bounds, recursion and sequences.
    wild: bool,
}

struct Scope {
    vars: Vec<String>,
    /// Functions callable from here, with their arity.
    callees: Vec<(String, usize)>,
    fresh: usize,
}

impl Gen {
    fn literal(&mut self) -> String {
        if self.rng.gen_bool(0.7) {
            self.rng.gen_range(0..10).to_string()
        } else {
            ["0.5", "1.5", "2.0", "2.5", "3.25"].choose(&mut self.rng).unwrap().to_string()
        }
    }

    fn expr(&mut self, scope: &Scope, depth: u32) -> String {
        let roll = if depth == 0 { self.rng.gen_range(0..2) } else { self.rng.gen_range(0..8) };
        match roll {
            0 => self.literal(),
            1 => scope.vars.choose(&mut self.rng).cloned().unwrap_or_else(|| self.literal()),
            2..=4 => {
                let op = *ARITH.choose(&mut self.rng).unwrap();
                format!("({} {op} {})", self.expr(scope, depth - 1), self.expr(scope, depth - 1))
            }
            5 if !scope.callees.is_empty() => {
                let (name, arity) = scope.callees.choose(&mut self.rng).cloned().unwrap();
                let args: Vec<String> = (0..arity).map(|_| self.expr(scope, depth - 1)).collect();
                format!("{name}({})", args.join(", "))
            }
            6 => {
                let f = *["abs", "min", "max"].choose(&mut self.rng).unwrap();
                if f == "abs" {
                    format!("abs({})", self.expr(scope, depth - 1))
                } else {
                    format!("{f}({}, {})", self.expr(scope, depth - 1), self.expr(scope, depth - 1))
                }
            }
            7 if self.wild => {
                let i = self.rng.gen_range(0..2);
                format!("[{}, {}][{i}]", self.expr(scope, depth - 1), self.atom(scope))
            }
            _ => format!("-{}", self.atom(scope)),
        }
    }

    fn atom(&mut self, scope: &Scope) -> String {
        match scope.vars.choose(&mut self.rng) {
            Some(v) if self.rng.gen_bool(0.6) => v.clone(),
            _ => self.rng.gen_range(1..10).to_string(),
        }
    }

    fn cond(&mut self, scope: &Scope) -> String {
        let op = *CMP.choose(&mut self.rng).unwrap();
        let c = format!("{} {op} {}", self.expr(scope, 1), self.expr(scope, 1));
        match self.rng.gen_range(0..6) {
            0 => format!("{c} and {}", self.cond_simple(scope)),
            1 => format!("{c} or {}", self.cond_simple(scope)),
            2 => format!("not ({c})"),
            _ => c,
        }
    }

    fn cond_simple(&mut self, scope: &Scope) -> String {
        let op = *CMP.choose(&mut self.rng).unwrap();
        format!("{} {op} {}", self.atom(scope), self.expr(scope, 1))
    }

    fn line(&mut self, indent: usize, text: &str) {
        let _ = writeln!(self.out, "{}{text}", "  ".repeat(indent));
    }

    fn block(&mut self, scope: &mut Scope, indent: usize, len: usize) {
        for _ in 0..len {
            self.stmt(scope, indent);
        }
    }

    fn stmt(&mut self, scope: &mut Scope, indent: usize) {
        let kinds = if indent > 3 { 5 } else { 10 };
        match self.rng.gen_range(0..kinds) {
            0..=3 => {
                let e = self.expr(scope, 2);
                let name = if !scope.vars.is_empty() && self.rng.gen_bool(0.4) {
                    scope.vars.choose(&mut self.rng).unwrap().clone()
                } else {
                    scope.fresh += 1;
                    format!("v{}", scope.fresh)
                };
                self.line(indent, &format!("{name} = {e}"));
                if !scope.vars.contains(&name) {
                    scope.vars.push(name);
                }
            }
            4 if !scope.vars.is_empty() => {
                let name = scope.vars.choose(&mut self.rng).unwrap().clone();
                let op = *["+", "-", "*"].choose(&mut self.rng).unwrap();
                let e = self.expr(scope, 1);
                self.line(indent, &format!("{name} {op}= {e}"));
            }
            5..=7 => {
                let c = self.cond(scope);
                self.line(indent, &format!("if {c}:"));
                let mut inner = Scope { vars: scope.vars.clone(), callees: scope.callees.clone(), fresh: scope.fresh };
                let n = self.rng.gen_range(1..3);
                self.block(&mut inner, indent + 1, n);
                scope.fresh = inner.fresh;
                if self.rng.gen_bool(0.5) {
                    self.line(indent, "else:");
                    let mut inner = Scope { vars: scope.vars.clone(), callees: scope.callees.clone(), fresh: scope.fresh };
                    self.block(&mut inner, indent + 1, 1);
                    scope.fresh = inner.fresh;
                }
            }
            _ if self.loops_left > 0 => {
                self.loops_left -= 1;
                scope.fresh += 1;
                let i = format!("i{}", scope.fresh);
                let bound = if self.wild {
                    format!("{} + {}", self.atom(scope), self.rng.gen_range(1..4))
                } else {
                    self.rng.gen_range(1..6).to_string()
                };
                self.line(indent, &format!("{i} = 0"));
                self.line(indent, &format!("while {i} < {bound}:"));
                // The counter is readable in the body but never reassigned there.
                let mut inner = Scope { vars: scope.vars.clone(), callees: scope.callees.clone(), fresh: scope.fresh };
                let n = self.rng.gen_range(1..3);
                self.block(&mut inner, indent + 1, n);
                inner.vars.push(i.clone());
                let e = self.expr(&inner, 1);
                self.line(indent + 1, &format!("acc = acc + {e}"));
                if self.wild {
                    self.line(indent + 1, &format!("{i} = {i} + 1"));
                } else {
                    self.line(indent + 1, &format!("{i} += 1"));
                }
                scope.fresh = inner.fresh;
            }
            _ => {
                let e = self.expr(scope, 2);
                self.line(indent, &format!("acc = acc + {e}"));
            }
        }
    }

    fn function(&mut self, name: &str, arity: usize, callees: &[(String, usize)]) {
        let params: Vec<String> = ["a", "b"][..arity].iter().map(|s| s.to_string()).collect();
        self.line(0, &format!("def {name}({}):", params.join(", ")));
        self.line(1, "acc = 0");
        let mut vars = params;
        vars.push("acc".into());
        let mut scope = Scope { vars, callees: callees.to_vec(), fresh: 0 };
        if let Some((prev, prev_arity)) = callees.last() {
            let args: Vec<String> = (0..*prev_arity).map(|_| self.expr(&scope, 1)).collect();
            self.line(1, &format!("acc = acc + {prev}({})", args.join(", ")));
        }
        let n = self.rng.gen_range(1..4);
        self.block(&mut scope, 1, n);
        let e = self.atom(&scope);
        self.line(1, &format!("return acc + {e}"));
        self.line(0, "");
        self.line(0, "");
    }

    fn program(&mut self) -> (String, usize) {
        self.out.clear();
        self.loops_left = MAX_LOOPS;
        let count = self.rng.gen_range(1..=MAX_FUNCTIONS);
        let mut defined: Vec<(String, usize)> = Vec::new();
        if self.wild && self.rng.gen_bool(0.5) {
            self.out.push_str("def r(n):\n  if n <= 0:\n    return 1\n  return n + r(n - 2)\n\n\n");
            defined.push(("r".into(), 1));
        }
        for k in 0..count {
            let name = format!("f{k}");
            let arity = self.rng.gen_range(1..=2);
            let callees = defined.clone();
            self.function(&name, arity, &callees);
            defined.push((name, arity));
        }
        let (entry, arity) = defined.last().cloned().unwrap();
        let args: Vec<String> = (0..arity).map(|_| self.rng.gen_range(0..8).to_string()).collect();
        (format!("{entry}({})", args.join(", ")), count)
    }
}

fn render_value(v: &PlainValue) -> Option<String> {
    match v {
        PlainValue::Int(i) if *i >= 0 => Some(i.to_string()),
        PlainValue::Int(i) => Some(format!("-{}", i.unsigned_abs())),
        PlainValue::Float(f) if f.is_finite() && *f >= 0.0 => Some(format!("{f:?}")),
        PlainValue::Float(f) if f.is_finite() => Some(format!("-{:?}", -f)),
        _ => None,
    }
}

/// Deterministic program for `seed`, whose `test_main` passes on the original.
pub fn fuzz_program(seed: u64) -> String {
    generate(seed, false)
}

/// Like [`fuzz_program`], but loop bounds depend on data, counters are
/// mutable and a recursive helper may appear, so mutants can time out or
/// recurse without bound.
pub fn fuzz_program_wild(seed: u64) -> String {
    generate(seed, true)
}

fn generate(seed: u64, wild: bool) -> String {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), loops_left: MAX_LOOPS, out: String::new(), wild };
    loop {
        let (call, _) = g.program();
        let mut src = std::mem::take(&mut g.out);
        let probe = format!("{src}def test_main():\n  return {call}\n");
        let Ok(ast) = parse_program(&probe) else { continue };
        let run = Evaluator::new(&ast, MAX_ORIGINAL_STMTS).run("test_main", &BTreeMap::new());
        if !run.outcome.is_pass() {
            continue;
        }
        let Some(expected) = run.value.as_ref().and_then(render_value) else { continue };
        let _ = write!(src, "def test_main():\n  assert {call} == {expected}\n");
        let ok = parse_program(&src).map(|ast| eval_plain(&ast, "test_main", &BTreeMap::new()).outcome.is_pass());
        if ok == Ok(true) {
            return src;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mutagen::discover_mutation_points;

    #[test]
    fn same_seed_same_text() {
        assert_eq!(fuzz_program(7), fuzz_program(7));
        assert_ne!(fuzz_program(7), fuzz_program(8));
    }

    #[test]
    fn seed_zero_is_golden() {
        assert_eq!(fuzz_program(0), include_str!("../tests/golden/fuzz_seed0.ml0"));
    }

    #[test]
    fn shape_bounds_hold() {
        for seed in 0..200 {
            let src = fuzz_program(seed);
            let ast = parse_program(&src).unwrap();
            assert!(ast.functions.len() <= MAX_FUNCTIONS + 1, "seed {seed}");
            assert!(src.matches("while ").count() <= MAX_LOOPS, "seed {seed}");
            assert_eq!(ast.tests(), vec!["test_main"]);
            assert!(eval_plain(&ast, "test_main", &BTreeMap::new()).outcome.is_pass(), "seed {seed}");
            let _ = discover_mutation_points(&ast);
        }
    }
}
