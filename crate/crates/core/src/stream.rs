//! Baseline strategies that fork whole execution streams on a plain VM:
//! split-stream (one stream per mutant at the first arrival at its point)
//! and equivalence modulo states (one stream per distinct mutated value).

use std::collections::{BTreeSet, VecDeque};

use crate::bytecode::{Instr, Program};
use crate::lang::{ops, ErrorKind, PlainValue, TestOutcome, MAX_CALL_DEPTH};
use crate::memo::MemoStats;
use crate::mutagen::MutantId;
use crate::strategies::{outcome_verdict, AnalysisError, Calibration, Strategy, StrategyRun, Subject, TestReport};
use crate::verdict::{KillCause, Verdict};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Split,
    Modulo,
}

#[derive(Clone)]
struct Frame {
    func: u32,
    pc: usize,
    locals: Vec<Option<PlainValue>>,
    stack: Vec<PlainValue>,
    loc: crate::lang::Loc,
}

/// One execution stream standing for every mutant in `members`.
#[derive(Clone)]
struct Stream {
    frames: Vec<Frame>,
    members: BTreeSet<MutantId>,
    clock: u64,
}

impl Stream {
    fn top(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("stream has a frame")
    }

    fn pop(&mut self) -> PlainValue {
        self.top().stack.pop().expect("operand stack underflow")
    }

    fn fault(&self, kind: ErrorKind) -> TestOutcome {
        TestOutcome::RuntimeException { kind, loc: self.frames.last().map(|f| f.loc).unwrap_or_default() }
    }
}

struct Vm<'p> {
    prog: &'p Program,
    mode: Mode,
    budget: u64,
    queue: VecDeque<Stream>,
    verdicts: Vec<Option<Verdict>>,
    covered: Vec<bool>,
    original: Option<TestOutcome>,
    stmts: u64,
    infra: u64,
    contexts: u64,
}

impl<'p> Vm<'p> {
    fn settle(&mut self, members: impl IntoIterator<Item = MutantId>, outcome: &TestOutcome) {
        for m in members {
            if m.is_original() {
                self.original = Some(*outcome);
                continue;
            }
            let v = match outcome_verdict(outcome) {
                Verdict::Survived if !self.covered[m.index() - 1] => Verdict::NotCovered,
                v => v,
            };
            self.verdicts[m.index() - 1] = Some(v);
        }
    }

    fn run(&mut self, mut s: Stream) {
        let outcome = self.exec(&mut s);
        let members = std::mem::take(&mut s.members);
        self.settle(members, &outcome);
    }

    fn exec(&mut self, s: &mut Stream) -> TestOutcome {
        let prog = self.prog;
        loop {
            let fr = s.top();
            let instr = &prog.functions[fr.func as usize].code[fr.pc];
            fr.pc += 1;
            match instr {
                Instr::Stmt(loc) => {
                    fr.loc = *loc;
                    s.clock += 1;
                    self.stmts += 1;
                    if s.clock > self.budget {
                        return TestOutcome::Timeout;
                    }
                }
                Instr::Const(v) => fr.stack.push(v.clone()),
                Instr::Load(slot) => match &fr.locals[*slot as usize] {
                    Some(v) => {
                        let v = v.clone();
                        fr.stack.push(v);
                    }
                    None => return s.fault(ErrorKind::Name),
                },
                Instr::Store(slot) => {
                    let v = fr.stack.pop().expect("value to store");
                    fr.locals[*slot as usize] = Some(v);
                }
                Instr::Pop => {
                    fr.stack.pop();
                }
                Instr::Jump(t) => fr.pc = *t as usize,
                Instr::Unary(op) => {
                    let a = s.pop();
                    match ops::unary(*op, &a) {
                        Ok(v) => s.top().stack.push(v),
                        Err(k) => return s.fault(k),
                    }
                }
                Instr::Binary(op) => {
                    let b = s.pop();
                    let a = s.pop();
                    match ops::binary(*op, &a, &b) {
                        Ok(v) => s.top().stack.push(v),
                        Err(k) => return s.fault(k),
                    }
                }
                Instr::Choice(point) => {
                    let b = s.pop();
                    let a = s.pop();
                    if let Err(k) = self.choice(s, *point, &a, &b) {
                        return s.fault(k);
                    }
                    if s.members.is_empty() {
                        return TestOutcome::Pass;
                    }
                }
                Instr::Index => {
                    let i = s.pop();
                    let q = s.pop();
                    match ops::index(&q, &i) {
                        Ok(v) => s.top().stack.push(v),
                        Err(k) => return s.fault(k),
                    }
                }
                Instr::MakeList(n) => {
                    let stack = &mut fr.stack;
                    let items = stack.split_off(stack.len() - *n as usize);
                    stack.push(PlainValue::list(items));
                }
                Instr::Builtin { builtin, argc } => {
                    let stack = &mut fr.stack;
                    let args = stack.split_off(stack.len() - *argc as usize);
                    match builtin.call(&args) {
                        Ok(v) => s.top().stack.push(v),
                        Err(k) => return s.fault(k),
                    }
                }
                Instr::CallUnknown { .. } => return s.fault(ErrorKind::Name),
                Instr::Assert(loc) => {
                    let loc = *loc;
                    match ops::truth(&s.pop()) {
                        Err(k) => return s.fault(k),
                        Ok(false) => return TestOutcome::AssertionFailure { loc },
                        Ok(true) => {}
                    }
                }
                Instr::Cond { target, .. } => {
                    let target = *target as usize;
                    match ops::truth(&s.pop()) {
                        Err(k) => return s.fault(k),
                        Ok(true) => {}
                        Ok(false) => s.top().pc = target,
                    }
                }
                Instr::ScAnd { end, .. } | Instr::ScOr { end, .. } => {
                    let is_and = matches!(instr, Instr::ScAnd { .. });
                    let end = *end as usize;
                    match ops::truth(&s.pop()) {
                        Err(k) => return s.fault(k),
                        Ok(d) if d != is_and => {
                            let fr = s.top();
                            fr.stack.push(PlainValue::Bool(d));
                            fr.pc = end;
                        }
                        Ok(_) => {}
                    }
                }
                Instr::ScEnd => {
                    let v = s.pop();
                    if ops::truth(&v).is_err() {
                        return s.fault(ErrorKind::Type);
                    }
                    s.top().stack.push(v);
                }
                Instr::Call { func, argc } => {
                    let f = &prog.functions[*func as usize];
                    let stack = &mut fr.stack;
                    let args = stack.split_off(stack.len() - *argc as usize);
                    if args.len() != f.params as usize {
                        return s.fault(ErrorKind::Arity);
                    }
                    if s.frames.len() + 1 > MAX_CALL_DEPTH {
                        return s.fault(ErrorKind::Recursion);
                    }
                    let mut locals = vec![None; f.locals.len()];
                    for (slot, a) in locals.iter_mut().zip(args) {
                        *slot = Some(a);
                    }
                    let loc = s.top().loc;
                    s.frames.push(Frame { func: *func, pc: 0, locals, stack: Vec::new(), loc });
                }
                Instr::Return => {
                    let v = s.pop();
                    s.frames.pop();
                    match s.frames.last_mut() {
                        Some(parent) => parent.stack.push(v),
                        None => return TestOutcome::Pass,
                    }
                }
            }
        }
    }

    /// Evaluates a mutation point for every member, forking streams for
    /// members that must leave. Pushes the value of the members that stay.
    fn choice(&mut self, s: &mut Stream, point: u32, a: &PlainValue, b: &PlainValue) -> Result<(), ErrorKind> {
        let p = &self.prog.points[point as usize];
        let at_point: Vec<(MutantId, _)> = p.variants.iter().copied().filter(|(m, _)| s.members.contains(m)).collect();
        for (m, _) in &at_point {
            self.covered[m.index() - 1] = true;
        }
        if at_point.is_empty() {
            return ops::binary(p.original, a, b).map(|v| s.top().stack.push(v));
        }
        let rest: BTreeSet<MutantId> = s.members.iter().copied().filter(|m| !at_point.iter().any(|(x, _)| x == m)).collect();
        let mut groups: Vec<(PlainValue, BTreeSet<MutantId>)> = Vec::new();
        let mut base: Option<PlainValue> = None;
        if !rest.is_empty() {
            self.infra += 1;
            match ops::binary(p.original, a, b) {
                Ok(v) => {
                    base = Some(v.clone());
                    groups.push((v, rest));
                }
                Err(k) => {
                    if rest.iter().any(|m| m.is_original()) {
                        return Err(k);
                    }
                    self.kill_all(s, &rest, KillCause::Exception);
                }
            }
        }
        for (m, op) in at_point {
            self.infra += 1;
            match ops::binary(op, a, b) {
                Err(_) => self.kill_all(s, &BTreeSet::from([m]), KillCause::Exception),
                Ok(v) => match self.mode {
                    Mode::Modulo => match groups.iter_mut().find(|(g, _)| *g == v) {
                        Some((_, members)) => {
                            members.insert(m);
                        }
                        None => groups.push((v, BTreeSet::from([m]))),
                    },
                    Mode::Split => groups.push((v, BTreeSet::from([m]))),
                },
            }
        }
        if groups.is_empty() {
            s.members.clear();
            return Ok(());
        }
        // The group computing the original value stays; otherwise the one with the lowest member.
        let stay = match base {
            Some(_) => 0,
            None => (0..groups.len()).min_by_key(|&i| groups[i].1.first().copied()).expect("non-empty groups"),
        };
        let (value, members) = groups.swap_remove(stay);
        groups.sort_by_key(|(_, ms)| ms.first().copied());
        for (v, ms) in groups {
            let mut child = s.clone();
            child.members = ms;
            child.top().stack.push(v);
            self.contexts += 1;
            self.infra += 1;
            self.queue.push_back(child);
        }
        s.members = members;
        s.top().stack.push(value);
        Ok(())
    }

    fn kill_all(&mut self, s: &mut Stream, members: &BTreeSet<MutantId>, cause: KillCause) {
        for m in members {
            s.members.remove(m);
            if !m.is_original() {
                self.verdicts[m.index() - 1] = Some(Verdict::Killed(cause));
            }
        }
    }
}

fn run_streams(subject: &Subject, calibration: &[Calibration], mode: Mode) -> Result<StrategyRun, AnalysisError> {
    let strategy = if mode == Mode::Split { Strategy::SplitStream } else { Strategy::ModuloState };
    let prog = &subject.program;
    let n = prog.mutant_count();
    let tests = calibration
        .iter()
        .map(|cal| {
            let func = prog
                .function(&cal.test)
                .ok_or_else(|| AnalysisError::Inconsistent(format!("missing test {}", cal.test)))?;
            let f = &prog.functions[func as usize];
            let mut vm = Vm {
                prog,
                mode,
                budget: cal.budget,
                queue: VecDeque::new(),
                verdicts: vec![None; n],
                covered: vec![false; n],
                original: None,
                stmts: 0,
                infra: 0,
                contexts: 0,
            };
            let root = Stream {
                frames: vec![Frame { func, pc: 0, locals: vec![None; f.locals.len()], stack: Vec::new(), loc: Default::default() }],
                members: std::iter::once(MutantId::ORIGINAL).chain((1..=n as u32).map(MutantId)).collect(),
                clock: 0,
            };
            vm.run(root);
            while let Some(s) = vm.queue.pop_front() {
                vm.run(s);
            }
            if vm.original != Some(TestOutcome::Pass) {
                return Err(AnalysisError::Inconsistent(format!("{strategy}: original {} did not pass", cal.test)));
            }
            let verdicts = vm
                .verdicts
                .iter()
                .enumerate()
                .map(|(i, v)| v.ok_or_else(|| AnalysisError::Inconsistent(format!("{strategy}: M{} has no verdict", i + 1))))
                .collect::<Result<_, _>>()?;
            Ok(TestReport {
                test: cal.test.clone(),
                verdicts,
                program_stmts: vm.stmts,
                infra_ops: vm.infra,
                contexts: vm.contexts,
                memo: MemoStats::default(),
                hit_samples: Vec::new(),
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(StrategyRun { strategy, tests })
}

/// Forks one stream per mutant at the first arrival at its mutation point.
pub fn run_split_stream(subject: &Subject, calibration: &[Calibration]) -> Result<StrategyRun, AnalysisError> {
    run_streams(subject, calibration, Mode::Split)
}

/// Forks only mutants whose value at a mutation point differs, grouping equal values.
pub fn run_modulo_state(subject: &Subject, calibration: &[Calibration]) -> Result<StrategyRun, AnalysisError> {
    run_streams(subject, calibration, Mode::Modulo)
}
