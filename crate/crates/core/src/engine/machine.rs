use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{DivergenceEvent, EngineConfig, HitSample, StoreEvent, TestRun};
use crate::bytecode::{Instr, Program};
use crate::lang::{ops, ErrorKind, Loc, PlainValue, TestOutcome, MAX_CALL_DEPTH};
use crate::memo::{CallKey, Memo, MemoEntry};
use crate::mutagen::MutantId;
use crate::taint::{apply_binary_among, apply_pointwise, partition_condition, Applied, TaintedValue};
use crate::verdict::{KillCause, Verdict};

enum Fault {
    Assertion(Loc),
    Runtime(ErrorKind, Loc),
    Timeout,
}

impl Fault {
    fn cause(&self) -> KillCause {
        match self {
            Fault::Assertion(_) => KillCause::Assertion,
            Fault::Runtime(..) => KillCause::Exception,
            Fault::Timeout => KillCause::Timeout,
        }
    }
}

struct Frame {
    func: u32,
    pc: usize,
    locals: Vec<Option<TaintedValue>>,
    stack: Vec<TaintedValue>,
    loc: Loc,
    args: Vec<TaintedValue>,
    entry_clock: u64,
    entry_offsets: BTreeMap<MutantId, i64>,
    pending: Vec<Pending>,
    /// Mutation points evaluated within this call (tracked only with memo on).
    touched: BTreeSet<u32>,
    /// Deepest absolute call depth reached within this call.
    max_depth: usize,
}

enum Pending {
    Child(Box<Child>),
    Wounded(MutantId),
}

impl Pending {
    fn mutant(&self) -> MutantId {
        match self {
            Pending::Child(c) => c.mutant,
            Pending::Wounded(m) => *m,
        }
    }
}

struct Child {
    mutant: MutantId,
    ctx: Context,
    /// Points the mutant evaluated in the function before it diverged.
    prefix_touched: BTreeSet<u32>,
}

struct Context {
    frames: Vec<Frame>,
    /// Semantics this context executes: `M0` at the root, the diverged mutant elsewhere.
    mainline: MutantId,
    /// Mutants riding along as taints (root context only).
    riders: BTreeSet<MutantId>,
    /// Standalone statement count of each rider minus `clock`, when nonzero.
    offsets: BTreeMap<MutantId, i64>,
    max_offset: i64,
    /// Standalone statement count of the mainline so far.
    clock: u64,
    /// Call depth of the caller of `frames[0]`.
    base_depth: usize,
    root: bool,
}

impl Context {
    fn top(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("context has a frame")
    }

    fn pop(&mut self) -> TaintedValue {
        self.top().stack.pop().expect("operand stack underflow")
    }

    fn pop_n(&mut self, n: usize) -> Vec<TaintedValue> {
        let stack = &mut self.top().stack;
        stack.split_off(stack.len() - n)
    }

    fn push(&mut self, v: TaintedValue) {
        self.top().stack.push(v);
    }

    fn offset(&self, m: MutantId) -> i64 {
        self.offsets.get(&m).copied().unwrap_or(0)
    }

    fn set_offset(&mut self, m: MutantId, off: i64) {
        if off == 0 {
            self.offsets.remove(&m);
        } else {
            self.offsets.insert(m, off);
        }
        self.max_offset = self.offsets.values().copied().max().unwrap_or(0);
    }

    fn drop_rider(&mut self, m: MutantId) {
        self.riders.remove(&m);
        if self.offsets.remove(&m).is_some() {
            self.max_offset = self.offsets.values().copied().max().unwrap_or(0);
        }
    }

    fn fault(&self, kind: ErrorKind) -> Fault {
        Fault::Runtime(kind, self.frames.last().map(|f| f.loc).unwrap_or_default())
    }

    /// Depth a frame pushed now would have.
    fn next_depth(&self) -> usize {
        self.base_depth + self.frames.len() + 1
    }
}

struct Finished {
    value: TaintedValue,
    touched: BTreeSet<u32>,
    max_depth: usize,
}

fn key_for(func: u32, args: &[TaintedValue], m: MutantId) -> CallKey {
    CallKey { func, args: args.iter().map(|a| a.get(m).clone()).collect() }
}

pub(super) struct Machine<'p> {
    prog: &'p Program,
    fork: bool,
    budget: u64,
    memo: Memo,
    killed: Vec<Option<KillCause>>,
    covered: BTreeSet<u32>,
    unmerged: usize,
    executed: u64,
    infra: u64,
    contexts: u64,
    events: Vec<DivergenceEvent>,
    unmerged_at_return: u64,
    sample_limit: usize,
    samples: Vec<HitSample>,
    trace: bool,
    stores: Vec<StoreEvent>,
}

impl<'p> Machine<'p> {
    pub(super) fn new(prog: &'p Program, budget: u64, cfg: &EngineConfig) -> Self {
        let n = prog.mutant_count();
        let points: Arc<[u32]> = (1..=n as u32).map(|i| prog.point_of(MutantId(i)).unwrap_or(0)).collect();
        Machine {
            prog,
            fork: cfg.fork,
            budget,
            memo: Memo::new(cfg.memo, points),
            killed: vec![None; n],
            covered: BTreeSet::new(),
            unmerged: 0,
            executed: 0,
            infra: 0,
            contexts: 0,
            events: Vec::new(),
            unmerged_at_return: 0,
            sample_limit: cfg.hit_samples,
            samples: Vec::new(),
            trace: cfg.trace_stores,
            stores: Vec::new(),
        }
    }

    pub(super) fn run(mut self, test: &str) -> TestRun {
        let n = self.prog.mutant_count();
        let outcome = match self.prog.function(test) {
            None => TestOutcome::RuntimeException { kind: ErrorKind::Name, loc: Loc::default() },
            Some(func) if self.prog.functions[func as usize].params != 0 => {
                TestOutcome::RuntimeException { kind: ErrorKind::Arity, loc: Loc::default() }
            }
            Some(func) => {
                let mut ctx = Context {
                    frames: Vec::new(),
                    mainline: MutantId::ORIGINAL,
                    riders: (1..=n as u32).map(MutantId).collect(),
                    offsets: BTreeMap::new(),
                    max_offset: 0,
                    clock: 0,
                    base_depth: 0,
                    root: true,
                };
                let frame = self.new_frame(&ctx, func, Vec::new());
                ctx.frames.push(frame);
                match self.exec(&mut ctx) {
                    Ok(_) => {
                        for m in 1..=n as u32 {
                            let m = MutantId(m);
                            if !ctx.riders.contains(&m) && self.killed[m.index() - 1].is_none() {
                                self.unmerged_at_return += 1;
                            }
                        }
                        TestOutcome::Pass
                    }
                    Err(Fault::Assertion(loc)) => TestOutcome::AssertionFailure { loc },
                    Err(Fault::Runtime(kind, loc)) => TestOutcome::RuntimeException { kind, loc },
                    Err(Fault::Timeout) => TestOutcome::Timeout,
                }
            }
        };
        let verdicts = (0..n)
            .map(|i| match self.killed[i] {
                Some(cause) => Verdict::Killed(cause),
                None => {
                    let point = self.prog.point_of(MutantId(i as u32 + 1)).expect("mutant has a point");
                    if self.covered.contains(&point) {
                        Verdict::Survived
                    } else {
                        Verdict::NotCovered
                    }
                }
            })
            .collect();
        TestRun {
            test: test.to_string(),
            outcome,
            verdicts,
            program_stmts: self.executed,
            infra_ops: self.infra,
            memo: self.memo.stats,
            contexts: self.contexts,
            events: self.events,
            unmerged_at_return: self.unmerged_at_return,
            hit_samples: self.samples,
            stores: self.stores,
        }
    }

    fn new_frame(&self, ctx: &Context, func: u32, args: Vec<TaintedValue>) -> Frame {
        let f = &self.prog.functions[func as usize];
        let mut locals = vec![None; f.locals.len()];
        for (slot, a) in locals.iter_mut().zip(&args) {
            *slot = Some(a.clone());
        }
        Frame {
            func,
            pc: 0,
            locals,
            stack: Vec::new(),
            loc: ctx.frames.last().map(|f| f.loc).unwrap_or_default(),
            args,
            entry_clock: ctx.clock,
            entry_offsets: if ctx.root { ctx.offsets.clone() } else { BTreeMap::new() },
            pending: Vec::new(),
            touched: BTreeSet::new(),
            max_depth: ctx.next_depth(),
        }
    }

    fn kill(&mut self, ctx: &mut Context, m: MutantId, cause: KillCause) {
        ctx.drop_rider(m);
        let slot = &mut self.killed[m.index() - 1];
        if slot.is_none() {
            *slot = Some(cause);
        }
    }

    fn absorb(&mut self, ctx: &mut Context, applied: Applied) -> TaintedValue {
        self.infra += applied.evals;
        for (m, _) in applied.kills {
            self.kill(ctx, m, KillCause::Exception);
        }
        applied.value
    }

    fn tick(&mut self, ctx: &mut Context) -> Result<(), Fault> {
        ctx.clock += 1;
        self.executed += 1;
        if ctx.clock > self.budget {
            return Err(Fault::Timeout);
        }
        if ctx.max_offset > 0 && ctx.clock as i64 + ctx.max_offset > self.budget as i64 {
            self.kill_over_budget(ctx);
        }
        Ok(())
    }

    fn kill_over_budget(&mut self, ctx: &mut Context) {
        let over: Vec<MutantId> = ctx
            .offsets
            .iter()
            .filter(|(_, off)| ctx.clock as i64 + **off > self.budget as i64)
            .map(|(m, _)| *m)
            .collect();
        for m in over {
            self.kill(ctx, m, KillCause::Timeout);
        }
    }

    fn exec(&mut self, ctx: &mut Context) -> Result<Finished, Fault> {
        let prog = self.prog;
        let trace = self.trace && ctx.root;
        loop {
            let fr = ctx.top();
            let instr = &prog.functions[fr.func as usize].code[fr.pc];
            fr.pc += 1;
            match instr {
                Instr::Stmt(loc) => {
                    fr.loc = *loc;
                    self.tick(ctx)?;
                }
                Instr::Const(v) => fr.stack.push(TaintedValue::plain(v.clone())),
                Instr::Load(slot) => match &fr.locals[*slot as usize] {
                    Some(v) => {
                        let v = v.clone();
                        fr.stack.push(v);
                    }
                    None => return Err(ctx.fault(ErrorKind::Name)),
                },
                Instr::Store(slot) => {
                    let v = fr.stack.pop().expect("value to store");
                    if trace {
                        let f = &prog.functions[fr.func as usize];
                        self.stores.push(StoreEvent {
                            function: f.name.clone(),
                            variable: f.locals[*slot as usize].clone(),
                            loc: fr.loc,
                            value: v.clone(),
                        });
                    }
                    fr.locals[*slot as usize] = Some(v);
                }
                Instr::Pop => {
                    fr.stack.pop();
                }
                Instr::Jump(t) => fr.pc = *t as usize,
                Instr::Unary(op) => {
                    let a = ctx.pop();
                    let r = apply_pointwise(&[&a], &|m| ctx.riders.contains(&m), |x| ops::unary(*op, x[0]));
                    self.push_result(ctx, r)?;
                }
                Instr::Binary(op) => {
                    let b = ctx.pop();
                    let a = ctx.pop();
                    let r = apply_binary_among(&a, *op, &[], &b, &|m| ctx.riders.contains(&m));
                    self.push_result(ctx, r)?;
                }
                Instr::Choice(point) => {
                    let b = ctx.pop();
                    let a = ctx.pop();
                    self.choice(ctx, *point, a, b)?;
                }
                Instr::Index => {
                    let i = ctx.pop();
                    let s = ctx.pop();
                    let r = apply_pointwise(&[&s, &i], &|m| ctx.riders.contains(&m), |x| ops::index(x[0], x[1]));
                    self.push_result(ctx, r)?;
                }
                Instr::MakeList(n) => {
                    let items = ctx.pop_n(*n as usize);
                    let refs: Vec<&TaintedValue> = items.iter().collect();
                    let r = apply_pointwise(&refs, &|m| ctx.riders.contains(&m), |x| {
                        Ok(PlainValue::list(x.iter().map(|v| (*v).clone()).collect()))
                    });
                    self.push_result(ctx, r)?;
                }
                Instr::Builtin { builtin, argc } => {
                    let args = ctx.pop_n(*argc as usize);
                    let refs: Vec<&TaintedValue> = args.iter().collect();
                    let r = apply_pointwise(&refs, &|m| ctx.riders.contains(&m), |x| {
                        let owned: Vec<PlainValue> = x.iter().map(|v| (*v).clone()).collect();
                        builtin.call(&owned)
                    });
                    self.push_result(ctx, r)?;
                }
                Instr::CallUnknown { argc } => {
                    ctx.pop_n(*argc as usize);
                    return Err(ctx.fault(ErrorKind::Name));
                }
                Instr::Assert(loc) => {
                    let loc = *loc;
                    let v = ctx.pop();
                    match ops::truth(v.value()) {
                        Err(k) => return Err(ctx.fault(k)),
                        Ok(false) => return Err(Fault::Assertion(loc)),
                        Ok(true) => {}
                    }
                    let verdicts: Vec<(MutantId, KillCause)> = v
                        .taints()
                        .iter()
                        .filter(|(m, _)| ctx.riders.contains(m))
                        .filter_map(|(m, x)| match ops::truth(x) {
                            Ok(true) => None,
                            Ok(false) => Some((*m, KillCause::Assertion)),
                            Err(_) => Some((*m, KillCause::Exception)),
                        })
                        .collect();
                    for (m, cause) in verdicts {
                        self.kill(ctx, m, cause);
                    }
                }
                Instr::Cond { site, target } => {
                    let (site, target) = (*site, *target as usize);
                    let c = ctx.pop();
                    let taken = self.branch(ctx, &c)?;
                    let fall = ctx.top().pc;
                    let (main_pc, other_pc) = if taken { (fall, target) } else { (target, fall) };
                    ctx.top().pc = main_pc;
                    self.diverge(ctx, &c, taken, site, other_pc, None);
                }
                Instr::ScAnd { site, end } | Instr::ScOr { site, end } => {
                    let is_and = matches!(instr, Instr::ScAnd { .. });
                    let (site, end) = (*site, *end as usize);
                    let a = ctx.pop();
                    let d = self.branch(ctx, &a)?;
                    let rhs = ctx.top().pc;
                    // The operand short-circuits when it is false for `and`, true for `or`.
                    let short = d != is_and;
                    if short {
                        ctx.top().pc = end;
                        ctx.push(TaintedValue::plain(PlainValue::Bool(d)));
                        self.diverge(ctx, &a, d, site, rhs, None);
                    } else {
                        self.diverge(ctx, &a, d, site, end, Some(PlainValue::Bool(!d)));
                    }
                }
                Instr::ScEnd => {
                    let v = ctx.pop();
                    if ops::truth(v.value()).is_err() {
                        return Err(ctx.fault(ErrorKind::Type));
                    }
                    let bad: Vec<MutantId> = v
                        .taints()
                        .iter()
                        .filter(|(m, x)| ctx.riders.contains(m) && ops::truth(x).is_err())
                        .map(|(m, _)| *m)
                        .collect();
                    for m in bad {
                        self.kill(ctx, m, KillCause::Exception);
                    }
                    ctx.push(v);
                }
                Instr::Call { func, argc } => {
                    let args = ctx.pop_n(*argc as usize);
                    self.call(ctx, *func, args)?;
                }
                Instr::Return => {
                    let v = ctx.pop();
                    if let Some(done) = self.finish(ctx, v)? {
                        return Ok(done);
                    }
                }
            }
        }
    }

    fn push_result(&mut self, ctx: &mut Context, r: Result<Applied, ErrorKind>) -> Result<(), Fault> {
        match r {
            Ok(applied) => {
                let v = self.absorb(ctx, applied);
                ctx.push(v);
                Ok(())
            }
            Err(k) => Err(ctx.fault(k)),
        }
    }

    fn choice(&mut self, ctx: &mut Context, point: u32, a: TaintedValue, b: TaintedValue) -> Result<(), Fault> {
        let p = &self.prog.points[point as usize];
        if self.memo.enabled {
            ctx.top().touched.insert(point);
        }
        if ctx.root {
            self.covered.insert(point);
        }
        let r = if ctx.riders.is_empty() {
            let op = self.prog.op_for(point, ctx.mainline);
            ops::binary(op, a.value(), b.value()).map(|v| Applied { value: TaintedValue::plain(v), kills: Vec::new(), evals: 0 })
        } else {
            let muts: Vec<_> = p.variants.iter().copied().filter(|(m, _)| ctx.riders.contains(m)).collect();
            apply_binary_among(&a, p.original, &muts, &b, &|m| ctx.riders.contains(&m))
        };
        self.push_result(ctx, r)
    }

    /// Mainline decision of a condition; riders with a non-boolean condition are killed.
    fn branch(&mut self, ctx: &mut Context, c: &TaintedValue) -> Result<bool, Fault> {
        let part = partition_condition(c).map_err(|k| ctx.fault(k))?;
        for (m, _) in part.kills {
            if ctx.riders.contains(&m) {
                self.kill(ctx, m, KillCause::Exception);
            }
        }
        Ok(part.mainline)
    }

    /// Moves every rider whose decision on `c` differs from `mainline` out of
    /// the context. A forked child resumes at `resume` with `push` on its stack.
    fn diverge(&mut self, ctx: &mut Context, c: &TaintedValue, mainline: bool, site: Loc, resume: usize, push: Option<PlainValue>) {
        let diverging: Vec<MutantId> = c
            .taints()
            .iter()
            .filter(|(m, v)| ctx.riders.contains(m) && v.as_bool() == Some(!mainline))
            .map(|(m, _)| *m)
            .collect();
        for m in diverging {
            self.events.push(DivergenceEvent { site, mutant: m, decision: !mainline });
            self.infra += 1;
            let pending = if self.fork {
                Pending::Child(Box::new(self.fork_child(ctx, m, resume, push.clone())))
            } else {
                Pending::Wounded(m)
            };
            ctx.top().pending.push(pending);
            ctx.drop_rider(m);
            self.unmerged += 1;
        }
    }

    fn fork_child(&mut self, ctx: &Context, m: MutantId, resume: usize, push: Option<PlainValue>) -> Child {
        let fr = ctx.frames.last().expect("frame");
        let mut stack: Vec<TaintedValue> = fr.stack.iter().map(|v| v.concretize(m)).collect();
        stack.extend(push.map(TaintedValue::plain));
        let frame = Frame {
            func: fr.func,
            pc: resume,
            locals: fr.locals.iter().map(|l| l.as_ref().map(|v| v.concretize(m))).collect(),
            stack,
            loc: fr.loc,
            args: fr.args.iter().map(|v| v.concretize(m)).collect(),
            entry_clock: 0,
            entry_offsets: BTreeMap::new(),
            pending: Vec::new(),
            touched: BTreeSet::new(),
            max_depth: fr.max_depth,
        };
        self.contexts += 1;
        Child {
            mutant: m,
            prefix_touched: fr.touched.clone(),
            ctx: Context {
                frames: vec![frame],
                mainline: m,
                riders: BTreeSet::new(),
                offsets: BTreeMap::new(),
                max_offset: 0,
                clock: (ctx.clock as i64 + ctx.offset(m)) as u64,
                base_depth: ctx.base_depth + ctx.frames.len() - 1,
                root: false,
            },
        }
    }

    fn record_sample(&mut self, func: u32, key: &CallKey, m: MutantId, value: &PlainValue) {
        if self.samples.len() < self.sample_limit {
            self.samples.push(HitSample {
                function: self.prog.functions[func as usize].name.clone(),
                args: key.args.clone(),
                mutant: m,
                value: value.clone(),
            });
        }
    }

    fn call(&mut self, ctx: &mut Context, func: u32, args: Vec<TaintedValue>) -> Result<(), Fault> {
        if args.len() != self.prog.functions[func as usize].params as usize {
            return Err(ctx.fault(ErrorKind::Arity));
        }
        let depth = ctx.next_depth();
        if depth > MAX_CALL_DEPTH {
            return Err(ctx.fault(ErrorKind::Recursion));
        }
        if self.memo.enabled && !self.memo.is_empty() && self.memo_call(ctx, func, &args, depth)? {
            return Ok(());
        }
        let frame = self.new_frame(ctx, func, args);
        ctx.frames.push(frame);
        Ok(())
    }

    /// Answers a call from the memo cache when the mainline and every rider hit.
    fn memo_call(&mut self, ctx: &mut Context, func: u32, args: &[TaintedValue], depth: usize) -> Result<bool, Fault> {
        let fits = |e: &MemoEntry| depth + e.depth - 1 <= MAX_CALL_DEPTH;
        let key0 = key_for(func, args, ctx.mainline);
        self.infra += 1;
        let Some(e0) = self.memo.memo_lookup(&key0, ctx.mainline).filter(|e| fits(e)).cloned() else {
            self.memo.stats.misses += 1;
            return Ok(false);
        };
        let shared = self.memo.mutations().points(&key0);
        let mut own: Vec<(MutantId, CallKey, MemoEntry)> = Vec::new();
        for &r in &ctx.riders {
            if args.iter().any(|a| a.taints().contains_key(&r)) {
                let key = key_for(func, args, r);
                self.infra += 1;
                match self.memo.memo_lookup(&key, r).filter(|e| fits(e)) {
                    Some(e) => own.push((r, key, e.clone())),
                    None => {
                        self.memo.stats.misses += 1;
                        return Ok(false);
                    }
                }
            } else if let (Some(p), Some(s)) = (self.prog.point_of(r), shared) {
                if s.contains(&p) {
                    self.memo.stats.misses += 1;
                    return Ok(false);
                }
            }
        }
        self.memo.stats.hits += 1;
        if ctx.clock + e0.cost > self.budget {
            return Err(Fault::Timeout);
        }
        self.record_sample(func, &key0, ctx.mainline, &e0.value);
        let mut value = TaintedValue::plain(e0.value.clone());
        let mut max_depth = depth + e0.depth - 1;
        let mut touched: BTreeSet<u32> = e0.touched.iter().copied().collect();
        if ctx.root {
            self.covered.extend(e0.touched.iter().copied());
        }
        ctx.clock += e0.cost;
        for (r, key, e) in own {
            self.record_sample(func, &key, r, &e.value);
            value.set(r, e.value.clone());
            let off = ctx.offset(r) + e.cost as i64 - e0.cost as i64;
            ctx.set_offset(r, off);
            max_depth = max_depth.max(depth + e.depth - 1);
            touched.extend(e.touched.iter().copied());
        }
        let others: Vec<MutantId> = ctx.offsets.keys().copied().collect();
        for r in others {
            // Riders sharing the mainline's key shifted along with the clock.
            if !value.taints().contains_key(&r) && ctx.clock as i64 + ctx.offset(r) > self.budget as i64 {
                self.kill(ctx, r, KillCause::Timeout);
            }
        }
        self.kill_over_budget(ctx);
        let fr = ctx.top();
        fr.touched.extend(touched);
        fr.max_depth = fr.max_depth.max(max_depth);
        ctx.push(value);
        Ok(true)
    }

    /// Returns from the top frame: merges diverged mutants, stores memo
    /// entries, and hands the value to the caller.
    fn finish(&mut self, ctx: &mut Context, mut v: TaintedValue) -> Result<Option<Finished>, Fault> {
        let mut frame = ctx.frames.pop().expect("frame to return from");
        let depth = ctx.next_depth();
        let pending = std::mem::take(&mut frame.pending);
        let merged = pending.len();
        if merged > 0 {
            let mut pending = pending;
            pending.sort_by_key(Pending::mutant);
            let ids: Vec<MutantId> = pending.iter().map(Pending::mutant).collect();
            for p in pending {
                self.merge(ctx, &mut frame, depth, &mut v, p);
            }
            for m in ids {
                if !ctx.riders.contains(&m) && self.killed[m.index() - 1].is_none() {
                    self.unmerged_at_return += 1;
                }
            }
        }
        let is_base = ctx.frames.is_empty();
        if self.memo.enabled && self.unmerged > 0 && (ctx.root || !is_base) {
            self.store_frame(ctx, &frame, depth, &v);
        }
        if merged > 0 {
            self.unmerged -= merged;
            if self.memo.clear_if_all_merged(self.unmerged) {
                self.infra += 1;
            }
        }
        match ctx.frames.last_mut() {
            Some(parent) => {
                parent.max_depth = parent.max_depth.max(frame.max_depth);
                if self.memo.enabled {
                    parent.touched.extend(frame.touched.iter().copied());
                }
                parent.stack.push(v);
                Ok(None)
            }
            None => Ok(Some(Finished { value: v, touched: frame.touched, max_depth: frame.max_depth })),
        }
    }

    fn store_frame(&mut self, ctx: &Context, frame: &Frame, depth: usize, v: &TaintedValue) {
        let touched = Arc::new(frame.touched.clone());
        let rel_depth = frame.max_depth + 1 - depth;
        let mut keyed: Vec<(MutantId, CallKey, u64)> =
            vec![(ctx.mainline, key_for(frame.func, &frame.args, ctx.mainline), ctx.clock - frame.entry_clock)];
        if ctx.root {
            let tainted: BTreeSet<MutantId> =
                frame.args.iter().flat_map(|a| a.taints().keys().copied()).filter(|m| ctx.riders.contains(m)).collect();
            for r in tainted {
                let now = ctx.clock as i64 + ctx.offset(r);
                let entry = frame.entry_clock as i64 + frame.entry_offsets.get(&r).copied().unwrap_or(0);
                keyed.push((r, key_for(frame.func, &frame.args, r), (now - entry) as u64));
            }
        }
        for (m, key, cost) in keyed {
            self.infra += self.memo.record_points(&key, &touched);
            let entry = MemoEntry { value: v.get(m).clone(), cost, depth: rel_depth, touched: touched.clone() };
            if self.memo.memo_store_on_return(key, m, entry) {
                self.infra += 1;
            }
        }
    }

    /// Resolves one diverged mutant of `frame` at its return.
    fn merge(&mut self, ctx: &mut Context, frame: &mut Frame, depth: usize, v: &mut TaintedValue, p: Pending) {
        let m = p.mutant();
        let entry_virtual = frame.entry_clock as i64 + frame.entry_offsets.get(&m).copied().unwrap_or(0);
        let key = key_for(frame.func, &frame.args, m);
        if self.memo.enabled {
            self.infra += 1;
            let hit = self.memo.memo_lookup(&key, m).filter(|e| depth + e.depth - 1 <= MAX_CALL_DEPTH).cloned();
            if let Some(e) = hit {
                self.memo.stats.hits += 1;
                self.record_sample(frame.func, &key, m, &e.value);
                let end = entry_virtual + e.cost as i64;
                if end > self.budget as i64 {
                    self.kill(ctx, m, KillCause::Timeout);
                } else {
                    self.rejoin(ctx, frame, v, m, e.value, end, e.touched.iter().copied(), depth + e.depth - 1);
                }
                return;
            }
            self.memo.stats.misses += 1;
        }
        let (result, prefix, end_clock) = match p {
            Pending::Child(child) => {
                let Child { ctx: mut cctx, prefix_touched, .. } = *child;
                let r = self.exec(&mut cctx);
                (r, prefix_touched, cctx.clock)
            }
            Pending::Wounded(_) => {
                self.contexts += 1;
                self.infra += 1;
                let mut rctx = Context {
                    frames: Vec::new(),
                    mainline: m,
                    riders: BTreeSet::new(),
                    offsets: BTreeMap::new(),
                    max_offset: 0,
                    clock: entry_virtual as u64,
                    base_depth: depth - 1,
                    root: false,
                };
                let args: Vec<TaintedValue> = frame.args.iter().map(|a| a.concretize(m)).collect();
                let f = self.new_frame(&rctx, frame.func, args);
                rctx.frames.push(f);
                let r = self.exec(&mut rctx);
                (r, BTreeSet::new(), rctx.clock)
            }
        };
        match result {
            Ok(done) => {
                let mut touched = prefix;
                touched.extend(done.touched.iter().copied());
                if self.memo.enabled && self.unmerged > 0 {
                    let touched = Arc::new(touched.clone());
                    self.infra += self.memo.record_points(&key, &touched);
                    let entry = MemoEntry {
                        value: done.value.value().clone(),
                        cost: (end_clock as i64 - entry_virtual) as u64,
                        depth: done.max_depth + 1 - depth,
                        touched,
                    };
                    if self.memo.memo_store_on_return(key, m, entry) {
                        self.infra += 1;
                    }
                }
                self.rejoin(ctx, frame, v, m, done.value.into_value(), end_clock as i64, touched.into_iter(), done.max_depth);
            }
            Err(fault) => self.kill(ctx, m, fault.cause()),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn rejoin(
        &mut self,
        ctx: &mut Context,
        frame: &mut Frame,
        v: &mut TaintedValue,
        m: MutantId,
        value: PlainValue,
        end_virtual: i64,
        touched: impl Iterator<Item = u32>,
        max_depth: usize,
    ) {
        v.set(m, value);
        self.infra += 1;
        if self.memo.enabled {
            frame.touched.extend(touched);
        }
        frame.max_depth = frame.max_depth.max(max_depth);
        ctx.riders.insert(m);
        ctx.set_offset(m, end_virtual - ctx.clock as i64);
    }
}
