use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::*;
use super::builtins::Builtin;
use super::value::PlainValue;
use super::{ops, ErrorKind, TestOutcome, MAX_CALL_DEPTH};

/// Step cap used when no budget is supplied, so a non-terminating original
/// still ends as [`TestOutcome::Timeout`].
pub const DEFAULT_STEP_CAP: u64 = 50_000_000;

/// Result of one plain evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PlainRun {
    pub outcome: TestOutcome,
    /// Return value of the entry function when it completed.
    pub value: Option<PlainValue>,
    /// Executed statement nodes; a `while` counts once per condition test.
    pub stmts: u64,
    /// Locations of every arithmetic/comparison operator that was evaluated.
    pub covered: BTreeSet<Loc>,
}

enum Fault {
    Assertion(Loc),
    Runtime(ErrorKind, Loc),
    Timeout,
}

enum Flow {
    Next,
    Return(PlainValue),
}

/// Tree-walking evaluator over a plain [`Ast`].
pub struct Evaluator<'a> {
    functions: HashMap<&'a str, &'a FunctionDef>,
    budget: u64,
    stmts: u64,
    depth: usize,
    current: Loc,
    covered: BTreeSet<Loc>,
}

/// Evaluates `entry` with the parameters bound from `env`.
pub fn eval_plain(ast: &Ast, entry: &str, env: &BTreeMap<String, PlainValue>) -> PlainRun {
    Evaluator::new(ast, DEFAULT_STEP_CAP).run(entry, env)
}

impl<'a> Evaluator<'a> {
    pub fn new(ast: &'a Ast, budget: u64) -> Self {
        Evaluator {
            functions: ast.functions.iter().map(|f| (f.name.as_str(), f)).collect(),
            budget,
            stmts: 0,
            depth: 0,
            current: Loc::default(),
            covered: BTreeSet::new(),
        }
    }

    pub fn run(mut self, entry: &str, env: &BTreeMap<String, PlainValue>) -> PlainRun {
        let result = match self.functions.get(entry).copied() {
            Some(func) => {
                let mut missing = false;
                let args: Vec<PlainValue> = func
                    .params
                    .iter()
                    .map(|p| {
                        env.get(p).cloned().unwrap_or_else(|| {
                            missing = true;
                            PlainValue::None
                        })
                    })
                    .collect();
                if missing {
                    Err(Fault::Runtime(ErrorKind::Arity, func.loc))
                } else {
                    self.call_user(func, args)
                }
            }
            None => Err(Fault::Runtime(ErrorKind::Name, Loc::default())),
        };
        let (outcome, value) = match result {
            Ok(v) => (TestOutcome::Pass, Some(v)),
            Err(Fault::Assertion(loc)) => (TestOutcome::AssertionFailure { loc }, None),
            Err(Fault::Runtime(kind, loc)) => (TestOutcome::RuntimeException { kind, loc }, None),
            Err(Fault::Timeout) => (TestOutcome::Timeout, None),
        };
        PlainRun { outcome, value, stmts: self.stmts, covered: self.covered }
    }

    fn raise(&self, kind: ErrorKind) -> Fault {
        Fault::Runtime(kind, self.current)
    }

    fn call_user(&mut self, func: &'a FunctionDef, args: Vec<PlainValue>) -> Result<PlainValue, Fault> {
        if args.len() != func.params.len() {
            return Err(self.raise(ErrorKind::Arity));
        }
        if self.depth >= MAX_CALL_DEPTH {
            return Err(self.raise(ErrorKind::Recursion));
        }
        self.depth += 1;
        let mut frame: HashMap<&'a str, PlainValue> =
            func.params.iter().map(String::as_str).zip(args).collect();
        let caller_loc = self.current;
        let flow = self.block(&func.body, &mut frame);
        self.depth -= 1;
        self.current = caller_loc;
        match flow? {
            Flow::Return(v) => Ok(v),
            Flow::Next => Ok(PlainValue::None),
        }
    }

    fn block(&mut self, body: &'a [Stmt], frame: &mut HashMap<&'a str, PlainValue>) -> Result<Flow, Fault> {
        for s in body {
            if let Flow::Return(v) = self.stmt(s, frame)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Next)
    }

    fn tick(&mut self, loc: Loc) -> Result<(), Fault> {
        self.current = loc;
        self.stmts += 1;
        if self.stmts > self.budget {
            return Err(Fault::Timeout);
        }
        Ok(())
    }

    fn condition(&mut self, e: &'a Expr, frame: &mut HashMap<&'a str, PlainValue>) -> Result<bool, Fault> {
        let v = self.expr(e, frame)?;
        ops::truth(&v).map_err(|k| self.raise(k))
    }

    fn stmt(&mut self, s: &'a Stmt, frame: &mut HashMap<&'a str, PlainValue>) -> Result<Flow, Fault> {
        match &s.kind {
            StmtKind::While(cond, body) => loop {
                self.tick(s.loc)?;
                if !self.condition(cond, frame)? {
                    return Ok(Flow::Next);
                }
                if let Flow::Return(v) = self.block(body, frame)? {
                    return Ok(Flow::Return(v));
                }
            },
            _ => self.tick(s.loc)?,
        }
        match &s.kind {
            StmtKind::Assign(name, e) => {
                let v = self.expr(e, frame)?;
                frame.insert(name.as_str(), v);
                Ok(Flow::Next)
            }
            StmtKind::AugAssign(name, op, e) => {
                let cur = frame.get(name.as_str()).cloned().ok_or_else(|| self.raise(ErrorKind::Name))?;
                let rhs = self.expr(e, frame)?;
                let v = ops::binary(*op, &cur, &rhs).map_err(|k| self.raise(k))?;
                frame.insert(name.as_str(), v);
                Ok(Flow::Next)
            }
            StmtKind::If(cond, then, els) => {
                if self.condition(cond, frame)? {
                    self.block(then, frame)
                } else {
                    self.block(els, frame)
                }
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.expr(e, frame)?,
                    None => PlainValue::None,
                };
                Ok(Flow::Return(v))
            }
            StmtKind::Assert(e) => {
                let v = self.expr(e, frame)?;
                match ops::truth(&v) {
                    Ok(true) => Ok(Flow::Next),
                    Ok(false) => Err(Fault::Assertion(s.loc)),
                    Err(k) => Err(self.raise(k)),
                }
            }
            StmtKind::Expr(e) => {
                self.expr(e, frame)?;
                Ok(Flow::Next)
            }
            StmtKind::While(..) => unreachable!("handled above"),
        }
    }

    fn expr(&mut self, e: &'a Expr, frame: &mut HashMap<&'a str, PlainValue>) -> Result<PlainValue, Fault> {
        match &e.kind {
            ExprKind::Lit(l) => Ok(match l {
                Literal::Int(i) => PlainValue::Int(*i),
                Literal::Float(f) => PlainValue::Float(*f),
                Literal::Bool(b) => PlainValue::Bool(*b),
                Literal::Str(s) => PlainValue::str(s),
            }),
            ExprKind::Var(name) => frame.get(name.as_str()).cloned().ok_or_else(|| self.raise(ErrorKind::Name)),
            ExprKind::Unary(op, a) => {
                let a = self.expr(a, frame)?;
                ops::unary(*op, &a).map_err(|k| self.raise(k))
            }
            ExprKind::Binary(op, a, b) => {
                let a = self.expr(a, frame)?;
                let b = self.expr(b, frame)?;
                self.covered.insert(e.loc);
                ops::binary(*op, &a, &b).map_err(|k| self.raise(k))
            }
            ExprKind::Logic(op, a, b) => {
                let a = self.condition(a, frame)?;
                let short = match op {
                    LogicOp::And => !a,
                    LogicOp::Or => a,
                };
                if short {
                    return Ok(PlainValue::Bool(a));
                }
                Ok(PlainValue::Bool(self.condition(b, frame)?))
            }
            ExprKind::Call(name, args) => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.expr(a, frame)?);
                }
                if let Some(func) = self.functions.get(name.as_str()).copied() {
                    self.call_user(func, values)
                } else if let Some(b) = Builtin::from_name(name) {
                    b.call(&values).map_err(|k| self.raise(k))
                } else {
                    Err(self.raise(ErrorKind::Name))
                }
            }
            ExprKind::List(items) => {
                let mut values = Vec::with_capacity(items.len());
                for a in items {
                    values.push(self.expr(a, frame)?);
                }
                Ok(PlainValue::list(values))
            }
            ExprKind::Index(seq, idx) => {
                let s = self.expr(seq, frame)?;
                let i = self.expr(idx, frame)?;
                ops::index(&s, &i).map_err(|k| self.raise(k))
            }
        }
    }
}
