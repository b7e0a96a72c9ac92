//! Flat stack-machine code for the meta-mutant. Interpreting a flat
//! instruction stream lets an execution context be snapshotted anywhere,
//! including in the middle of an expression.

use std::collections::HashMap;

use crate::lang::ast::{BinOp, Literal, Loc, LogicOp, UnaryOp};
use crate::lang::builtins::Builtin;
use crate::lang::PlainValue;
use crate::mutagen::{MetaAst, MetaExpr, MetaExprKind, MetaStmt, MetaStmtKind, MutantId};

#[derive(Clone, Debug, PartialEq)]
pub enum Instr {
    /// Start of a statement: one tick of the statement counter.
    Stmt(Loc),
    Const(PlainValue),
    Load(u32),
    Store(u32),
    Unary(UnaryOp),
    Binary(BinOp),
    /// Mutation point: pops two operands, pushes the per-mutant result.
    Choice(u32),
    /// Pops a boolean; if false pushes it and jumps, otherwise falls through to the rhs.
    ScAnd { site: Loc, end: u32 },
    /// Pops a boolean; if true pushes it and jumps, otherwise falls through to the rhs.
    ScOr { site: Loc, end: u32 },
    /// Checks that the rhs of `and`/`or` is a boolean.
    ScEnd,
    /// Branch/loop condition: pops a boolean and jumps to `target` when false.
    Cond { site: Loc, target: u32 },
    Jump(u32),
    MakeList(u32),
    Index,
    Call { func: u32, argc: u32 },
    Builtin { builtin: Builtin, argc: u32 },
    /// Call to an undefined name; raises after evaluating the arguments.
    CallUnknown { argc: u32 },
    Assert(Loc),
    Return,
    Pop,
}

#[derive(Clone, Debug)]
pub struct Function {
    pub name: String,
    pub params: u32,
    pub locals: Vec<String>,
    pub code: Vec<Instr>,
}

#[derive(Clone, Debug)]
pub struct Point {
    pub loc: Loc,
    pub original: BinOp,
    pub variants: Vec<(MutantId, BinOp)>,
}

#[derive(Clone, Debug)]
pub struct Program {
    pub functions: Vec<Function>,
    pub index: HashMap<String, u32>,
    pub points: Vec<Point>,
    /// Point of each mutant, indexed by `id - 1`.
    mutant_point: Vec<u32>,
    mutant_op: Vec<BinOp>,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn mutant_count(&self) -> usize {
        self.mutant_point.len()
    }

    pub fn point_of(&self, m: MutantId) -> Option<u32> {
        m.0.checked_sub(1).and_then(|i| self.mutant_point.get(i as usize).copied())
    }

    /// Operator used at `point` by the standalone program of `m`.
    pub fn op_for(&self, point: u32, m: MutantId) -> BinOp {
        match self.point_of(m) {
            Some(p) if p == point => self.mutant_op[m.index() - 1],
            _ => self.points[point as usize].original,
        }
    }

    pub fn compile(meta: &MetaAst) -> Program {
        let index: HashMap<String, u32> =
            meta.functions.iter().enumerate().map(|(i, f)| (f.name.clone(), i as u32)).collect();
        let functions = meta
            .functions
            .iter()
            .map(|f| {
                let mut c = FnCompiler { index: &index, locals: f.params.clone(), code: Vec::new() };
                c.block(&f.body);
                c.code.push(Instr::Const(PlainValue::None));
                c.code.push(Instr::Return);
                Function { name: f.name.clone(), params: f.params.len() as u32, locals: c.locals, code: c.code }
            })
            .collect();
        let points = meta
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| Point {
                loc: p.loc,
                original: p.original,
                variants: meta.mutants.iter().filter(|m| m.point == i).map(|m| (m.id, m.replacement)).collect(),
            })
            .collect();
        Program {
            functions,
            index,
            points,
            mutant_point: meta.mutants.iter().map(|m| m.point as u32).collect(),
            mutant_op: meta.mutants.iter().map(|m| m.replacement).collect(),
        }
    }
}

struct FnCompiler<'a> {
    index: &'a HashMap<String, u32>,
    locals: Vec<String>,
    code: Vec<Instr>,
}

impl FnCompiler<'_> {
    fn slot(&mut self, name: &str) -> u32 {
        match self.locals.iter().position(|l| l == name) {
            Some(i) => i as u32,
            None => {
                self.locals.push(name.to_string());
                (self.locals.len() - 1) as u32
            }
        }
    }

    fn here(&self) -> u32 {
        self.code.len() as u32
    }

    fn patch(&mut self, at: u32, to: u32) {
        match &mut self.code[at as usize] {
            Instr::Cond { target, .. } => *target = to,
            Instr::Jump(t) => *t = to,
            Instr::ScAnd { end, .. } | Instr::ScOr { end, .. } => *end = to,
            other => unreachable!("not a jump: {other:?}"),
        }
    }

    fn block(&mut self, body: &[MetaStmt]) {
        for s in body {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &MetaStmt) {
        match &s.kind {
            MetaStmtKind::Assign(name, e) => {
                self.code.push(Instr::Stmt(s.loc));
                self.expr(e);
                let slot = self.slot(name);
                self.code.push(Instr::Store(slot));
            }
            MetaStmtKind::AugAssign(name, op, e) => {
                self.code.push(Instr::Stmt(s.loc));
                let slot = self.slot(name);
                self.code.push(Instr::Load(slot));
                self.expr(e);
                self.code.push(Instr::Binary(*op));
                self.code.push(Instr::Store(slot));
            }
            MetaStmtKind::While(cond, body) => {
                let head = self.here();
                self.code.push(Instr::Stmt(s.loc));
                self.expr(&cond.0);
                let exit = self.here();
                self.code.push(Instr::Cond { site: cond.0.loc, target: 0 });
                self.block(body);
                self.code.push(Instr::Jump(head));
                let end = self.here();
                self.patch(exit, end);
            }
            MetaStmtKind::If(cond, then, els) => {
                self.code.push(Instr::Stmt(s.loc));
                self.expr(&cond.0);
                let branch = self.here();
                self.code.push(Instr::Cond { site: cond.0.loc, target: 0 });
                self.block(then);
                if els.is_empty() {
                    let end = self.here();
                    self.patch(branch, end);
                } else {
                    let skip = self.here();
                    self.code.push(Instr::Jump(0));
                    let else_start = self.here();
                    self.patch(branch, else_start);
                    self.block(els);
                    let end = self.here();
                    self.patch(skip, end);
                }
            }
            MetaStmtKind::Return(e) => {
                self.code.push(Instr::Stmt(s.loc));
                match e {
                    Some(e) => self.expr(e),
                    None => self.code.push(Instr::Const(PlainValue::None)),
                }
                self.code.push(Instr::Return);
            }
            MetaStmtKind::Assert(e) => {
                self.code.push(Instr::Stmt(s.loc));
                self.expr(e);
                self.code.push(Instr::Assert(s.loc));
            }
            MetaStmtKind::Expr(e) => {
                self.code.push(Instr::Stmt(s.loc));
                self.expr(e);
                self.code.push(Instr::Pop);
            }
        }
    }

    fn expr(&mut self, e: &MetaExpr) {
        match &e.kind {
            MetaExprKind::Lit(l) => self.code.push(Instr::Const(match l {
                Literal::Int(i) => PlainValue::Int(*i),
                Literal::Float(f) => PlainValue::Float(*f),
                Literal::Bool(b) => PlainValue::Bool(*b),
                Literal::Str(s) => PlainValue::str(s),
            })),
            MetaExprKind::Var(name) => {
                let slot = self.slot(name);
                self.code.push(Instr::Load(slot));
            }
            MetaExprKind::Unary(op, a) => {
                self.expr(a);
                self.code.push(Instr::Unary(*op));
            }
            MetaExprKind::Binary(op, a, b) => {
                self.expr(a);
                self.expr(b);
                self.code.push(Instr::Binary(*op));
            }
            MetaExprKind::Choice(c) => {
                self.expr(&c.lhs);
                self.expr(&c.rhs);
                self.code.push(Instr::Choice(c.point as u32));
            }
            MetaExprKind::Logic(op, a, b) => {
                self.expr(a);
                let at = self.here();
                self.code.push(match op {
                    LogicOp::And => Instr::ScAnd { site: e.loc, end: 0 },
                    LogicOp::Or => Instr::ScOr { site: e.loc, end: 0 },
                });
                self.expr(b);
                self.code.push(Instr::ScEnd);
                let end = self.here();
                self.patch(at, end);
            }
            MetaExprKind::Call(name, args) => {
                for a in args {
                    self.expr(a);
                }
                let argc = args.len() as u32;
                self.code.push(if let Some(&func) = self.index.get(name) {
                    Instr::Call { func, argc }
                } else if let Some(builtin) = Builtin::from_name(name) {
                    Instr::Builtin { builtin, argc }
                } else {
                    Instr::CallUnknown { argc }
                });
            }
            MetaExprKind::List(items) => {
                for a in items {
                    self.expr(a);
                }
                self.code.push(Instr::MakeList(items.len() as u32));
            }
            MetaExprKind::Index(a, i) => {
                self.expr(a);
                self.expr(i);
                self.code.push(Instr::Index);
            }
        }
    }
}
