//! Mutation points, mutant enumeration, and the meta-mutant (all mutants
//! embedded in one program behind choice nodes).

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lang::ast::{write_binary, Ast, BinOp, Expr, ExprKind, FunctionDef, Literal, Loc, LogicOp, OpClass, Stmt, StmtKind, UnaryOp};

/// Mutant identifier; `M0` is the original program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MutantId(pub u32);

impl MutantId {
    pub const ORIGINAL: MutantId = MutantId(0);

    pub fn is_original(self) -> bool {
        self.0 == 0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for MutantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationPoint {
    pub id: usize,
    pub function: String,
    pub loc: Loc,
    pub class: OpClass,
    pub original: BinOp,
    pub replacements: Vec<BinOp>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutant {
    pub id: MutantId,
    pub point: usize,
    pub loc: Loc,
    pub original: BinOp,
    pub replacement: BinOp,
}

impl fmt::Display for Mutant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} -> {}", self.id, self.loc, self.original, self.replacement)
    }
}

fn catalog(op: BinOp) -> &'static [BinOp] {
    match op.class() {
        OpClass::Arithmetic => &BinOp::ARITHMETIC,
        OpClass::Comparison => &BinOp::COMPARISON,
    }
}

/// One point per arithmetic/comparison operator in non-test functions, in
/// pre-order. Test functions are the oracle and are left unmutated.
pub fn discover_mutation_points(ast: &Ast) -> Vec<MutationPoint> {
    fn expr(e: &Expr, func: &str, out: &mut Vec<MutationPoint>) {
        match &e.kind {
            ExprKind::Lit(_) | ExprKind::Var(_) => {}
            ExprKind::Unary(_, a) => expr(a, func, out),
            ExprKind::Binary(op, a, b) => {
                out.push(MutationPoint {
                    id: out.len(),
                    function: func.to_string(),
                    loc: e.loc,
                    class: op.class(),
                    original: *op,
                    replacements: catalog(*op).iter().copied().filter(|r| r != op).collect(),
                });
                expr(a, func, out);
                expr(b, func, out);
            }
            ExprKind::Logic(_, a, b) | ExprKind::Index(a, b) => {
                expr(a, func, out);
                expr(b, func, out);
            }
            ExprKind::Call(_, args) | ExprKind::List(args) => args.iter().for_each(|a| expr(a, func, out)),
        }
    }
    fn block(body: &[Stmt], func: &str, out: &mut Vec<MutationPoint>) {
        for s in body {
            match &s.kind {
                StmtKind::Assign(_, e) | StmtKind::AugAssign(_, _, e) | StmtKind::Assert(e) | StmtKind::Expr(e) => {
                    expr(e, func, out)
                }
                StmtKind::Return(e) => e.iter().for_each(|e| expr(e, func, out)),
                StmtKind::While(c, b) => {
                    expr(c, func, out);
                    block(b, func, out);
                }
                StmtKind::If(c, t, e) => {
                    expr(c, func, out);
                    block(t, func, out);
                    block(e, func, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    for f in ast.functions.iter().filter(|f| !f.is_test()) {
        block(&f.body, &f.name, &mut out);
    }
    out
}

/// Numbers mutants `M1..Mn` in (point, replacement) order.
pub fn enumerate_mutants(points: &[MutationPoint]) -> Vec<Mutant> {
    let mut out = Vec::new();
    for (idx, p) in points.iter().enumerate() {
        for &r in &p.replacements {
            out.push(Mutant { id: MutantId(out.len() as u32 + 1), point: idx, loc: p.loc, original: p.original, replacement: r });
        }
    }
    out
}

/// A mutated operator occurrence: operands are evaluated once and each
/// variant applies its own operator to them.
#[derive(Clone, Debug, PartialEq)]
pub struct TaintChoice {
    pub point: usize,
    pub original: BinOp,
    pub lhs: Box<MetaExpr>,
    pub rhs: Box<MetaExpr>,
    /// Non-original variants in id order; `M0` is implicit and uses `original`.
    pub variants: Vec<(MutantId, BinOp)>,
}

impl TaintChoice {
    pub fn op_for(&self, m: MutantId) -> BinOp {
        self.variants.iter().find(|(id, _)| *id == m).map_or(self.original, |(_, op)| *op)
    }
}

/// A branch or loop condition; divergence is detected here.
#[derive(Clone, Debug, PartialEq)]
pub struct TaintedCond(pub MetaExpr);

#[derive(Clone, Debug, PartialEq)]
pub struct MetaExpr {
    pub loc: Loc,
    pub kind: MetaExprKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetaExprKind {
    Lit(Literal),
    Var(String),
    Unary(UnaryOp, Box<MetaExpr>),
    Binary(BinOp, Box<MetaExpr>, Box<MetaExpr>),
    Choice(TaintChoice),
    Logic(LogicOp, Box<MetaExpr>, Box<MetaExpr>),
    Call(String, Vec<MetaExpr>),
    List(Vec<MetaExpr>),
    Index(Box<MetaExpr>, Box<MetaExpr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetaStmt {
    pub loc: Loc,
    pub kind: MetaStmtKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetaStmtKind {
    Assign(String, MetaExpr),
    AugAssign(String, BinOp, MetaExpr),
    While(TaintedCond, Vec<MetaStmt>),
    If(TaintedCond, Vec<MetaStmt>, Vec<MetaStmt>),
    Return(Option<MetaExpr>),
    Assert(MetaExpr),
    Expr(MetaExpr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetaFunction {
    pub loc: Loc,
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<MetaStmt>,
    pub wrapped: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetaAst {
    pub functions: Vec<MetaFunction>,
    pub points: Vec<MutationPoint>,
    pub mutants: Vec<Mutant>,
}

/// Builds the meta-mutant for `points` (usually [`discover_mutation_points`],
/// possibly a curated subset). Mutant ids come from [`enumerate_mutants`].
pub fn generate_meta_mutant(ast: &Ast, points: &[MutationPoint]) -> MetaAst {
    let mutants = enumerate_mutants(points);
    let mut by_loc: HashMap<Loc, (usize, Vec<(MutantId, BinOp)>)> =
        points.iter().enumerate().map(|(i, p)| (p.loc, (i, Vec::new()))).collect();
    for m in &mutants {
        if let Some((_, v)) = by_loc.get_mut(&m.loc) {
            v.push((m.id, m.replacement));
        }
    }
    let conv = Converter { by_loc };
    MetaAst {
        functions: ast.functions.iter().map(|f| conv.function(f)).collect(),
        points: points.to_vec(),
        mutants,
    }
}

struct Converter {
    by_loc: HashMap<Loc, (usize, Vec<(MutantId, BinOp)>)>,
}

impl Converter {
    fn function(&self, f: &FunctionDef) -> MetaFunction {
        MetaFunction { loc: f.loc, name: f.name.clone(), params: f.params.clone(), body: self.block(&f.body), wrapped: true }
    }

    fn block(&self, body: &[Stmt]) -> Vec<MetaStmt> {
        body.iter().map(|s| self.stmt(s)).collect()
    }

    fn stmt(&self, s: &Stmt) -> MetaStmt {
        let kind = match &s.kind {
            StmtKind::Assign(n, e) => MetaStmtKind::Assign(n.clone(), self.expr(e)),
            StmtKind::AugAssign(n, op, e) => MetaStmtKind::AugAssign(n.clone(), *op, self.expr(e)),
            StmtKind::While(c, b) => MetaStmtKind::While(TaintedCond(self.expr(c)), self.block(b)),
            StmtKind::If(c, t, e) => MetaStmtKind::If(TaintedCond(self.expr(c)), self.block(t), self.block(e)),
            StmtKind::Return(e) => MetaStmtKind::Return(e.as_ref().map(|e| self.expr(e))),
            StmtKind::Assert(e) => MetaStmtKind::Assert(self.expr(e)),
            StmtKind::Expr(e) => MetaStmtKind::Expr(self.expr(e)),
        };
        MetaStmt { loc: s.loc, kind }
    }

    fn expr(&self, e: &Expr) -> MetaExpr {
        let bx = |x: &Expr| Box::new(self.expr(x));
        let kind = match &e.kind {
            ExprKind::Lit(l) => MetaExprKind::Lit(l.clone()),
            ExprKind::Var(v) => MetaExprKind::Var(v.clone()),
            ExprKind::Unary(op, a) => MetaExprKind::Unary(*op, bx(a)),
            ExprKind::Binary(op, a, b) => match self.by_loc.get(&e.loc) {
                Some((point, variants)) => MetaExprKind::Choice(TaintChoice {
                    point: *point,
                    original: *op,
                    lhs: bx(a),
                    rhs: bx(b),
                    variants: variants.clone(),
                }),
                None => MetaExprKind::Binary(*op, bx(a), bx(b)),
            },
            ExprKind::Logic(op, a, b) => MetaExprKind::Logic(*op, bx(a), bx(b)),
            ExprKind::Call(n, args) => MetaExprKind::Call(n.clone(), args.iter().map(|a| self.expr(a)).collect()),
            ExprKind::List(items) => MetaExprKind::List(items.iter().map(|a| self.expr(a)).collect()),
            ExprKind::Index(a, i) => MetaExprKind::Index(bx(a), bx(i)),
        };
        MetaExpr { loc: e.loc, kind }
    }
}

/// Projection of a meta tree back to a plain tree, choosing each operator via `pick`.
fn project(meta: &MetaAst, pick: &dyn Fn(&TaintChoice) -> BinOp) -> Ast {
    fn expr(e: &MetaExpr, pick: &dyn Fn(&TaintChoice) -> BinOp) -> Expr {
        let bx = |x: &MetaExpr| Box::new(expr(x, pick));
        let kind = match &e.kind {
            MetaExprKind::Lit(l) => ExprKind::Lit(l.clone()),
            MetaExprKind::Var(v) => ExprKind::Var(v.clone()),
            MetaExprKind::Unary(op, a) => ExprKind::Unary(*op, bx(a)),
            MetaExprKind::Binary(op, a, b) => ExprKind::Binary(*op, bx(a), bx(b)),
            MetaExprKind::Choice(c) => ExprKind::Binary(pick(c), bx(&c.lhs), bx(&c.rhs)),
            MetaExprKind::Logic(op, a, b) => ExprKind::Logic(*op, bx(a), bx(b)),
            MetaExprKind::Call(n, args) => ExprKind::Call(n.clone(), args.iter().map(|a| expr(a, pick)).collect()),
            MetaExprKind::List(items) => ExprKind::List(items.iter().map(|a| expr(a, pick)).collect()),
            MetaExprKind::Index(a, i) => ExprKind::Index(bx(a), bx(i)),
        };
        Expr { loc: e.loc, kind }
    }
    fn block(body: &[MetaStmt], pick: &dyn Fn(&TaintChoice) -> BinOp) -> Vec<Stmt> {
        body.iter()
            .map(|s| {
                let kind = match &s.kind {
                    MetaStmtKind::Assign(n, e) => StmtKind::Assign(n.clone(), expr(e, pick)),
                    MetaStmtKind::AugAssign(n, op, e) => StmtKind::AugAssign(n.clone(), *op, expr(e, pick)),
                    MetaStmtKind::While(c, b) => StmtKind::While(expr(&c.0, pick), block(b, pick)),
                    MetaStmtKind::If(c, t, e) => StmtKind::If(expr(&c.0, pick), block(t, pick), block(e, pick)),
                    MetaStmtKind::Return(e) => StmtKind::Return(e.as_ref().map(|e| expr(e, pick))),
                    MetaStmtKind::Assert(e) => StmtKind::Assert(expr(e, pick)),
                    MetaStmtKind::Expr(e) => StmtKind::Expr(expr(e, pick)),
                };
                Stmt { loc: s.loc, kind }
            })
            .collect()
    }
    Ast {
        functions: meta
            .functions
            .iter()
            .map(|f| FunctionDef { loc: f.loc, name: f.name.clone(), params: f.params.clone(), body: block(&f.body, pick) })
            .collect(),
    }
}

impl MetaAst {
    pub fn mutant(&self, id: MutantId) -> Option<&Mutant> {
        id.0.checked_sub(1).and_then(|i| self.mutants.get(i as usize))
    }

    pub fn mutant_ids(&self) -> impl Iterator<Item = MutantId> + '_ {
        self.mutants.iter().map(|m| m.id)
    }

    /// Drops every choice variant whose mutant is not in `keep`.
    pub fn restrict_meta(&self, keep: &BTreeSet<MutantId>) -> MetaAst {
        fn expr(e: &mut MetaExpr, keep: &BTreeSet<MutantId>) {
            match &mut e.kind {
                MetaExprKind::Lit(_) | MetaExprKind::Var(_) => {}
                MetaExprKind::Unary(_, a) => expr(a, keep),
                MetaExprKind::Binary(_, a, b) | MetaExprKind::Logic(_, a, b) | MetaExprKind::Index(a, b) => {
                    expr(a, keep);
                    expr(b, keep);
                }
                MetaExprKind::Choice(c) => {
                    c.variants.retain(|(m, _)| keep.contains(m));
                    expr(&mut c.lhs, keep);
                    expr(&mut c.rhs, keep);
                }
                MetaExprKind::Call(_, args) | MetaExprKind::List(args) => args.iter_mut().for_each(|a| expr(a, keep)),
            }
        }
        fn block(body: &mut [MetaStmt], keep: &BTreeSet<MutantId>) {
            for s in body {
                match &mut s.kind {
                    MetaStmtKind::Assign(_, e)
                    | MetaStmtKind::AugAssign(_, _, e)
                    | MetaStmtKind::Assert(e)
                    | MetaStmtKind::Expr(e) => expr(e, keep),
                    MetaStmtKind::Return(e) => {
                        if let Some(e) = e {
                            expr(e, keep)
                        }
                    }
                    MetaStmtKind::While(c, b) => {
                        expr(&mut c.0, keep);
                        block(b, keep);
                    }
                    MetaStmtKind::If(c, t, e) => {
                        expr(&mut c.0, keep);
                        block(t, keep);
                        block(e, keep);
                    }
                }
            }
        }
        let mut out = self.clone();
        for f in &mut out.functions {
            block(&mut f.body, keep);
        }
        out
    }

    /// The original program: every choice resolved to `M0`, wrappers removed.
    pub fn erase(&self) -> Ast {
        project(self, &|c| c.original)
    }

    /// The standalone program of a single mutant.
    pub fn mutant_ast(&self, id: MutantId) -> Ast {
        let Some(m) = self.mutant(id) else { return self.erase() };
        let (point, op) = (m.point, m.replacement);
        project(self, &move |c| if c.point == point { op } else { c.original })
    }
}

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_NOT: u8 = 3;
const PREC_UNARY: u8 = 11;
const PREC_ATOM: u8 = 12;

fn meta_precedence(kind: &MetaExprKind) -> u8 {
    match kind {
        MetaExprKind::Logic(LogicOp::Or, ..) => PREC_OR,
        MetaExprKind::Logic(LogicOp::And, ..) => PREC_AND,
        MetaExprKind::Unary(UnaryOp::Not, _) => PREC_NOT,
        MetaExprKind::Unary(UnaryOp::Neg, _) => PREC_UNARY,
        MetaExprKind::Binary(op, ..) => op.precedence(),
        _ => PREC_ATOM,
    }
}

fn write_meta_list(f: &mut fmt::Formatter<'_>, items: &[MetaExpr]) -> fmt::Result {
    for (i, a) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write_meta_expr(f, a, 0)?;
    }
    Ok(())
}

fn write_meta_expr(f: &mut fmt::Formatter<'_>, e: &MetaExpr, min: u8) -> fmt::Result {
    if meta_precedence(&e.kind) < min {
        f.write_str("(")?;
        write_meta_expr(f, e, 0)?;
        return f.write_str(")");
    }
    match &e.kind {
        MetaExprKind::Lit(l) => write!(f, "{l}"),
        MetaExprKind::Var(v) => f.write_str(v),
        MetaExprKind::Unary(UnaryOp::Neg, a) => {
            f.write_str("-")?;
            write_meta_expr(f, a, PREC_UNARY)
        }
        MetaExprKind::Unary(UnaryOp::Not, a) => {
            f.write_str("not ")?;
            write_meta_expr(f, a, PREC_NOT)
        }
        MetaExprKind::Binary(op, a, b) => write_binary(f, *op, a.as_ref(), b.as_ref(), write_meta_expr),
        MetaExprKind::Choice(c) => {
            f.write_str("@T(")?;
            let all = std::iter::once((MutantId::ORIGINAL, c.original)).chain(c.variants.iter().copied());
            for (i, (m, op)) in all.enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "<{m}: ")?;
                write_binary(f, op, c.lhs.as_ref(), c.rhs.as_ref(), write_meta_expr)?;
                f.write_str(">")?;
            }
            f.write_str(")")
        }
        MetaExprKind::Logic(op, a, b) => {
            let (p, kw) = match op {
                LogicOp::And => (PREC_AND, "and"),
                LogicOp::Or => (PREC_OR, "or"),
            };
            write_meta_expr(f, a, p)?;
            write!(f, " {kw} ")?;
            write_meta_expr(f, b, p + 1)
        }
        MetaExprKind::Call(name, args) => {
            if ast_builtin(name) {
                write!(f, "{name}(")?;
            } else {
                write!(f, "${name}(")?;
            }
            write_meta_list(f, args)?;
            f.write_str(")")
        }
        MetaExprKind::List(items) => {
            f.write_str("[")?;
            write_meta_list(f, items)?;
            f.write_str("]")
        }
        MetaExprKind::Index(a, i) => {
            write_meta_expr(f, a, PREC_ATOM)?;
            f.write_str("[")?;
            write_meta_expr(f, i, 0)?;
            f.write_str("]")
        }
    }
}

fn ast_builtin(name: &str) -> bool {
    crate::lang::builtins::Builtin::from_name(name).is_some()
}

impl fmt::Display for MetaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_meta_expr(f, self, 0)
    }
}

impl fmt::Display for TaintedCond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@C({})", self.0)
    }
}

fn write_meta_block(f: &mut fmt::Formatter<'_>, body: &[MetaStmt], depth: usize) -> fmt::Result {
    let pad = "  ".repeat(depth);
    for s in body {
        match &s.kind {
            MetaStmtKind::Assign(n, e) => writeln!(f, "{pad}{n} = {e}")?,
            MetaStmtKind::AugAssign(n, op, e) => writeln!(f, "{pad}{n} {}= {e}", op.symbol())?,
            MetaStmtKind::While(c, b) => {
                writeln!(f, "{pad}while {c}:")?;
                write_meta_block(f, b, depth + 1)?;
            }
            MetaStmtKind::If(c, t, e) => {
                writeln!(f, "{pad}if {c}:")?;
                write_meta_block(f, t, depth + 1)?;
                if !e.is_empty() {
                    writeln!(f, "{pad}else:")?;
                    write_meta_block(f, e, depth + 1)?;
                }
            }
            MetaStmtKind::Return(None) => writeln!(f, "{pad}return")?,
            MetaStmtKind::Return(Some(e)) => writeln!(f, "{pad}return {e}")?,
            MetaStmtKind::Assert(e) => writeln!(f, "{pad}assert {e}")?,
            MetaStmtKind::Expr(e) => writeln!(f, "{pad}{e}")?,
        }
    }
    Ok(())
}

impl fmt::Display for MetaAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, func) in self.functions.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "def {}({}):", func.name, func.params.join(", "))?;
            write_meta_block(f, &func.body, 1)?;
            if func.wrapped {
                writeln!(f, "${0} = wrap({0})", func.name)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    const PROCESS: &str = "\
def f(a, counts):
  i = 0
  while i < counts:
    a = a / 2
    i += 1
  return a
";

    #[test]
    fn points_follow_catalog() {
        let ast = parse_program("def f(a, b):\n  return a + b\n").unwrap();
        let pts = discover_mutation_points(&ast);
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].replacements.len(), 10);
        assert!(!pts[0].replacements.contains(&BinOp::Add));
        assert!(pts[0].replacements.contains(&BinOp::Div));

        let ast = parse_program("def f(i, counts):\n  return i < counts\n").unwrap();
        let pts = discover_mutation_points(&ast);
        assert_eq!(pts[0].class, OpClass::Comparison);
        assert_eq!(pts[0].replacements.len(), 5);

        let ast = parse_program("def f(a):\n  return not a\n").unwrap();
        assert!(discover_mutation_points(&ast).is_empty());
    }

    #[test]
    fn preorder_and_numbering() {
        let ast = parse_program("def f(a, b):\n  return a * b < a - 1\n").unwrap();
        let pts = discover_mutation_points(&ast);
        let ops: Vec<BinOp> = pts.iter().map(|p| p.original).collect();
        assert_eq!(ops, vec![BinOp::Lt, BinOp::Mul, BinOp::Sub]);
        let ms = enumerate_mutants(&pts);
        assert_eq!(ms.len(), 25);
        assert_eq!(ms[0].id, MutantId(1));
        assert_eq!(ms[0].point, 0);
        assert_eq!(ms[5].point, 1);
        assert_eq!(ms[5].replacement, BinOp::Add);
        assert!(enumerate_mutants(&[]).is_empty());
    }

    #[test]
    fn one_of_each_class_gives_fifteen() {
        let ast = parse_program("def f(a, b):\n  if a < b:\n    return a + b\n  return 0\n").unwrap();
        assert_eq!(enumerate_mutants(&discover_mutation_points(&ast)).len(), 15);
    }

    #[test]
    fn test_functions_are_not_mutated() {
        let ast = parse_program("def f(a):\n  return a\n\ndef test_f():\n  assert f(1) + 1 == 2\n").unwrap();
        assert!(discover_mutation_points(&ast).is_empty());
    }

    fn curated(ast: &Ast, picks: &[(BinOp, &[BinOp])]) -> Vec<MutationPoint> {
        let mut pts: Vec<MutationPoint> = discover_mutation_points(ast)
            .into_iter()
            .filter_map(|mut p| {
                let (_, reps) = picks.iter().find(|(o, _)| *o == p.original)?;
                p.replacements = reps.to_vec();
                Some(p)
            })
            .collect();
        for (i, p) in pts.iter_mut().enumerate() {
            p.id = i;
        }
        pts
    }

    #[test]
    fn meta_rendering() {
        let ast = parse_program(PROCESS).unwrap();
        let pts = curated(&ast, &[(BinOp::Div, &[BinOp::Add, BinOp::Mul])]);
        let meta = generate_meta_mutant(&ast, &pts);
        let text = meta.to_string();
        assert!(text.contains("a = @T(<M0: a / 2>, <M1: a + 2>, <M2: a * 2>)"), "{text}");
        assert!(text.contains("while @C(i < counts):"), "{text}");
        assert!(text.contains("$f = wrap(f)"));
    }

    #[test]
    fn restriction_and_projection() {
        let ast = parse_program(PROCESS).unwrap();
        let pts = curated(&ast, &[(BinOp::Div, &[BinOp::Add, BinOp::Mul])]);
        let meta = generate_meta_mutant(&ast, &pts);
        let only = meta.restrict_meta(&BTreeSet::from([MutantId(1)]));
        assert!(only.to_string().contains("a = @T(<M0: a / 2>, <M1: a + 2>)"));
        assert_eq!(meta.restrict_meta(&meta.mutant_ids().collect()), meta);
        assert!(meta.restrict_meta(&BTreeSet::new()).to_string().contains("@T(<M0: a / 2>)"));
        assert_eq!(meta.erase(), ast);
        assert!(meta.mutant_ast(MutantId(2)).to_string().contains("a = a * 2"));
    }

    #[test]
    fn zero_points_is_wrapping_only() {
        let ast = parse_program("def f(a):\n  if a:\n    return 1\n  return 2\n").unwrap();
        let meta = generate_meta_mutant(&ast, &[]);
        assert!(meta.mutants.is_empty());
        assert!(meta.functions.iter().all(|f| f.wrapped));
        assert_eq!(meta.erase(), ast);
    }

    #[test]
    fn mutant_rendering_keeps_structure() {
        let ast = parse_program("def f(a, b, c):\n  return a + b * c\n").unwrap();
        let meta = generate_meta_mutant(&ast, &discover_mutation_points(&ast));
        // Point 1 is `*`; its first replacement is `+`, then `-`, ...; `<<` binds looser than `+`.
        let shl = meta.mutants.iter().find(|m| m.point == 1 && m.replacement == BinOp::Shl).unwrap();
        assert_eq!(meta.mutant_ast(shl.id).to_string(), "def f(a, b, c):\n  return a + (b << c)\n");
    }
}
