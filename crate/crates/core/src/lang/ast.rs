//! Syntax tree for the mini-language and its pretty-printer.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::value::{write_float, write_str_literal};

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl Loc {
    pub fn new(line: u32, col: u32) -> Self {
        Loc { line, col }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Binary operators. Arithmetic and comparison operators are the mutation
/// catalog; `and`/`or` are separate short-circuit nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Shl,
    Shr,
    BitOr,
    BitXor,
    BitAnd,
    FloorDiv,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// Mutation class of an operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpClass {
    Arithmetic,
    Comparison,
}

impl BinOp {
    /// Arithmetic catalog in mutation order.
    pub const ARITHMETIC: [BinOp; 11] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Mod,
        BinOp::Shl,
        BinOp::Shr,
        BinOp::BitOr,
        BinOp::BitXor,
        BinOp::BitAnd,
        BinOp::FloorDiv,
    ];

    /// Comparison catalog in mutation order.
    pub const COMPARISON: [BinOp; 6] = [
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
    ];

    pub fn class(self) -> OpClass {
        match self {
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                OpClass::Comparison
            }
            _ => OpClass::Arithmetic,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::BitOr => "|",
            BinOp::BitXor => "^",
            BinOp::BitAnd => "&",
            BinOp::FloorDiv => "//",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        BinOp::ARITHMETIC
            .iter()
            .chain(BinOp::COMPARISON.iter())
            .copied()
            .find(|op| op.symbol() == s)
    }

    /// Binding strength; higher binds tighter. Mirrors Python.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::BitOr => 5,
            BinOp::BitXor => 6,
            BinOp::BitAnd => 7,
            BinOp::Shl | BinOp::Shr => 8,
            BinOp::Add | BinOp::Sub => 9,
            BinOp::Mul | BinOp::Div | BinOp::FloorDiv | BinOp::Mod => 10,
        }
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicOp {
    And,
    Or,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub loc: Loc,
    pub kind: ExprKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Lit(Literal),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    /// Arithmetic or comparison. `loc` of the enclosing [`Expr`] is the operator token.
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Logic(LogicOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    List(Vec<Expr>),
    Index(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub loc: Loc,
    pub kind: StmtKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Assign(String, Expr),
    AugAssign(String, BinOp, Expr),
    While(Expr, Vec<Stmt>),
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    Return(Option<Expr>),
    Assert(Expr),
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDef {
    pub loc: Loc,
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
}

impl FunctionDef {
    pub fn is_test(&self) -> bool {
        self.name.starts_with("test_")
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Ast {
    pub functions: Vec<FunctionDef>,
}

impl Ast {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Names of the test entry points, in source order.
    pub fn tests(&self) -> Vec<&str> {
        self.functions
            .iter()
            .filter(|f| f.is_test())
            .map(|f| f.name.as_str())
            .collect()
    }

    /// Copy with every location zeroed, for structural comparison.
    pub fn without_locations(&self) -> Ast {
        fn expr(e: &Expr) -> Expr {
            let kind = match &e.kind {
                ExprKind::Lit(l) => ExprKind::Lit(l.clone()),
                ExprKind::Var(v) => ExprKind::Var(v.clone()),
                ExprKind::Unary(op, a) => ExprKind::Unary(*op, Box::new(expr(a))),
                ExprKind::Binary(op, a, b) => {
                    ExprKind::Binary(*op, Box::new(expr(a)), Box::new(expr(b)))
                }
                ExprKind::Logic(op, a, b) => {
                    ExprKind::Logic(*op, Box::new(expr(a)), Box::new(expr(b)))
                }
                ExprKind::Call(n, args) => ExprKind::Call(n.clone(), args.iter().map(expr).collect()),
                ExprKind::List(items) => ExprKind::List(items.iter().map(expr).collect()),
                ExprKind::Index(a, b) => ExprKind::Index(Box::new(expr(a)), Box::new(expr(b))),
            };
            Expr { loc: Loc::default(), kind }
        }
        fn block(b: &[Stmt]) -> Vec<Stmt> {
            b.iter().map(stmt).collect()
        }
        fn stmt(s: &Stmt) -> Stmt {
            let kind = match &s.kind {
                StmtKind::Assign(n, e) => StmtKind::Assign(n.clone(), expr(e)),
                StmtKind::AugAssign(n, op, e) => StmtKind::AugAssign(n.clone(), *op, expr(e)),
                StmtKind::While(c, b) => StmtKind::While(expr(c), block(b)),
                StmtKind::If(c, t, e) => StmtKind::If(expr(c), block(t), block(e)),
                StmtKind::Return(e) => StmtKind::Return(e.as_ref().map(expr)),
                StmtKind::Assert(e) => StmtKind::Assert(expr(e)),
                StmtKind::Expr(e) => StmtKind::Expr(expr(e)),
            };
            Stmt { loc: Loc::default(), kind }
        }
        Ast {
            functions: self
                .functions
                .iter()
                .map(|f| FunctionDef {
                    loc: Loc::default(),
                    name: f.name.clone(),
                    params: f.params.clone(),
                    body: block(&f.body),
                })
                .collect(),
        }
    }
}

// ---- pretty-printing -------------------------------------------------------

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_NOT: u8 = 3;
const PREC_UNARY: u8 = 11;
const PREC_ATOM: u8 = 12;

pub(crate) fn expr_precedence(kind: &ExprKind) -> u8 {
    match kind {
        ExprKind::Logic(LogicOp::Or, ..) => PREC_OR,
        ExprKind::Logic(LogicOp::And, ..) => PREC_AND,
        ExprKind::Unary(UnaryOp::Not, _) => PREC_NOT,
        ExprKind::Unary(UnaryOp::Neg, _) => PREC_UNARY,
        ExprKind::Binary(op, ..) => op.precedence(),
        _ => PREC_ATOM,
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Float(v) => write_float(f, *v),
            Literal::Bool(true) => f.write_str("True"),
            Literal::Bool(false) => f.write_str("False"),
            Literal::Str(s) => write_str_literal(f, s),
        }
    }
}

/// Writes `e`, parenthesized when its precedence is below `min`.
pub(crate) fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    let prec = expr_precedence(&e.kind);
    if prec < min {
        f.write_str("(")?;
        write_expr(f, e, 0)?;
        return f.write_str(")");
    }
    match &e.kind {
        ExprKind::Lit(l) => write!(f, "{l}"),
        ExprKind::Var(v) => f.write_str(v),
        ExprKind::Unary(UnaryOp::Neg, a) => {
            f.write_str("-")?;
            write_expr(f, a, PREC_UNARY)
        }
        ExprKind::Unary(UnaryOp::Not, a) => {
            f.write_str("not ")?;
            write_expr(f, a, PREC_NOT)
        }
        ExprKind::Binary(op, a, b) => write_binary(f, *op, a, b, |f, x, m| write_expr(f, x, m)),
        ExprKind::Logic(op, a, b) => {
            let (p, kw) = match op {
                LogicOp::And => (PREC_AND, "and"),
                LogicOp::Or => (PREC_OR, "or"),
            };
            write_expr(f, a, p)?;
            write!(f, " {kw} ")?;
            write_expr(f, b, p + 1)
        }
        ExprKind::Call(name, args) => {
            write!(f, "{name}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_expr(f, a, 0)?;
            }
            f.write_str(")")
        }
        ExprKind::List(items) => {
            f.write_str("[")?;
            for (i, a) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_expr(f, a, 0)?;
            }
            f.write_str("]")
        }
        ExprKind::Index(a, i) => {
            write_expr(f, a, PREC_ATOM)?;
            f.write_str("[")?;
            write_expr(f, i, 0)?;
            f.write_str("]")
        }
    }
}

/// Shared by the plain and meta printers. Comparisons do not chain, so both
/// operands of a comparison need a strictly tighter precedence.
pub(crate) fn write_binary<E>(
    f: &mut fmt::Formatter<'_>,
    op: BinOp,
    a: &E,
    b: &E,
    mut sub: impl FnMut(&mut fmt::Formatter<'_>, &E, u8) -> fmt::Result,
) -> fmt::Result {
    let p = op.precedence();
    let left_min = if op.class() == OpClass::Comparison { p + 1 } else { p };
    sub(f, a, left_min)?;
    write!(f, " {} ", op.symbol())?;
    sub(f, b, p + 1)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

fn write_block(f: &mut fmt::Formatter<'_>, body: &[Stmt], depth: usize) -> fmt::Result {
    for s in body {
        write_stmt(f, s, depth)?;
    }
    Ok(())
}

fn write_stmt(f: &mut fmt::Formatter<'_>, s: &Stmt, depth: usize) -> fmt::Result {
    let pad = "  ".repeat(depth);
    match &s.kind {
        StmtKind::Assign(n, e) => writeln!(f, "{pad}{n} = {e}"),
        StmtKind::AugAssign(n, op, e) => writeln!(f, "{pad}{n} {}= {e}", op.symbol()),
        StmtKind::While(c, body) => {
            writeln!(f, "{pad}while {c}:")?;
            write_block(f, body, depth + 1)
        }
        StmtKind::If(c, then, els) => {
            writeln!(f, "{pad}if {c}:")?;
            write_block(f, then, depth + 1)?;
            write_else(f, els, depth)
        }
        StmtKind::Return(None) => writeln!(f, "{pad}return"),
        StmtKind::Return(Some(e)) => writeln!(f, "{pad}return {e}"),
        StmtKind::Assert(e) => writeln!(f, "{pad}assert {e}"),
        StmtKind::Expr(e) => writeln!(f, "{pad}{e}"),
    }
}

fn write_else(f: &mut fmt::Formatter<'_>, els: &[Stmt], depth: usize) -> fmt::Result {
    if els.is_empty() {
        return Ok(());
    }
    let pad = "  ".repeat(depth);
    if let [Stmt { kind: StmtKind::If(c, then, rest), .. }] = els {
        writeln!(f, "{pad}elif {c}:")?;
        write_block(f, then, depth + 1)?;
        return write_else(f, rest, depth);
    }
    writeln!(f, "{pad}else:")?;
    write_block(f, els, depth + 1)
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, func) in self.functions.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "def {}({}):", func.name, func.params.join(", "))?;
            write_block(f, &func.body, 1)?;
        }
        Ok(())
    }
}
