//! The mini-language: lexer, parser, syntax tree, values, and the reference
//! evaluator used by the traditional strategy.

pub mod ast;
pub mod builtins;
mod interp;
mod lexer;
pub mod ops;
mod parser;
pub mod value;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{Ast, BinOp, Expr, ExprKind, FunctionDef, Literal, Loc, LogicOp, OpClass, Stmt, StmtKind, UnaryOp};
pub use interp::{eval_plain, Evaluator, PlainRun, DEFAULT_STEP_CAP};
pub use parser::parse_program;
pub use value::PlainValue;

/// Maximum number of user-function frames. Exceeding it raises [`ErrorKind::Recursion`].
pub const MAX_CALL_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ParseError {
    pub fn new(line: u32, col: u32, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}

/// Category of a runtime failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    ZeroDivision,
    Overflow,
    Type,
    Value,
    Index,
    Name,
    Arity,
    Recursion,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::ZeroDivision => "div-by-zero",
            ErrorKind::Overflow => "overflow",
            ErrorKind::Type => "type",
            ErrorKind::Value => "value",
            ErrorKind::Index => "index",
            ErrorKind::Name => "name",
            ErrorKind::Arity => "arity",
            ErrorKind::Recursion => "recursion",
        })
    }
}

/// How a single execution of a test (or any entry function) ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum TestOutcome {
    Pass,
    AssertionFailure { loc: Loc },
    RuntimeException { kind: ErrorKind, loc: Loc },
    Timeout,
}

impl TestOutcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, TestOutcome::Pass)
    }
}

impl fmt::Display for TestOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestOutcome::Pass => f.write_str("pass"),
            TestOutcome::AssertionFailure { loc } => write!(f, "assertion-failure({loc})"),
            TestOutcome::RuntimeException { kind, loc } => write!(f, "runtime-exception({kind}, {loc})"),
            TestOutcome::Timeout => f.write_str("timeout"),
        }
    }
}
