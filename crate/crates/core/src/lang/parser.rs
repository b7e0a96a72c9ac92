use std::collections::HashSet;

use super::ast::*;
use super::builtins::Builtin;
use super::lexer::{tokenize, Keyword, Tok, Token};
use super::ParseError;

/// Parses a complete program. Only `def` blocks may appear at top level.
pub fn parse_program(source: &str) -> Result<Ast, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut functions = Vec::new();
    let mut seen = HashSet::new();
    loop {
        match &p.peek().tok {
            Tok::Eof => break,
            Tok::Newline => {
                p.bump();
            }
            Tok::Kw(Keyword::Def) => {
                let f = p.function()?;
                if Builtin::from_name(&f.name).is_some() {
                    return Err(p.err_at(f.loc, format!("function `{}` shadows a builtin", f.name)));
                }
                if !seen.insert(f.name.clone()) {
                    return Err(p.err_at(f.loc, format!("duplicate function `{}`", f.name)));
                }
                functions.push(f);
            }
            _ => {
                let loc = p.peek().loc;
                return Err(p.err_at(loc, "top-level statement outside a function"));
            }
        }
    }
    Ok(Ast { functions })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, loc: Loc, msg: impl Into<String>) -> ParseError {
        ParseError::new(loc.line, loc.col, msg)
    }

    fn unexpected(&self, what: &str) -> ParseError {
        let t = self.peek();
        self.err_at(t.loc, format!("expected {what}, found {:?}", t.tok))
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if matches!(&self.peek().tok, Tok::Op(o) if *o == op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<Loc, ParseError> {
        let loc = self.peek().loc;
        if self.eat_op(op) {
            Ok(loc)
        } else {
            Err(self.unexpected(&format!("`{op}`")))
        }
    }

    fn eat_kw(&mut self, kw: Keyword) -> bool {
        if self.peek().tok == Tok::Kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_name(&mut self) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Name(n) => {
                let n = n.clone();
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    fn expect_newline(&mut self) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Newline {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("end of line"))
        }
    }

    fn function(&mut self) -> Result<FunctionDef, ParseError> {
        let loc = self.bump().loc;
        let name = self.expect_name()?;
        self.expect_op("(")?;
        let mut params = Vec::new();
        if !self.eat_op(")") {
            loop {
                let p = self.expect_name()?;
                if params.contains(&p) {
                    return Err(self.err_at(loc, format!("duplicate parameter `{p}`")));
                }
                params.push(p);
                if self.eat_op(")") {
                    break;
                }
                self.expect_op(",")?;
            }
        }
        self.expect_op(":")?;
        let body = self.block()?;
        Ok(FunctionDef { loc, name, params, body })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect_newline()?;
        if self.peek().tok != Tok::Indent {
            return Err(self.unexpected("an indented block"));
        }
        self.bump();
        let mut body = Vec::new();
        while !matches!(self.peek().tok, Tok::Dedent | Tok::Eof) {
            body.push(self.statement()?);
        }
        if self.peek().tok == Tok::Dedent {
            self.bump();
        }
        Ok(body)
    }

    fn statement(&mut self) -> Result<Stmt, ParseError> {
        let loc = self.peek().loc;
        let kind = match self.peek().tok.clone() {
            Tok::Kw(Keyword::While) => {
                self.bump();
                let cond = self.expr()?;
                self.expect_op(":")?;
                StmtKind::While(cond, self.block()?)
            }
            Tok::Kw(Keyword::If) => {
                self.bump();
                return self.if_tail(loc);
            }
            Tok::Kw(Keyword::Return) => {
                self.bump();
                let value = if self.peek().tok == Tok::Newline {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect_newline()?;
                StmtKind::Return(value)
            }
            Tok::Kw(Keyword::Assert) => {
                self.bump();
                let e = self.expr()?;
                self.expect_newline()?;
                StmtKind::Assert(e)
            }
            Tok::Kw(Keyword::Def) => return Err(self.err_at(loc, "nested functions are not supported")),
            Tok::Indent => return Err(self.err_at(loc, "unexpected indent")),
            Tok::Name(name) => {
                if let Tok::Op(op) = self.peek_at(1) {
                    if *op == "=" {
                        self.bump();
                        self.bump();
                        let e = self.expr()?;
                        self.expect_newline()?;
                        return Ok(Stmt { loc, kind: StmtKind::Assign(name, e) });
                    }
                    if op.len() >= 2 && op.ends_with('=') && !matches!(*op, "==" | "!=" | "<=" | ">=") {
                        let bin = BinOp::from_symbol(&op[..op.len() - 1]).expect("augmented operator");
                        self.bump();
                        self.bump();
                        let e = self.expr()?;
                        self.expect_newline()?;
                        return Ok(Stmt { loc, kind: StmtKind::AugAssign(name, bin, e) });
                    }
                }
                let e = self.expr()?;
                self.expect_newline()?;
                StmtKind::Expr(e)
            }
            _ => {
                let e = self.expr()?;
                self.expect_newline()?;
                StmtKind::Expr(e)
            }
        };
        Ok(Stmt { loc, kind })
    }

    // After `if` / `elif` has been consumed.
    fn if_tail(&mut self, loc: Loc) -> Result<Stmt, ParseError> {
        let cond = self.expr()?;
        self.expect_op(":")?;
        let then = self.block()?;
        let els = if self.peek().tok == Tok::Kw(Keyword::Elif) {
            let elif_loc = self.bump().loc;
            vec![self.if_tail(elif_loc)?]
        } else if self.eat_kw(Keyword::Else) {
            self.expect_op(":")?;
            self.block()?
        } else {
            Vec::new()
        };
        Ok(Stmt { loc, kind: StmtKind::If(cond, then, els) })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.peek().tok == Tok::Kw(Keyword::Or) {
            let loc = self.bump().loc;
            let rhs = self.and_expr()?;
            lhs = Expr { loc, kind: ExprKind::Logic(LogicOp::Or, Box::new(lhs), Box::new(rhs)) };
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.not_expr()?;
        while self.peek().tok == Tok::Kw(Keyword::And) {
            let loc = self.bump().loc;
            let rhs = self.not_expr()?;
            lhs = Expr { loc, kind: ExprKind::Logic(LogicOp::And, Box::new(lhs), Box::new(rhs)) };
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Kw(Keyword::Not) {
            let loc = self.bump().loc;
            let e = self.not_expr()?;
            return Ok(Expr { loc, kind: ExprKind::Unary(UnaryOp::Not, Box::new(e)) });
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.binary(5)?;
        if let Some((op, loc)) = self.peek_binop(4) {
            self.bump();
            let rhs = self.binary(5)?;
            if self.peek_binop(4).is_some() {
                return Err(self.err_at(self.peek().loc, "chained comparisons are not supported"));
            }
            return Ok(Expr { loc, kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)) });
        }
        Ok(lhs)
    }

    fn peek_binop(&self, prec: u8) -> Option<(BinOp, Loc)> {
        match &self.peek().tok {
            Tok::Op(o) => BinOp::from_symbol(o)
                .filter(|op| op.precedence() == prec)
                .map(|op| (op, self.peek().loc)),
            _ => None,
        }
    }

    // Left-associative arithmetic levels 5 (`|`) through 10 (`*`).
    fn binary(&mut self, prec: u8) -> Result<Expr, ParseError> {
        if prec > 10 {
            return self.unary();
        }
        let mut lhs = self.binary(prec + 1)?;
        while let Some((op, loc)) = self.peek_binop(prec) {
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr { loc, kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek().tok, Tok::Op("-")) {
            let loc = self.bump().loc;
            let e = self.unary()?;
            return Ok(Expr { loc, kind: ExprKind::Unary(UnaryOp::Neg, Box::new(e)) });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while matches!(self.peek().tok, Tok::Op("[")) {
            let loc = self.bump().loc;
            let idx = self.expr()?;
            self.expect_op("]")?;
            e = Expr { loc, kind: ExprKind::Index(Box::new(e), Box::new(idx)) };
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        let loc = t.loc;
        let kind = match t.tok {
            Tok::Int(i) => {
                self.bump();
                ExprKind::Lit(Literal::Int(i))
            }
            Tok::Float(v) => {
                self.bump();
                ExprKind::Lit(Literal::Float(v))
            }
            Tok::Str(s) => {
                self.bump();
                ExprKind::Lit(Literal::Str(s))
            }
            Tok::Kw(Keyword::True) => {
                self.bump();
                ExprKind::Lit(Literal::Bool(true))
            }
            Tok::Kw(Keyword::False) => {
                self.bump();
                ExprKind::Lit(Literal::Bool(false))
            }
            Tok::Name(n) => {
                self.bump();
                if self.eat_op("(") {
                    ExprKind::Call(n, self.sequence(")")?)
                } else {
                    ExprKind::Var(n)
                }
            }
            Tok::Op("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_op(")")?;
                return Ok(e);
            }
            Tok::Op("[") => {
                self.bump();
                ExprKind::List(self.sequence("]")?)
            }
            _ => return Err(self.unexpected("an expression")),
        };
        Ok(Expr { loc, kind })
    }

    fn sequence(&mut self, close: &str) -> Result<Vec<Expr>, ParseError> {
        let mut items = Vec::new();
        if self.eat_op(close) {
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            if self.eat_op(close) {
                return Ok(items);
            }
            self.expect_op(",")?;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let ast = parse_program("def f(a):\n  return a\n").unwrap();
        assert_eq!(ast.functions.len(), 1);
        assert_eq!(ast.functions[0].name, "f");
        assert_eq!(ast.functions[0].body.len(), 1);
        assert!(matches!(ast.functions[0].body[0].kind, StmtKind::Return(Some(_))));
        assert!(ast.tests().is_empty());
    }

    #[test]
    fn rejects_top_level_statement() {
        let err = parse_program("x = 1\n").unwrap_err();
        assert!(err.message.contains("top-level statement"), "{err}");
        assert_eq!((err.line, err.col), (1, 1));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_program("def f(a):\n  return a +\n").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn precedence_matches_python() {
        let ast = parse_program("def f(a, b):\n  return a + b * 2 < 3 and not a == b\n").unwrap();
        let StmtKind::Return(Some(e)) = &ast.functions[0].body[0].kind else { panic!() };
        assert_eq!(e.to_string(), "a + b * 2 < 3 and not a == b");
        let ExprKind::Logic(LogicOp::And, lhs, rhs) = &e.kind else { panic!("{e:?}") };
        assert!(matches!(lhs.kind, ExprKind::Binary(BinOp::Lt, ..)));
        assert!(matches!(rhs.kind, ExprKind::Unary(UnaryOp::Not, _)));
    }

    #[test]
    fn operator_location_is_the_token() {
        let ast = parse_program("def f(a, b):\n  return a  +  b\n").unwrap();
        let StmtKind::Return(Some(e)) = &ast.functions[0].body[0].kind else { panic!() };
        assert_eq!(e.loc, Loc::new(2, 13));
    }

    #[test]
    fn elif_and_augassign() {
        let src = "def f(a):\n  if a < 0:\n    a -= 1\n  elif a > 0:\n    a //= 2\n  else:\n    a = 7\n  return a\n";
        let ast = parse_program(src).unwrap();
        assert_eq!(ast.to_string(), src);
    }

    #[test]
    fn rejects_chained_comparison_and_duplicates() {
        assert!(parse_program("def f(a):\n  return 1 < a < 3\n").is_err());
        assert!(parse_program("def f():\n  return 1\ndef f():\n  return 2\n").is_err());
        assert!(parse_program("def len(x):\n  return 1\n").is_err());
    }

    #[test]
    fn comments_blank_lines_and_strings() {
        let src = "# header\n\ndef f():\n  # inside\n  s = \"a#b\" # trailing\n\n  return s\n";
        let ast = parse_program(src).unwrap();
        assert_eq!(ast.functions[0].body.len(), 2);
    }

    #[test]
    fn bad_dedent() {
        assert!(parse_program("def f():\n    x = 1\n  return x\n").is_err());
    }
}
