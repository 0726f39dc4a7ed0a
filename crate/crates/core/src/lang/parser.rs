use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::LangError;

/// Parses one source document into function and test definitions.
///
/// Names are not resolved here; see [`super::check`].
pub fn parse_document(file: &str, src: &str) -> Result<(Vec<FunctionDef>, Vec<TestDef>), LangError> {
    let tokens = tokenize(file, src)?;
    let mut parser = Parser { file, tokens, pos: 0 };
    let mut functions = Vec::new();
    let mut tests = Vec::new();
    loop {
        match parser.peek() {
            Tok::Eof => break,
            Tok::Kw("fn") => functions.push(parser.function()?),
            Tok::Kw("test") => tests.push(parser.test()?),
            _ => return Err(parser.unexpected("`fn` or `test`")),
        }
    }
    Ok((functions, tests))
}

struct Parser<'a> {
    file: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_end(&self) -> usize {
        self.tokens[self.pos.saturating_sub(1)].span.end
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn unexpected(&self, expected: &str) -> LangError {
        let span = self.span();
        LangError::Syntax {
            file: self.file.to_string(),
            line: span.line,
            col: span.col,
            message: format!("expected {expected}, found {}", self.peek().describe()),
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Tok::Punct(q) if *q == p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<Span, LangError> {
        let span = self.span();
        if self.eat_punct(p) {
            Ok(span)
        } else {
            Err(self.unexpected(&format!("`{p}`")))
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Kw(k) if *k == kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, LangError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn ty(&mut self) -> Result<Type, LangError> {
        if let Tok::Kw(k) = self.peek() {
            if let Some(ty) = Type::from_keyword(k) {
                self.bump();
                return Ok(ty);
            }
        }
        Err(self.unexpected("type"))
    }

    fn function(&mut self) -> Result<FunctionDef, LangError> {
        let start = self.span();
        self.bump();
        let name = self.ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.eat_punct(")") {
            loop {
                let pname = self.ident()?;
                self.expect_punct(":")?;
                let ty = self.ty()?;
                params.push(Param { name: pname, ty });
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        self.expect_punct("->")?;
        let return_type = self.ty()?;
        let body_start = self.span();
        let body = self.block()?;
        let end = self.prev_end();
        Ok(FunctionDef {
            name,
            params,
            return_type,
            body,
            file: self.file.to_string(),
            span: Span { end, ..start },
            body_span: Span { end, ..body_start },
            frame_size: 0,
        })
    }

    fn test(&mut self) -> Result<TestDef, LangError> {
        let start = self.span();
        self.bump();
        let name = self.ident()?;
        let body = self.block()?;
        let end = self.prev_end();
        Ok(TestDef {
            name,
            body,
            file: self.file.to_string(),
            span: Span { end, ..start },
            frame_size: 0,
        })
    }

    fn block(&mut self) -> Result<Block, LangError> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.eat_punct("}") {
            if *self.peek() == Tok::Eof {
                return Err(self.unexpected("`}`"));
            }
            stmts.push(self.stmt()?);
        }
        Ok(Block { stmts })
    }

    fn stmt(&mut self) -> Result<Stmt, LangError> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Kw("let") => {
                self.bump();
                let name = self.ident()?;
                self.expect_punct("=")?;
                let value = self.expr()?;
                self.expect_punct(";")?;
                StmtKind::Let { name, slot: 0, value }
            }
            Tok::Kw("if") => {
                self.bump();
                let cond = self.expr()?;
                let then = self.block()?;
                let otherwise = if self.eat_kw("else") { Some(self.block()?) } else { None };
                StmtKind::If { cond, then, otherwise, branch: 0 }
            }
            Tok::Kw("while") => {
                self.bump();
                let cond = self.expr()?;
                let body = self.block()?;
                StmtKind::While { cond, body, branch: 0 }
            }
            Tok::Kw("return") => {
                self.bump();
                let value = if self.eat_punct(";") {
                    None
                } else {
                    let e = self.expr()?;
                    self.expect_punct(";")?;
                    Some(e)
                };
                StmtKind::Return(value)
            }
            Tok::Kw("assert") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(";")?;
                StmtKind::Assert(e)
            }
            Tok::Kw("spawn") => {
                self.bump();
                let name = self.ident()?;
                let call = self.call_tail(name)?;
                self.expect_punct(";")?;
                StmtKind::Spawn(call)
            }
            Tok::Ident(name) => match self.peek_at(1) {
                Tok::Punct("=") => {
                    self.bump();
                    self.bump();
                    let value = self.expr()?;
                    self.expect_punct(";")?;
                    StmtKind::Assign { name, slot: 0, value }
                }
                Tok::Punct("(") => {
                    self.bump();
                    let call = self.call_tail(name)?;
                    self.expect_punct(";")?;
                    StmtKind::Call(call)
                }
                _ => {
                    self.bump();
                    return Err(self.unexpected("`=` or `(`"));
                }
            },
            _ => return Err(self.unexpected("statement")),
        };
        let end = self.prev_end();
        Ok(Stmt { kind, span: Span { end, ..start }, index: 0 })
    }

    fn call_tail(&mut self, name: String) -> Result<Call, LangError> {
        self.expect_punct("(")?;
        let args = self.args(")")?;
        Ok(Call { name, args, target: Callee::Unresolved })
    }

    fn args(&mut self, close: &str) -> Result<Vec<Expr>, LangError> {
        let mut args = Vec::new();
        if self.eat_punct(close) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat_punct(close) {
                return Ok(args);
            }
            self.expect_punct(",")?;
        }
    }

    fn expr(&mut self) -> Result<Expr, LangError> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinOp> {
        let Tok::Punct(p) = self.peek() else { return None };
        Some(match *p {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Rem,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "&&" => BinOp::And,
            "||" => BinOp::Or,
            _ => return None,
        })
    }

    // Precedence climbing; all binary operators are left-associative.
    fn binary(&mut self, min_prec: u8) -> Result<Expr, LangError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            let span = Span { end: rhs.span.end, ..lhs.span };
            lhs = Expr { kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, LangError> {
        let start = self.span();
        let op = if self.eat_punct("!") {
            UnOp::Not
        } else if self.eat_punct("-") {
            UnOp::Neg
        } else {
            return self.primary();
        };
        let operand = self.unary()?;
        let span = Span { end: operand.span.end, ..start };
        Ok(Expr { kind: ExprKind::Unary { op, operand: Box::new(operand) }, span })
    }

    fn primary(&mut self) -> Result<Expr, LangError> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                ExprKind::Int(v)
            }
            Tok::Float(v) => {
                self.bump();
                ExprKind::Float(v)
            }
            Tok::Str(s) => {
                self.bump();
                ExprKind::Str(s)
            }
            Tok::Kw("true") => {
                self.bump();
                ExprKind::Bool(true)
            }
            Tok::Kw("false") => {
                self.bump();
                ExprKind::Bool(false)
            }
            Tok::Kw("null") => {
                self.bump();
                ExprKind::Null
            }
            Tok::Kw("box") => {
                self.bump();
                self.expect_punct("(")?;
                let inner = self.expr()?;
                self.expect_punct(")")?;
                ExprKind::Box(Box::new(inner))
            }
            Tok::Punct("[") => {
                self.bump();
                ExprKind::Array(self.args("]")?)
            }
            Tok::Punct("(") => {
                self.bump();
                let inner = self.expr()?;
                self.expect_punct(")")?;
                return Ok(Expr { span: Span { end: self.prev_end(), ..start }, ..inner });
            }
            Tok::Ident(name) => {
                self.bump();
                if matches!(self.peek(), Tok::Punct("(")) {
                    ExprKind::Call(self.call_tail(name)?)
                } else {
                    ExprKind::Var { name, slot: 0 }
                }
            }
            _ => return Err(self.unexpected("expression")),
        };
        Ok(Expr { kind, span: Span { end: self.prev_end(), ..start } })
    }
}
