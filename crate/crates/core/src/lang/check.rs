//! Name resolution, slot assignment, statement numbering and static typing.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::LangError;

/// Static type of an expression. `Any` comes from untyped builtins (`get`, `deref`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SType {
    Of(Type),
    Null,
    Any,
}

impl SType {
    fn describe(self) -> String {
        match self {
            SType::Of(t) => t.to_string(),
            SType::Null => "null".into(),
            SType::Any => "any".into(),
        }
    }

    fn is_numeric(self) -> bool {
        matches!(self, SType::Of(Type::Int) | SType::Of(Type::Float) | SType::Any)
    }
}

fn assignable(expected: Type, actual: SType) -> bool {
    match actual {
        SType::Any => expected != Type::Void,
        SType::Null => expected == Type::Ref,
        SType::Of(t) => t == expected,
    }
}

/// Resolves and type-checks a freshly parsed program in place.
pub fn check_program(program: &mut Program) -> Result<(), LangError> {
    check_names(program)?;
    let signatures: Vec<(Vec<Type>, Type)> = program
        .functions
        .iter()
        .map(|f| (f.params.iter().map(|p| p.ty).collect(), f.return_type))
        .collect();
    let fn_index: HashMap<String, usize> =
        program.functions.iter().enumerate().map(|(i, f)| (f.name.clone(), i)).collect();
    let tests: HashSet<String> = program.tests.iter().map(|t| t.name.clone()).collect();

    for func in &mut program.functions {
        let mut ck = BodyChecker::new(&func.file, &signatures, &fn_index, &tests, func.return_type);
        for param in &func.params {
            ck.declare(&param.name, SType::Of(param.ty));
        }
        ck.block(&mut func.body)?;
        if func.return_type != Type::Void && !definitely_returns(&func.body) {
            return Err(LangError::Type {
                file: func.file.clone(),
                line: func.span.line,
                col: func.span.col,
                message: format!(
                    "function `{}` returning {} can reach the end of its body without a return",
                    func.name, func.return_type
                ),
            });
        }
        func.frame_size = ck.max_slots;
    }
    for test in &mut program.tests {
        let mut ck = BodyChecker::new(&test.file, &signatures, &fn_index, &tests, Type::Void);
        ck.block(&mut test.body)?;
        test.frame_size = ck.max_slots;
    }
    Ok(())
}

fn check_names(program: &Program) -> Result<(), LangError> {
    let mut seen: HashMap<&str, (&str, u32)> = HashMap::new();
    let items = program
        .functions
        .iter()
        .map(|f| (f.name.as_str(), f.file.as_str(), f.span.line))
        .chain(program.tests.iter().map(|t| (t.name.as_str(), t.file.as_str(), t.span.line)));
    for (name, file, line) in items {
        if Builtin::from_name(name).is_some() {
            return Err(LangError::DuplicateName {
                name: name.to_string(),
                file: file.to_string(),
                line,
                previous: "builtin".to_string(),
            });
        }
        if let Some((prev_file, prev_line)) = seen.insert(name, (file, line)) {
            return Err(LangError::DuplicateName {
                name: name.to_string(),
                file: file.to_string(),
                line,
                previous: format!("{prev_file}:{prev_line}"),
            });
        }
    }
    Ok(())
}

/// True if every control path through `block` ends in a `return`.
pub(crate) fn definitely_returns(block: &Block) -> bool {
    block.stmts.iter().any(|stmt| match &stmt.kind {
        StmtKind::Return(_) => true,
        StmtKind::If { then, otherwise: Some(other), .. } => {
            definitely_returns(then) && definitely_returns(other)
        }
        _ => false,
    })
}

struct BodyChecker<'a> {
    file: &'a str,
    signatures: &'a [(Vec<Type>, Type)],
    fn_index: &'a HashMap<String, usize>,
    tests: &'a HashSet<String>,
    return_type: Type,
    scopes: Vec<HashMap<String, (usize, SType)>>,
    next_slot: usize,
    max_slots: usize,
    next_stmt: u32,
    next_branch: u32,
}

impl<'a> BodyChecker<'a> {
    fn new(
        file: &'a str,
        signatures: &'a [(Vec<Type>, Type)],
        fn_index: &'a HashMap<String, usize>,
        tests: &'a HashSet<String>,
        return_type: Type,
    ) -> Self {
        BodyChecker {
            file,
            signatures,
            fn_index,
            tests,
            return_type,
            scopes: vec![HashMap::new()],
            next_slot: 0,
            max_slots: 0,
            next_stmt: 0,
            next_branch: 0,
        }
    }

    fn type_err(&self, span: Span, message: String) -> LangError {
        LangError::Type { file: self.file.to_string(), line: span.line, col: span.col, message }
    }

    fn declare(&mut self, name: &str, ty: SType) -> usize {
        let slot = self.next_slot;
        self.next_slot += 1;
        self.max_slots = self.max_slots.max(self.next_slot);
        let ty = if ty == SType::Null { SType::Of(Type::Ref) } else { ty };
        self.scopes.last_mut().expect("scope").insert(name.to_string(), (slot, ty));
        slot
    }

    fn lookup(&self, name: &str) -> Option<(usize, SType)> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn block(&mut self, block: &mut Block) -> Result<(), LangError> {
        self.scopes.push(HashMap::new());
        let saved_slot = self.next_slot;
        for stmt in &mut block.stmts {
            self.stmt(stmt)?;
        }
        self.scopes.pop();
        self.next_slot = saved_slot;
        Ok(())
    }

    fn cond(&mut self, cond: &mut Expr, what: &str) -> Result<(), LangError> {
        let ty = self.expr(cond)?;
        if !matches!(ty, SType::Of(Type::Bool) | SType::Any) {
            return Err(self.type_err(cond.span, format!("{what} must be bool, found {}", ty.describe())));
        }
        Ok(())
    }

    fn stmt(&mut self, stmt: &mut Stmt) -> Result<(), LangError> {
        stmt.index = self.next_stmt;
        self.next_stmt += 1;
        let span = stmt.span;
        match &mut stmt.kind {
            StmtKind::Let { name, slot, value } => {
                let ty = self.expr(value)?;
                if ty == SType::Of(Type::Void) {
                    return Err(self.type_err(span, format!("cannot bind void value to `{name}`")));
                }
                *slot = self.declare(name, ty);
            }
            StmtKind::Assign { name, slot, value } => {
                let ty = self.expr(value)?;
                let Some((found, declared)) = self.lookup(name) else {
                    return Err(self.type_err(span, format!("assignment to undeclared variable `{name}`")));
                };
                let ok = match declared {
                    SType::Any => ty != SType::Of(Type::Void),
                    SType::Of(t) => assignable(t, ty),
                    SType::Null => unreachable!("null-typed locals are widened to ref"),
                };
                if !ok {
                    return Err(self.type_err(
                        span,
                        format!("cannot assign {} to `{name}` of type {}", ty.describe(), declared.describe()),
                    ));
                }
                *slot = found;
            }
            StmtKind::If { cond, then, otherwise, branch } => {
                *branch = self.next_branch;
                self.next_branch += 1;
                self.cond(cond, "if condition")?;
                self.block(then)?;
                if let Some(other) = otherwise {
                    self.block(other)?;
                }
            }
            StmtKind::While { cond, body, branch } => {
                *branch = self.next_branch;
                self.next_branch += 1;
                self.cond(cond, "while condition")?;
                self.block(body)?;
            }
            StmtKind::Return(value) => match (self.return_type, value) {
                (Type::Void, None) => {}
                (Type::Void, Some(e)) => {
                    return Err(self.type_err(e.span, "void body cannot return a value".into()));
                }
                (expected, None) => {
                    return Err(self.type_err(span, format!("missing return value of type {expected}")));
                }
                (expected, Some(e)) => {
                    let ty = self.expr(e)?;
                    if !assignable(expected, ty) {
                        return Err(self.type_err(
                            e.span,
                            format!("return type mismatch: expected {expected}, found {}", ty.describe()),
                        ));
                    }
                }
            },
            StmtKind::Assert(e) => self.cond(e, "assert operand")?,
            StmtKind::Spawn(call) => {
                let ty = self.call(call, span)?;
                if !matches!(call.target, Callee::Function(_)) || ty != SType::Of(Type::Void) {
                    return Err(self.type_err(
                        span,
                        format!("spawn target `{}` must be a void function", call.name),
                    ));
                }
            }
            StmtKind::Call(call) => {
                self.call(call, span)?;
            }
        }
        Ok(())
    }

    fn call(&mut self, call: &mut Call, span: Span) -> Result<SType, LangError> {
        let mut arg_types = Vec::with_capacity(call.args.len());
        for arg in &mut call.args {
            let ty = self.expr(arg)?;
            if ty == SType::Of(Type::Void) {
                return Err(self.type_err(arg.span, "void value used as argument".into()));
            }
            arg_types.push(ty);
        }
        if let Some(&idx) = self.fn_index.get(&call.name) {
            let (params, ret) = &self.signatures[idx];
            if params.len() != arg_types.len() {
                return Err(self.type_err(
                    span,
                    format!("`{}` expects {} argument(s), got {}", call.name, params.len(), arg_types.len()),
                ));
            }
            for (i, (p, a)) in params.iter().zip(&arg_types).enumerate() {
                if !assignable(*p, *a) {
                    return Err(self.type_err(
                        call.args[i].span,
                        format!("argument {} of `{}`: expected {p}, found {}", i + 1, call.name, a.describe()),
                    ));
                }
            }
            call.target = Callee::Function(idx);
            return Ok(SType::Of(*ret));
        }
        if let Some(builtin) = Builtin::from_name(&call.name) {
            if builtin.arity() != arg_types.len() {
                return Err(self.type_err(
                    span,
                    format!("`{}` expects {} argument(s), got {}", call.name, builtin.arity(), arg_types.len()),
                ));
            }
            let want: &[Type] = match builtin {
                Builtin::Len => &[Type::Arr],
                Builtin::Get => &[Type::Arr, Type::Int],
                Builtin::Deref => &[Type::Ref],
                Builtin::StrCat => &[Type::Str, Type::Str],
            };
            for (i, (p, a)) in want.iter().zip(&arg_types).enumerate() {
                if !assignable(*p, *a) {
                    return Err(self.type_err(
                        call.args[i].span,
                        format!("argument {} of `{}`: expected {p}, found {}", i + 1, call.name, a.describe()),
                    ));
                }
            }
            call.target = Callee::Builtin(builtin);
            return Ok(match builtin {
                Builtin::Len => SType::Of(Type::Int),
                Builtin::Get | Builtin::Deref => SType::Any,
                Builtin::StrCat => SType::Of(Type::Str),
            });
        }
        let what = if self.tests.contains(&call.name) { "test cases cannot be called" } else { "no such function" };
        Err(LangError::UnresolvedCall {
            name: call.name.clone(),
            file: self.file.to_string(),
            line: span.line,
            col: span.col,
            reason: what.to_string(),
        })
    }

    fn expr(&mut self, expr: &mut Expr) -> Result<SType, LangError> {
        let span = expr.span;
        Ok(match &mut expr.kind {
            ExprKind::Int(_) => SType::Of(Type::Int),
            ExprKind::Float(_) => SType::Of(Type::Float),
            ExprKind::Str(_) => SType::Of(Type::Str),
            ExprKind::Bool(_) => SType::Of(Type::Bool),
            ExprKind::Null => SType::Null,
            ExprKind::Array(items) => {
                for item in items {
                    if self.expr(item)? == SType::Of(Type::Void) {
                        return Err(self.type_err(span, "void value in array literal".into()));
                    }
                }
                SType::Of(Type::Arr)
            }
            ExprKind::Box(inner) => {
                if self.expr(inner)? == SType::Of(Type::Void) {
                    return Err(self.type_err(span, "cannot box a void value".into()));
                }
                SType::Of(Type::Ref)
            }
            ExprKind::Var { name, slot } => {
                let Some((found, ty)) = self.lookup(name) else {
                    return Err(self.type_err(span, format!("undeclared variable `{name}`")));
                };
                *slot = found;
                ty
            }
            ExprKind::Call(call) => self.call(call, span)?,
            ExprKind::Unary { op, operand } => {
                let ty = self.expr(operand)?;
                match op {
                    UnOp::Not if matches!(ty, SType::Of(Type::Bool) | SType::Any) => SType::Of(Type::Bool),
                    UnOp::Neg if ty.is_numeric() => ty,
                    _ => {
                        return Err(self.type_err(span, format!("invalid operand {} for unary operator", ty.describe())))
                    }
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let (l, r) = (self.expr(lhs)?, self.expr(rhs)?);
                let op = *op;
                let bad = || format!("operator `{}` cannot combine {} and {}", op.symbol(), l.describe(), r.describe());
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => {
                        if !(l.is_numeric() && r.is_numeric()) {
                            return Err(self.type_err(span, bad()));
                        }
                        match (l, r) {
                            (SType::Of(Type::Int), SType::Of(Type::Int)) => SType::Of(Type::Int),
                            (SType::Any, _) | (_, SType::Any) => SType::Any,
                            _ => SType::Of(Type::Float),
                        }
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        if !(l.is_numeric() && r.is_numeric()) {
                            return Err(self.type_err(span, bad()));
                        }
                        SType::Of(Type::Bool)
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if l == SType::Of(Type::Void) || r == SType::Of(Type::Void) {
                            return Err(self.type_err(span, bad()));
                        }
                        SType::Of(Type::Bool)
                    }
                    BinOp::And | BinOp::Or => {
                        let boolish = |t| matches!(t, SType::Of(Type::Bool) | SType::Any);
                        if !(boolish(l) && boolish(r)) {
                            return Err(self.type_err(span, bad()));
                        }
                        SType::Of(Type::Bool)
                    }
                }
            }
        })
    }
}
