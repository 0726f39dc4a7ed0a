//! Canonical pretty-printer: one statement per line, four-space indentation.

use std::fmt::Write;

use super::ast::*;

pub fn print_program(program: &Program) -> String {
    let mut out = String::new();
    for func in &program.functions {
        print_function(&mut out, func);
        out.push('\n');
    }
    for test in &program.tests {
        let _ = write!(out, "test {} ", test.name);
        print_block(&mut out, &test.body, 0);
        out.push_str("\n\n");
    }
    out
}

pub fn print_function(out: &mut String, func: &FunctionDef) {
    let params: Vec<String> = func.params.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect();
    let _ = write!(out, "fn {}({}) -> {} ", func.name, params.join(", "), func.return_type);
    print_block(out, &func.body, 0);
    out.push('\n');
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

pub fn print_block(out: &mut String, block: &Block, depth: usize) {
    if block.stmts.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    for stmt in &block.stmts {
        indent(out, depth + 1);
        print_stmt(out, stmt, depth + 1);
        out.push('\n');
    }
    indent(out, depth);
    out.push('}');
}

fn print_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    match &stmt.kind {
        StmtKind::Let { name, value, .. } => {
            let _ = write!(out, "let {name} = {};", expr_to_string(value));
        }
        StmtKind::Assign { name, value, .. } => {
            let _ = write!(out, "{name} = {};", expr_to_string(value));
        }
        StmtKind::If { cond, then, otherwise, .. } => {
            let _ = write!(out, "if {} ", expr_to_string(cond));
            print_block(out, then, depth);
            if let Some(other) = otherwise {
                out.push_str(" else ");
                print_block(out, other, depth);
            }
        }
        StmtKind::While { cond, body, .. } => {
            let _ = write!(out, "while {} ", expr_to_string(cond));
            print_block(out, body, depth);
        }
        StmtKind::Return(None) => out.push_str("return;"),
        StmtKind::Return(Some(e)) => {
            let _ = write!(out, "return {};", expr_to_string(e));
        }
        StmtKind::Assert(e) => {
            let _ = write!(out, "assert {};", expr_to_string(e));
        }
        StmtKind::Spawn(call) => {
            let _ = write!(out, "spawn {};", call_to_string(call));
        }
        StmtKind::Call(call) => {
            let _ = write!(out, "{};", call_to_string(call));
        }
    }
}

fn call_to_string(call: &Call) -> String {
    let args: Vec<String> = call.args.iter().map(expr_to_string).collect();
    format!("{}({})", call.name, args.join(", "))
}

pub fn float_literal(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders an expression with the minimal parentheses needed to reparse it identically.
pub fn expr_to_string(expr: &Expr) -> String {
    render(expr, 0)
}

fn render(expr: &Expr, parent_prec: u8) -> String {
    match &expr.kind {
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Float(v) => float_literal(*v),
        ExprKind::Str(s) => quote(s),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Null => "null".into(),
        ExprKind::Array(items) => {
            let items: Vec<String> = items.iter().map(expr_to_string).collect();
            format!("[{}]", items.join(", "))
        }
        ExprKind::Box(inner) => format!("box({})", expr_to_string(inner)),
        ExprKind::Var { name, .. } => name.clone(),
        ExprKind::Call(call) => call_to_string(call),
        ExprKind::Unary { op, operand } => {
            let sym = match op {
                UnOp::Not => "!",
                UnOp::Neg => "-",
            };
            format!("{sym}{}", render(operand, u8::MAX))
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let prec = op.precedence();
            // Left-associative: the right operand needs parens at equal precedence.
            let s = format!("{} {} {}", render(lhs, prec), op.symbol(), render(rhs, prec + 1));
            if prec < parent_prec {
                format!("({s})")
            } else {
                s
            }
        }
    }
}
