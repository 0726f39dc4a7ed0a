//! Syntax tree for the `.tl` test language.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Source position of a token or node: 1-based line/column plus byte range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub start: usize,
    pub end: usize,
}

/// Declared type of a parameter or function result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Type {
    Void,
    Bool,
    Int,
    Float,
    Str,
    Arr,
    Ref,
}

impl Type {
    pub fn keyword(self) -> &'static str {
        match self {
            Type::Void => "void",
            Type::Bool => "bool",
            Type::Int => "int",
            Type::Float => "float",
            Type::Str => "str",
            Type::Arr => "arr",
            Type::Ref => "ref",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Type> {
        Some(match word {
            "void" => Type::Void,
            "bool" => Type::Bool,
            "int" => Type::Int,
            "float" => Type::Float,
            "str" => Type::Str,
            "arr" => Type::Arr,
            "ref" => Type::Ref,
            _ => return None,
        })
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub return_type: Type,
    pub body: Block,
    /// Name of the source document the function was parsed from.
    pub file: String,
    pub span: Span,
    /// Span of the body including both braces.
    pub body_span: Span,
    /// Number of local variable slots a frame of this function needs.
    pub frame_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestDef {
    pub name: String,
    pub body: Block,
    pub file: String,
    pub span: Span,
    pub frame_size: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

impl Block {
    /// Visits every statement of the block in pre-order, descending into nested blocks.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Stmt)) {
        for stmt in &self.stmts {
            visit(stmt);
            match &stmt.kind {
                StmtKind::If { then, otherwise, .. } => {
                    then.walk(visit);
                    if let Some(other) = otherwise {
                        other.walk(visit);
                    }
                }
                StmtKind::While { body, .. } => body.walk(visit),
                _ => {}
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
    /// Pre-order index of the statement inside its function; one coverable line each.
    pub index: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Let { name: String, slot: usize, value: Expr },
    Assign { name: String, slot: usize, value: Expr },
    If { cond: Expr, then: Block, otherwise: Option<Block>, branch: u32 },
    While { cond: Expr, body: Block, branch: u32 },
    Return(Option<Expr>),
    Assert(Expr),
    Spawn(Call),
    Call(Call),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Null,
    Array(Vec<Expr>),
    Box(Box<Expr>),
    Var { name: String, slot: usize },
    Call(Call),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Unary { op: UnOp, operand: Box<Expr> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Call {
    pub name: String,
    pub args: Vec<Expr>,
    pub target: Callee,
}

/// Resolution of a call site, filled in by the checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Callee {
    Unresolved,
    Function(usize),
    Builtin(Builtin),
}

/// Library functions that run without a stack frame and without instrumentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Len,
    Get,
    Deref,
    StrCat,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::Len, Builtin::Get, Builtin::Deref, Builtin::StrCat];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Len => "len",
            Builtin::Get => "get",
            Builtin::Deref => "deref",
            Builtin::StrCat => "str_cat",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Len | Builtin::Deref => 1,
            Builtin::Get | Builtin::StrCat => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Neg,
}

/// A parsed and checked project: application functions plus test cases.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub project_id: String,
    pub functions: Vec<FunctionDef>,
    pub tests: Vec<TestDef>,
}

impl Program {
    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|f| f.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn test_index(&self, name: &str) -> Option<usize> {
        self.tests.iter().position(|t| t.name == name)
    }
}
