use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::*;

/// Return-type category used as a prediction feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnCategory {
    Void,
    Boolean,
    Numeric,
    String,
    Array,
    Reference,
}

impl ReturnCategory {
    pub const ALL: [ReturnCategory; 6] = [
        ReturnCategory::Void,
        ReturnCategory::Boolean,
        ReturnCategory::Numeric,
        ReturnCategory::String,
        ReturnCategory::Array,
        ReturnCategory::Reference,
    ];

    pub fn of(ty: Type) -> ReturnCategory {
        match ty {
            Type::Void => ReturnCategory::Void,
            Type::Bool => ReturnCategory::Boolean,
            Type::Int | Type::Float => ReturnCategory::Numeric,
            Type::Str => ReturnCategory::String,
            Type::Arr => ReturnCategory::Array,
            Type::Ref => ReturnCategory::Reference,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReturnCategory::Void => "void",
            ReturnCategory::Boolean => "boolean",
            ReturnCategory::Numeric => "numeric",
            ReturnCategory::String => "string",
            ReturnCategory::Array => "array",
            ReturnCategory::Reference => "reference",
        }
    }

    pub fn parse(s: &str) -> Option<ReturnCategory> {
        ReturnCategory::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for ReturnCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Static description of one application function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodInfo {
    pub method_id: String,
    /// Index into [`Program::functions`].
    pub index: usize,
    pub return_type: Type,
    pub return_category: ReturnCategory,
    /// Executable statements; each one is a coverable line.
    pub statement_count: u32,
    /// Two directions per `if` and per `while`.
    pub branch_count: u32,
    pub is_empty: bool,
    pub is_solely_return_null: bool,
    /// Array function whose whole body is `return [];`.
    pub is_solely_return_empty_array: bool,
}

pub fn method_info(index: usize, func: &FunctionDef) -> MethodInfo {
    let mut statements = 0u32;
    let mut branch_points = 0u32;
    func.body.walk(&mut |stmt| {
        statements += 1;
        if matches!(stmt.kind, StmtKind::If { .. } | StmtKind::While { .. }) {
            branch_points += 1;
        }
    });
    let sole_return = match func.body.stmts.as_slice() {
        [Stmt { kind: StmtKind::Return(Some(e)), .. }] => Some(&e.kind),
        _ => None,
    };
    MethodInfo {
        method_id: func.name.clone(),
        index,
        return_type: func.return_type,
        return_category: ReturnCategory::of(func.return_type),
        statement_count: statements,
        branch_count: 2 * branch_points,
        is_empty: statements == 0,
        is_solely_return_null: matches!(sole_return, Some(ExprKind::Null)),
        is_solely_return_empty_array: matches!(sole_return, Some(ExprKind::Array(items)) if items.is_empty()),
    }
}

/// One [`MethodInfo`] per function, in declaration order.
pub fn enumerate_methods(program: &Program) -> Vec<MethodInfo> {
    program.functions.iter().enumerate().map(|(i, f)| method_info(i, f)).collect()
}

/// Whether extreme mutation of the method can produce a non-equivalent mutant.
pub fn mutation_eligible(m: &MethodInfo) -> bool {
    !(m.is_empty || m.is_solely_return_null || m.is_solely_return_empty_array)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_source;

    fn info(src: &str) -> MethodInfo {
        let p = parse_source("t", src).unwrap();
        enumerate_methods(&p).remove(0)
    }

    #[test]
    fn single_return_counts() {
        let m = info("fn f() -> int { return 0; }");
        assert_eq!((m.statement_count, m.branch_count), (1, 0));
        assert!(mutation_eligible(&m));
    }

    #[test]
    fn if_else_and_while_count_four_branches() {
        let m = info(
            "fn f(x: int) -> int { let y = 0; if x > 0 { y = 1; } else { y = 2; } \
             while y < 5 { y = y + 1; } return y; }",
        );
        assert_eq!(m.branch_count, 4);
        assert_eq!(m.statement_count, 7);
    }

    #[test]
    fn empty_void_is_ineligible() {
        let m = info("fn f() -> void {}");
        assert!(m.is_empty);
        assert!(!mutation_eligible(&m));
    }

    #[test]
    fn solely_null_is_ineligible() {
        let m = info("fn f() -> ref { return null; }");
        assert!(m.is_solely_return_null);
        assert!(!mutation_eligible(&m));
    }

    #[test]
    fn solely_empty_array_is_ineligible() {
        let m = info("fn f() -> arr { return []; }");
        assert!(!mutation_eligible(&m));
        assert!(mutation_eligible(&info("fn f() -> arr { return [1]; }")));
    }

    #[test]
    fn return_one_is_eligible() {
        assert!(mutation_eligible(&info("fn f() -> int { return 1; }")));
    }

    #[test]
    fn categories_collapse_numeric() {
        assert_eq!(info("fn f() -> float { return 1.5; }").return_category, ReturnCategory::Numeric);
        assert_eq!(info("fn f() -> str { return \"a\"; }").return_category, ReturnCategory::String);
    }
}
