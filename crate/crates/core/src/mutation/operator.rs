use std::fmt;

use crate::lang::ast::{Block, Expr, ExprKind, Span, Stmt, StmtKind};
use crate::lang::printer::float_literal;
use crate::lang::{mutation_eligible, MethodInfo, Type};

use super::MutationError;

/// Body that replaces the whole original body of a method.
#[derive(Debug, Clone, PartialEq)]
pub enum Replacement {
    EmptyBody,
    ReturnBool(bool),
    ReturnInt(i64),
    ReturnFloat(f64),
    ReturnStr(String),
    ReturnEmptyArr,
    ReturnNull,
}

impl Replacement {
    /// Extreme-mutation replacements for a declared return type, in mutant order.
    pub fn for_type(ty: Type) -> Vec<Replacement> {
        match ty {
            Type::Void => vec![Replacement::EmptyBody],
            Type::Bool => vec![Replacement::ReturnBool(false), Replacement::ReturnBool(true)],
            Type::Int => vec![Replacement::ReturnInt(0), Replacement::ReturnInt(1)],
            Type::Float => vec![Replacement::ReturnFloat(0.0), Replacement::ReturnFloat(0.1)],
            Type::Str => vec![Replacement::ReturnStr(String::new()), Replacement::ReturnStr("A".into())],
            Type::Arr => vec![Replacement::ReturnEmptyArr],
            Type::Ref => vec![Replacement::ReturnNull],
        }
    }

    /// The replacement body as an AST block.
    pub fn body(&self) -> Block {
        let value = |kind| Expr { kind, span: Span::default() };
        let ret = |e: Expr| Stmt { kind: StmtKind::Return(Some(e)), span: Span::default(), index: 0 };
        let stmt = match self {
            Replacement::EmptyBody => return Block::default(),
            Replacement::ReturnBool(b) => ret(value(ExprKind::Bool(*b))),
            Replacement::ReturnInt(v) => ret(value(ExprKind::Int(*v))),
            Replacement::ReturnFloat(v) => ret(value(ExprKind::Float(*v))),
            Replacement::ReturnStr(s) => ret(value(ExprKind::Str(s.clone()))),
            Replacement::ReturnEmptyArr => ret(value(ExprKind::Array(Vec::new()))),
            Replacement::ReturnNull => ret(value(ExprKind::Null)),
        };
        Block { stmts: vec![stmt] }
    }
}

impl fmt::Display for Replacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Replacement::EmptyBody => f.write_str("{}"),
            Replacement::ReturnBool(b) => write!(f, "return {b};"),
            Replacement::ReturnInt(v) => write!(f, "return {v};"),
            Replacement::ReturnFloat(v) => write!(f, "return {};", float_literal(*v)),
            Replacement::ReturnStr(s) => write!(f, "return {s:?};"),
            Replacement::ReturnEmptyArr => f.write_str("return [];"),
            Replacement::ReturnNull => f.write_str("return null;"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mutant {
    /// `<method_id>#<ordinal>`, ordinals starting at 1.
    pub mutant_id: String,
    pub method: usize,
    pub method_id: String,
    pub ordinal: u8,
    pub replacement: Replacement,
    pub body: Block,
}

/// Creates the one or two extreme mutants of an eligible method.
pub fn generate_mutants(m: &MethodInfo) -> Result<Vec<Mutant>, MutationError> {
    if !mutation_eligible(m) {
        return Err(MutationError::IneligibleMethod(m.method_id.clone()));
    }
    Ok(Replacement::for_type(m.return_type)
        .into_iter()
        .enumerate()
        .map(|(i, replacement)| Mutant {
            mutant_id: format!("{}#{}", m.method_id, i + 1),
            method: m.index,
            method_id: m.method_id.clone(),
            ordinal: (i + 1) as u8,
            body: replacement.body(),
            replacement,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{enumerate_methods, parse_source};

    fn mutants_of(src: &str) -> Result<Vec<Mutant>, MutationError> {
        let p = parse_source("p", src).unwrap();
        generate_mutants(&enumerate_methods(&p)[0])
    }

    #[test]
    fn bool_method_gets_false_and_true() {
        let ms = mutants_of("fn f() -> bool { return 1 < 2; }").unwrap();
        let r: Vec<_> = ms.iter().map(|m| m.replacement.clone()).collect();
        assert_eq!(r, vec![Replacement::ReturnBool(false), Replacement::ReturnBool(true)]);
        assert_eq!(ms[1].mutant_id, "f#2");
    }

    #[test]
    fn void_method_gets_single_empty_body() {
        let ms = mutants_of("fn f() -> void { let x = 1; }").unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].replacement, Replacement::EmptyBody);
        assert!(ms[0].body.stmts.is_empty());
    }

    #[test]
    fn ref_method_gets_null() {
        let ms = mutants_of("fn f() -> ref { return box(1); }").unwrap();
        assert_eq!(ms.iter().map(|m| &m.replacement).collect::<Vec<_>>(), vec![&Replacement::ReturnNull]);
    }

    #[test]
    fn remaining_categories() {
        let r = |ty| Replacement::for_type(ty);
        assert_eq!(r(Type::Int), vec![Replacement::ReturnInt(0), Replacement::ReturnInt(1)]);
        assert_eq!(r(Type::Float), vec![Replacement::ReturnFloat(0.0), Replacement::ReturnFloat(0.1)]);
        assert_eq!(r(Type::Str), vec![Replacement::ReturnStr("".into()), Replacement::ReturnStr("A".into())]);
        assert_eq!(r(Type::Arr), vec![Replacement::ReturnEmptyArr]);
    }

    #[test]
    fn ineligible_method_is_rejected() {
        assert!(matches!(mutants_of("fn f() -> void {}"), Err(MutationError::IneligibleMethod(_))));
        assert!(matches!(mutants_of("fn f() -> ref { return null; }"), Err(MutationError::IneligibleMethod(_))));
    }

    #[test]
    fn display_is_source_text() {
        assert_eq!(Replacement::ReturnFloat(0.0).to_string(), "return 0.0;");
        assert_eq!(Replacement::ReturnStr("A".into()).to_string(), "return \"A\";");
    }
}
