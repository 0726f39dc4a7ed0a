//! Front end for the `.tl` test language.
//!
//! A project is a set of source documents declaring application functions
//! (`fn`) and test cases (`test`). Parsing yields a checked [`Program`] whose
//! call sites are resolved and whose statements are numbered per function so
//! that the interpreter can attribute coverage.

pub mod ast;
mod check;
mod lexer;
mod methods;
mod parser;
pub mod printer;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{Block, Builtin, Callee, Expr, ExprKind, FunctionDef, Program, Stmt, StmtKind, TestDef, Type};
pub use methods::{enumerate_methods, method_info, mutation_eligible, MethodInfo, ReturnCategory};

#[derive(Debug, Error)]
pub enum LangError {
    #[error("{file}:{line}:{col}: syntax error: {message}")]
    Syntax { file: String, line: u32, col: u32, message: String },
    #[error("{file}:{line}: duplicate name `{name}` (previously defined at {previous})")]
    DuplicateName { name: String, file: String, line: u32, previous: String },
    #[error("{file}:{line}:{col}: unresolved call to `{name}`: {reason}")]
    UnresolvedCall { name: String, file: String, line: u32, col: u32, reason: String },
    #[error("{file}:{line}:{col}: type error: {message}")]
    Type { file: String, line: u32, col: u32, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid project manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
}

/// A named source document.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub name: String,
    pub text: String,
}

impl SourceFile {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        SourceFile { name: name.into(), text: text.into() }
    }
}

/// Contents of a `project.json` manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectManifest {
    pub project_id: String,
    pub sources: Vec<String>,
}

/// Parses and checks all documents of a project into one program.
pub fn parse_project(project_id: &str, sources: &[SourceFile]) -> Result<Program, LangError> {
    let mut program = Program { project_id: project_id.to_string(), functions: Vec::new(), tests: Vec::new() };
    for src in sources {
        let (functions, tests) = parser::parse_document(&src.name, &src.text)?;
        program.functions.extend(functions);
        program.tests.extend(tests);
    }
    check::check_program(&mut program)?;
    Ok(program)
}

/// Convenience wrapper for a single-document project.
pub fn parse_source(project_id: &str, text: &str) -> Result<Program, LangError> {
    parse_project(project_id, &[SourceFile::new(format!("{project_id}.tl"), text)])
}

/// A project loaded from disk, keeping the raw sources alongside the program.
#[derive(Debug, Clone)]
pub struct LoadedProject {
    pub root: PathBuf,
    pub manifest: ProjectManifest,
    pub sources: Vec<SourceFile>,
    pub program: Program,
}

/// Reads `project.json` from `dir` and parses the listed sources.
pub fn load_project(dir: &Path) -> Result<LoadedProject, LangError> {
    let manifest_path = dir.join("project.json");
    let text = fs::read_to_string(&manifest_path)
        .map_err(|source| LangError::Io { path: manifest_path.clone(), source })?;
    let manifest: ProjectManifest = serde_json::from_str(&text)
        .map_err(|e| LangError::Manifest { path: manifest_path.clone(), message: e.to_string() })?;
    let mut sources = Vec::with_capacity(manifest.sources.len());
    for rel in &manifest.sources {
        let path = dir.join(rel);
        let text = fs::read_to_string(&path).map_err(|source| LangError::Io { path: path.clone(), source })?;
        sources.push(SourceFile::new(rel.clone(), text));
    }
    let program = parse_project(&manifest.project_id, &sources)?;
    Ok(LoadedProject { root: dir.to_path_buf(), manifest, sources, program })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let p = parse_source("p", "fn f() -> int { return 1; }").unwrap();
        assert_eq!(p.functions.len(), 1);
        assert!(p.tests.is_empty());
    }

    #[test]
    fn malformed_signature_reports_position() {
        match parse_source("p", "fn f( { }") {
            Err(LangError::Syntax { line, col, .. }) => assert_eq!((line, col), (1, 7)),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_function() {
        let r = parse_source("p", "fn f() -> void {} fn f() -> void {}");
        assert!(matches!(r, Err(LangError::DuplicateName { .. })));
    }

    #[test]
    fn duplicate_test_and_function_namespace() {
        let r = parse_source("p", "fn t() -> void {} test t {}");
        assert!(matches!(r, Err(LangError::DuplicateName { .. })));
    }

    #[test]
    fn builtin_name_is_reserved() {
        let r = parse_source("p", "fn len(a: arr) -> int { return 0; }");
        assert!(matches!(r, Err(LangError::DuplicateName { .. })));
    }

    #[test]
    fn unresolved_call() {
        let r = parse_source("p", "test t { g(); }");
        assert!(matches!(r, Err(LangError::UnresolvedCall { .. })));
    }

    #[test]
    fn tests_are_not_callable() {
        let r = parse_source("p", "test a {} test b { a(); }");
        assert!(matches!(r, Err(LangError::UnresolvedCall { .. })));
    }

    #[test]
    fn return_type_mismatch() {
        let r = parse_source("p", "fn f() -> int { return true; }");
        assert!(matches!(r, Err(LangError::Type { .. })));
    }

    #[test]
    fn missing_return_path() {
        let r = parse_source("p", "fn f(x: int) -> int { if x > 0 { return 1; } }");
        assert!(matches!(r, Err(LangError::Type { .. })));
        parse_source("p", "fn f(x: int) -> int { if x > 0 { return 1; } else { return 2; } }").unwrap();
    }

    #[test]
    fn null_only_for_ref() {
        parse_source("p", "fn f() -> ref { return null; }").unwrap();
        assert!(parse_source("p", "fn f() -> str { return null; }").is_err());
    }

    #[test]
    fn spawn_requires_void_function() {
        assert!(parse_source("p", "fn g() -> int { return 1; } test t { spawn g(); }").is_err());
        parse_source("p", "fn g() -> void {} test t { spawn g(); }").unwrap();
    }

    #[test]
    fn block_scoped_locals() {
        let r = parse_source("p", "test t { if true { let x = 1; } x = 2; }");
        assert!(matches!(r, Err(LangError::Type { .. })));
    }

    #[test]
    fn statements_and_branches_are_numbered_in_preorder() {
        let p = parse_source(
            "p",
            "fn f(x: int) -> int { if x > 0 { let a = 1; } while x < 0 { x = x + 1; } return x; }",
        )
        .unwrap();
        let mut seen = Vec::new();
        p.functions[0].body.walk(&mut |s| seen.push(s.index));
        assert_eq!(seen, vec![0, 1, 2, 3, 4]);
    }
}
