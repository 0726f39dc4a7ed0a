use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tplab::interp::{run_suite, HookConfig};
use tplab::lang::load_project;
use tplab::mutation::{evaluate_matrix, EvalOptions, MatrixMode, MutationError};
use tplab::pipeline::bundled_corpus_dir;

fn tp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tp")).args(args).output().expect("tp runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_project(dir: &Path, source: &str) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join("project.json"), r#"{ "project_id": "p", "sources": ["main.tl"] }"#).unwrap();
    fs::write(dir.join("main.tl"), source).unwrap();
    dir.to_path_buf()
}

fn read_tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "timing.csv" {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn missing_input_exits_2() {
    let out = tp(&["run", "--project", "/nonexistent/project"]);
    assert_eq!(out.status.code(), Some(2));
    let out = tp(&["run"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn syntax_error_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_project(&tmp.path().join("p"), "fn f( { }");
    let out = tp(&["run", "--project", path(&p), "--out", path(&tmp.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn red_suite_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_project(&tmp.path().join("p"), "fn f() -> int { return 1; }\ntest t { assert f() == 2; }\n");
    for cmd in ["run", "mutate"] {
        let out = tp(&[cmd, "--project", path(&p), "--out", path(&tmp.path().join("o"))]);
        assert_eq!(out.status.code(), Some(3), "{cmd}");
    }
}

#[test]
fn single_project_cross_scope_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let p = bundled_corpus_dir().join("monotone");
    let out = tp(&["predict", "--project", path(&p), "--scope", "cross", "--out", path(tmp.path())]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn empty_project_warns_and_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_project(&tmp.path().join("p"), "");
    let o = tmp.path().join("o");
    let out = tp(&["run", "--project", path(&p), "--out", path(&o)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let traces = fs::read_to_string(o.join("traces.csv")).unwrap();
    assert_eq!(traces.lines().count(), 1, "{traces}");
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = bundled_corpus_dir();
    let mut trees = Vec::new();
    for (i, workers) in ["1", "4"].iter().enumerate() {
        let o = tmp.path().join(format!("o{i}"));
        for cmd in ["run", "mutate", "correlate", "report"] {
            let out = tp(&[cmd, "--corpus", path(&corpus), "--out", path(&o), "--workers", workers]);
            assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        }
        let out = tp(&[
            "predict", "--corpus", path(&corpus), "--out", path(&o), "--workers", workers,
            "--granularity", "method", "--scope", "within", "--smote", "off",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        trees.push(read_tree(&o));
    }
    assert!(!trees[0].is_empty());
    assert_eq!(trees[0], trees[1]);

    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("o0/eval_report.json")).unwrap()).unwrap();
    let s = &report["scenarios"];
    assert_eq!(s.as_array().unwrap().len(), 1);
    assert_eq!(s[0]["scenario"]["granularity"], "method");
    assert_eq!(s[0]["scenario"]["scope"], "within");
    assert_eq!(s[0]["scenario"]["smote"], "off");
}

#[test]
fn early_abort_matrix_cannot_be_classified() {
    let p = load_project(&bundled_corpus_dir().join("table2")).unwrap();
    let log = run_suite(&p.program, HookConfig::default());
    let m = evaluate_matrix(&p.program, &log, MatrixMode::EarlyAbort, EvalOptions::default()).unwrap();
    assert_eq!(m.classify_methods(), Err(MutationError::WrongMode(MatrixMode::EarlyAbort)));

    let tmp = tempfile::tempdir().unwrap();
    let dir = bundled_corpus_dir().join("table2");
    let out = tp(&["mutate", "--project", path(&dir), "--mode", "early-abort", "--out", path(tmp.path())]);
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("matrix.csv").exists());
    assert!(!tmp.path().join("verdicts.csv").exists());
}
