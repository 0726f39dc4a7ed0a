//! Test execution with enter/exit instrumentation.
//!
//! [`run_suite`] executes every test of a program in declaration order and,
//! when recording is enabled, produces an [`ExecutionLog`] with the minimal
//! stack distance, invocation count and statement/branch coverage of every
//! executed (method, test) pair. Builtins create no frame, so recorded
//! distances are a lower bound on the distance through library code.

mod eval;
mod hooks;
mod recorder;
mod value;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{Interpreter, DEFAULT_STEP_BUDGET, MAX_CALL_DEPTH};
pub use hooks::{Caller, EnterEvent, ExecutionHooks, NoHooks, ThreadId};
pub use recorder::{PairData, StackRecorder};
pub use value::Value;

use crate::lang::Program;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorKind {
    AssertionError,
    ArithmeticError,
    IndexError,
    NullRefError,
    /// Call depth limit reached.
    StackOverflow,
    /// Step budget exhausted.
    Timeout,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::AssertionError => "AssertionError",
            ErrorKind::ArithmeticError => "ArithmeticError",
            ErrorKind::IndexError => "IndexError",
            ErrorKind::NullRefError => "NullRefError",
            ErrorKind::StackOverflow => "StackOverflow",
            ErrorKind::Timeout => "Timeout",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}: {message}")]
pub struct RuntimeError {
    pub kind: ErrorKind,
    pub message: String,
    /// Function executing when the error was raised; `None` for the test body.
    pub method_id: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestOutcome {
    pub test_id: String,
    pub status: TestStatus,
    pub error: Option<RuntimeError>,
}

impl TestOutcome {
    pub fn passed(&self) -> bool {
        self.status == TestStatus::Pass
    }
}

/// Dynamic data of one executed (method, test) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub method: usize,
    pub test: usize,
    pub method_id: String,
    pub test_id: String,
    pub min_stack_distance: u32,
    pub invocation_count: u64,
    pub covered_lines: BTreeSet<u32>,
    pub covered_branch_dirs: BTreeSet<(u32, bool)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HookConfig {
    /// Record distances and coverage; when false only outcomes are collected.
    pub record: bool,
    pub step_budget: u64,
}

impl Default for HookConfig {
    fn default() -> Self {
        HookConfig { record: true, step_budget: DEFAULT_STEP_BUDGET }
    }
}

impl HookConfig {
    pub fn plain() -> Self {
        HookConfig { record: false, ..Self::default() }
    }
}

/// Outcome and trace data of one suite execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionLog {
    pub project_id: String,
    pub outcomes: Vec<TestOutcome>,
    /// Keyed by (method index, test index).
    pub traces: BTreeMap<(usize, usize), TraceRecord>,
    /// Methods executed by each test, indexed like `outcomes`.
    pub covered_methods: Vec<BTreeSet<usize>>,
    pub recorded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("method `{0}` is not covered by any test")]
    UncoveredMethod(String),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
}

impl ExecutionLog {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(TestOutcome::passed)
    }

    /// Covering tests of a method, in suite order.
    pub fn covering_tests(&self, method: usize) -> Vec<usize> {
        self.traces.range((method, 0)..=(method, usize::MAX)).map(|(&(_, t), _)| t).collect()
    }

    pub fn records_of(&self, method: usize) -> impl Iterator<Item = &TraceRecord> {
        self.traces.range((method, 0)..=(method, usize::MAX)).map(|(_, r)| r)
    }

    pub fn is_covered(&self, method: usize) -> bool {
        self.records_of(method).next().is_some()
    }

    /// Minimal stack distance of a method: the minimum over its covering tests.
    pub fn aggregate_method_distance(&self, method: usize) -> Result<u32, TraceError> {
        self.records_of(method)
            .map(|r| r.min_stack_distance)
            .min()
            .ok_or_else(|| TraceError::UncoveredMethod(format!("#{method}")))
    }

    /// As [`Self::aggregate_method_distance`], looked up by name.
    pub fn method_distance(&self, program: &Program, method_id: &str) -> Result<u32, TraceError> {
        let idx = program
            .function_index(method_id)
            .ok_or_else(|| TraceError::UnknownMethod(method_id.to_string()))?;
        self.aggregate_method_distance(idx)
            .map_err(|_| TraceError::UncoveredMethod(method_id.to_string()))
    }

    /// Writes `traces.csv`.
    pub fn write_traces_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "method_id",
            "test_id",
            "min_stack_distance",
            "invocation_count",
            "covered_line_count",
            "covered_branch_dir_count",
        ])?;
        for r in self.traces.values() {
            w.write_record([
                r.method_id.clone(),
                r.test_id.clone(),
                r.min_stack_distance.to_string(),
                r.invocation_count.to_string(),
                r.covered_lines.len().to_string(),
                r.covered_branch_dirs.len().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `tests.csv`.
    pub fn write_tests_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["test_id", "status", "error_kind"])?;
        for o in &self.outcomes {
            let status = match o.status {
                TestStatus::Pass => "pass",
                TestStatus::Fail => "fail",
            };
            let kind = o.error.as_ref().map_or("", |e| e.kind.as_str());
            w.write_record([o.test_id.as_str(), status, kind])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Executes every test of `program` in declaration order.
pub fn run_suite(program: &Program, config: HookConfig) -> ExecutionLog {
    if !config.record {
        let mut interp = Interpreter::new(program, NoHooks).with_step_budget(config.step_budget);
        let outcomes = (0..program.tests.len()).map(|t| interp.run_test(t)).collect();
        return ExecutionLog {
            project_id: program.project_id.clone(),
            outcomes,
            traces: BTreeMap::new(),
            covered_methods: vec![BTreeSet::new(); program.tests.len()],
            recorded: false,
        };
    }

    let mut interp = Interpreter::new(program, StackRecorder::new()).with_step_budget(config.step_budget);
    let outcomes: Vec<TestOutcome> = (0..program.tests.len()).map(|t| interp.run_test(t)).collect();
    let per_test = interp.into_hooks().into_pairs();

    let mut traces = BTreeMap::new();
    let mut covered_methods = vec![BTreeSet::new(); program.tests.len()];
    for (test, methods) in per_test {
        for (method, data) in methods {
            covered_methods[test].insert(method);
            traces.insert(
                (method, test),
                TraceRecord {
                    method,
                    test,
                    method_id: program.functions[method].name.clone(),
                    test_id: program.tests[test].name.clone(),
                    min_stack_distance: data.min_stack_distance,
                    invocation_count: data.invocation_count,
                    covered_lines: data.covered_lines,
                    covered_branch_dirs: data.covered_branch_dirs,
                },
            );
        }
    }
    ExecutionLog { project_id: program.project_id.clone(), outcomes, traces, covered_methods, recorded: true }
}
