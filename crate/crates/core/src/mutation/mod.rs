//! Extreme mutation and pseudo-tested method detection.
//!
//! Every eligible method gets one or two mutants whose body is replaced by a
//! trivial return (or nothing, for `void`). Each mutant is executed against
//! the tests that cover the method, producing a mutation matrix. A method
//! is ineffectively tested when no covering test kills any of its mutants.

mod operator;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use operator::{generate_mutants, Mutant, Replacement};

use crate::interp::{ErrorKind, ExecutionLog, Interpreter, NoHooks, DEFAULT_STEP_BUDGET};
use crate::lang::{enumerate_methods, mutation_eligible, Program};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutationError {
    #[error("method `{0}` is not eligible for mutation")]
    IneligibleMethod(String),
    #[error("test suite is red on the unmutated program: {0}")]
    RedTestSuite(String),
    #[error("execution log was produced without recording")]
    NotRecorded,
    #[error("operation requires a full mutation matrix, got {0}")]
    WrongMode(MatrixMode),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixMode {
    Full,
    EarlyAbort,
}

impl fmt::Display for MatrixMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixMode::Full => "full",
            MatrixMode::EarlyAbort => "early-abort",
        })
    }
}

impl FromStr for MatrixMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(MatrixMode::Full),
            "early-abort" => Ok(MatrixMode::EarlyAbort),
            other => Err(format!("unknown mode `{other}` (expected full or early-abort)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Killed,
    Survived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KillEvent {
    Assertion,
    Exception,
}

impl KillEvent {
    pub fn from_error(kind: ErrorKind) -> KillEvent {
        if kind == ErrorKind::AssertionError {
            KillEvent::Assertion
        } else {
            KillEvent::Exception
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRow {
    pub method: usize,
    pub test: usize,
    pub method_id: String,
    pub test_id: String,
    pub mutant_id: String,
    pub mutant_ordinal: u8,
    pub replacement: Replacement,
    pub outcome: Outcome,
    pub kill_event: Option<KillEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MutationMatrix {
    pub project_id: String,
    pub mode: MatrixMode,
    pub mutants: Vec<Mutant>,
    /// Canonical order: method index, mutant ordinal, test index.
    pub rows: Vec<MatrixRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub step_budget: u64,
    /// Worker threads; `1` evaluates sequentially, `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { step_budget: DEFAULT_STEP_BUDGET, workers: None }
    }
}

/// Mutants of every eligible method, in declaration order.
pub fn program_mutants(program: &Program) -> Vec<Mutant> {
    enumerate_methods(program)
        .iter()
        .filter(|m| mutation_eligible(m))
        .flat_map(|m| generate_mutants(m).expect("eligible"))
        .collect()
}

fn evaluate_mutant(
    program: &Program,
    log: &ExecutionLog,
    mutant: &Mutant,
    mode: MatrixMode,
    step_budget: u64,
) -> Vec<MatrixRow> {
    let mut interp =
        Interpreter::new(program, NoHooks).with_override(mutant.method, &mutant.body).with_step_budget(step_budget);
    let mut rows = Vec::new();
    for test in log.covering_tests(mutant.method) {
        let outcome = interp.run_test(test);
        let kill_event = outcome.error.as_ref().map(|e| KillEvent::from_error(e.kind));
        rows.push(MatrixRow {
            method: mutant.method,
            test,
            method_id: mutant.method_id.clone(),
            test_id: program.tests[test].name.clone(),
            mutant_id: mutant.mutant_id.clone(),
            mutant_ordinal: mutant.ordinal,
            replacement: mutant.replacement.clone(),
            outcome: if kill_event.is_some() { Outcome::Killed } else { Outcome::Survived },
            kill_event,
        });
        if mode == MatrixMode::EarlyAbort && kill_event.is_some() {
            break;
        }
    }
    rows
}

/// Runs every mutant against its covering tests.
///
/// A test kills a mutant when it passes on the original program and fails
/// on the mutant. Output order does not depend on the worker count.
pub fn evaluate_matrix(
    program: &Program,
    log: &ExecutionLog,
    mode: MatrixMode,
    options: EvalOptions,
) -> Result<MutationMatrix, MutationError> {
    if !log.recorded {
        return Err(MutationError::NotRecorded);
    }
    if let Some(failing) = log.outcomes.iter().find(|o| !o.passed()) {
        let reason = failing.error.as_ref().map_or_else(String::new, ToString::to_string);
        return Err(MutationError::RedTestSuite(format!("{} failed: {reason}", failing.test_id)));
    }
    let mutants = program_mutants(program);
    let run = |m: &Mutant| evaluate_mutant(program, log, m, mode, options.step_budget);
    let per_mutant: Vec<Vec<MatrixRow>> = match options.workers {
        Some(1) => mutants.iter().map(run).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(|| mutants.par_iter().map(run).collect()),
        None => mutants.par_iter().map(run).collect(),
    };
    let rows = per_mutant.into_iter().flatten().collect();
    Ok(MutationMatrix { project_id: program.project_id.clone(), mode, mutants, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    EffectivelyTested,
    IneffectivelyTested,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::EffectivelyTested => "effective",
            Verdict::IneffectivelyTested => "ineffective",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairVerdict {
    Effective,
    Ineffective,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodVerdict {
    pub method: usize,
    pub method_id: String,
    pub verdict: Verdict,
    /// Keyed by test index.
    pub pairs: BTreeMap<usize, PairVerdict>,
}

impl MutationMatrix {
    fn require_full(&self) -> Result<(), MutationError> {
        match self.mode {
            MatrixMode::Full => Ok(()),
            other => Err(MutationError::WrongMode(other)),
        }
    }

    /// Kill status per mutant id; a mutant without rows counts as survived.
    pub fn mutant_status(&self) -> BTreeMap<String, Outcome> {
        let mut status: BTreeMap<String, Outcome> =
            self.mutants.iter().map(|m| (m.mutant_id.clone(), Outcome::Survived)).collect();
        for row in &self.rows {
            if row.outcome == Outcome::Killed {
                status.insert(row.mutant_id.clone(), Outcome::Killed);
            }
        }
        status
    }

    /// Per-method verdicts for every method that has matrix rows.
    pub fn classify_methods(&self) -> Result<Vec<MethodVerdict>, MutationError> {
        self.require_full()?;
        let mut by_method: BTreeMap<usize, (String, BTreeMap<usize, PairVerdict>)> = BTreeMap::new();
        for row in &self.rows {
            let (_, pairs) = by_method.entry(row.method).or_insert_with(|| (row.method_id.clone(), BTreeMap::new()));
            let pair = pairs.entry(row.test).or_insert(PairVerdict::Ineffective);
            if row.outcome == Outcome::Killed {
                *pair = PairVerdict::Effective;
            }
        }
        Ok(by_method
            .into_iter()
            .map(|(method, (method_id, pairs))| {
                let verdict = if pairs.values().all(|v| *v == PairVerdict::Ineffective) {
                    Verdict::IneffectivelyTested
                } else {
                    Verdict::EffectivelyTested
                };
                MethodVerdict { method, method_id, verdict, pairs }
            })
            .collect())
    }

    /// Proportions of kill events at method and pair level.
    pub fn kill_event_report(&self) -> Result<KillEventReport, MutationError> {
        self.require_full()?;
        let mut methods: BTreeMap<usize, BTreeSet<KillEvent>> = BTreeMap::new();
        let mut pairs: BTreeMap<(usize, usize), BTreeSet<KillEvent>> = BTreeMap::new();
        for row in &self.rows {
            if let Some(event) = row.kill_event {
                methods.entry(row.method).or_default().insert(event);
                pairs.entry((row.method, row.test)).or_default().insert(event);
            }
        }
        Ok(KillEventReport {
            method: KillProportions::from_sets(methods.values()),
            pair: KillProportions::from_sets(pairs.values()),
        })
    }

    /// Writes `matrix.csv`.
    pub fn write_matrix_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method_id", "test_id", "mutant_id", "replacement", "outcome", "kill_event"])?;
        for r in &self.rows {
            let outcome = match r.outcome {
                Outcome::Killed => "killed",
                Outcome::Survived => "survived",
            };
            let event = match r.kill_event {
                Some(KillEvent::Assertion) => "assertion",
                Some(KillEvent::Exception) => "exception",
                None => "",
            };
            w.write_record([
                r.method_id.as_str(),
                r.test_id.as_str(),
                r.mutant_id.as_str(),
                &r.replacement.to_string(),
                outcome,
                event,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes `verdicts.csv`.
pub fn write_verdicts_csv<W: io::Write>(verdicts: &[MethodVerdict], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method_id", "verdict"])?;
    for v in verdicts {
        w.write_record([v.method_id.as_str(), v.verdict.label()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KillProportions {
    /// Number of killed methods (or pairs) the proportions are taken over.
    pub killed: usize,
    pub exclusively_assertion: f64,
    pub exclusively_exception: f64,
    pub mixed: f64,
}

impl KillProportions {
    fn from_sets<'a>(sets: impl Iterator<Item = &'a BTreeSet<KillEvent>>) -> Self {
        let (mut n, mut assertion, mut exception, mut mixed) = (0usize, 0usize, 0usize, 0usize);
        for set in sets {
            n += 1;
            match (set.contains(&KillEvent::Assertion), set.contains(&KillEvent::Exception)) {
                (true, false) => assertion += 1,
                (false, true) => exception += 1,
                _ => mixed += 1,
            }
        }
        if n == 0 {
            return KillProportions::default();
        }
        let frac = |k: usize| k as f64 / n as f64;
        KillProportions {
            killed: n,
            exclusively_assertion: frac(assertion),
            exclusively_exception: frac(exception),
            mixed: frac(mixed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KillEventReport {
    pub method: KillProportions,
    pub pair: KillProportions,
}
