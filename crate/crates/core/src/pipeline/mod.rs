//! End-to-end analysis over a corpus of projects: recorded runs, mutation
//! matrices, correlation reports and prediction scenarios.

mod corpus;
mod scenario;

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use corpus::{bundled_corpus_dir, Corpus, CorpusEntry, CorpusManifest, CorpusSettings};
pub use scenario::{predict, EvalDocument, Scenario, ScenarioReport, Scope, SmoteFlag};

use crate::interp::{run_suite, ExecutionLog, HookConfig};
use crate::lang::{enumerate_methods, LangError, MethodInfo, Program};
use crate::learn::LearnError;
use crate::metrics::{build_method_dataset, build_pair_dataset, write_dataset_csv, FeatureVector, Granularity};
use crate::mutation::{
    evaluate_matrix, write_verdicts_csv, EvalOptions, KillEventReport, MatrixMode, MutationError, MutationMatrix,
};
use crate::stats::{correlate_rows, distance_bucket_report, write_buckets_csv, write_correlation_csv, BUCKET_CROP_THRESHOLD};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error("red test suite in {project}: {detail}")]
    RedSuite { project: String, detail: String },
    #[error("internal error: {0}")]
    Internal(String),
}

impl PipelineError {
    /// Process exit code: 2 input error, 3 red suite, 4 internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Input(_) | PipelineError::Lang(_) => 2,
            PipelineError::RedSuite { .. } => 3,
            PipelineError::Internal(_) => 4,
        }
    }
}

impl From<MutationError> for PipelineError {
    fn from(e: MutationError) -> Self {
        PipelineError::Internal(e.to_string())
    }
}

impl From<LearnError> for PipelineError {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::SingleProject => PipelineError::Input(e.to_string()),
            other => PipelineError::Internal(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Input(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn write_csv(path: &Path, f: impl FnOnce(BufWriter<File>) -> csv::Result<()>) -> Result<(), PipelineError> {
    f(create(path)?).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| PipelineError::Internal(e.to_string()))?;
    text.push('\n');
    fs::create_dir_all(path.parent().unwrap_or(Path::new("."))).map_err(|e| io_err(path, e))?;
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Execution options shared by all commands.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub step_budget: u64,
    pub seed: u64,
    /// Worker threads for mutant evaluation; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl RunOptions {
    pub fn from_settings(s: &CorpusSettings) -> Self {
        RunOptions { step_budget: s.step_budget, seed: s.seed, workers: None }
    }
}

/// Recorded run, full matrix and both datasets of one project.
pub struct ProjectAnalysis {
    pub project_id: String,
    pub methods: Vec<MethodInfo>,
    pub log: ExecutionLog,
    pub matrix: MutationMatrix,
    pub method_rows: Vec<FeatureVector>,
    pub pair_rows: Vec<FeatureVector>,
}

impl ProjectAnalysis {
    pub fn rows(&self, granularity: Granularity) -> &[FeatureVector] {
        match granularity {
            Granularity::Method => &self.method_rows,
            Granularity::Pair => &self.pair_rows,
        }
    }
}

/// Runs the suite with recording and rejects red suites.
pub fn recorded_run(program: &Program, step_budget: u64) -> Result<ExecutionLog, PipelineError> {
    let log = run_suite(program, HookConfig { record: true, step_budget });
    if let Some(failing) = log.outcomes.iter().find(|o| !o.passed()) {
        let detail = match &failing.error {
            Some(e) => format!("{} failed: {e}", failing.test_id),
            None => format!("{} failed", failing.test_id),
        };
        return Err(PipelineError::RedSuite { project: program.project_id.clone(), detail });
    }
    Ok(log)
}

pub fn analyze_project(program: &Program, options: &RunOptions) -> Result<ProjectAnalysis, PipelineError> {
    let log = recorded_run(program, options.step_budget)?;
    let eval = EvalOptions { step_budget: options.step_budget, workers: options.workers };
    let matrix = evaluate_matrix(program, &log, MatrixMode::Full, eval)?;
    let methods = enumerate_methods(program);
    let method_rows = build_method_dataset(&log, &matrix, &methods)?;
    let pair_rows = build_pair_dataset(&log, &matrix, &methods)?;
    Ok(ProjectAnalysis { project_id: program.project_id.clone(), methods, log, matrix, method_rows, pair_rows })
}

pub fn analyze_corpus(corpus: &Corpus, options: &RunOptions) -> Result<Vec<ProjectAnalysis>, PipelineError> {
    corpus.projects.iter().map(|p| analyze_project(&p.program, options)).collect()
}

/// `traces.csv` and `tests.csv` for one project. Returns the number of trace rows.
pub fn cmd_run(program: &Program, options: &RunOptions, out: &Path) -> Result<usize, PipelineError> {
    let log = recorded_run(program, options.step_budget)?;
    write_csv(&out.join("traces.csv"), |w| log.write_traces_csv(w))?;
    write_csv(&out.join("tests.csv"), |w| log.write_tests_csv(w))?;
    Ok(log.traces.len())
}

/// Wall time of the four analysis stages on one program.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub plain_run: Duration,
    pub recorded_run: Duration,
    pub early_abort: Duration,
    pub full_matrix: Duration,
}

impl Timing {
    fn add(&mut self, other: &Timing) {
        self.plain_run += other.plain_run;
        self.recorded_run += other.recorded_run;
        self.early_abort += other.early_abort;
        self.full_matrix += other.full_matrix;
    }

    pub fn stages(&self) -> [(&'static str, Duration); 4] {
        [
            ("plain_run", self.plain_run),
            ("recorded_run", self.recorded_run),
            ("early_abort", self.early_abort),
            ("full_matrix", self.full_matrix),
        ]
    }
}

fn best_of<T>(repeats: usize, mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut best = Duration::MAX;
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let v = f();
        best = best.min(start.elapsed());
        last = Some(v);
    }
    (last.expect("at least one repeat"), best)
}

/// Times each stage, keeping the fastest of `repeats` runs per stage.
pub fn time_stages(program: &Program, options: &RunOptions, repeats: usize) -> Result<Timing, PipelineError> {
    let eval = EvalOptions { step_budget: options.step_budget, workers: options.workers };
    let (_, plain_run) = best_of(repeats, || run_suite(program, HookConfig { record: false, step_budget: options.step_budget }));
    let (log, recorded_run) = best_of(repeats, || recorded_run(program, options.step_budget));
    let log = log?;
    let (early, early_abort) = best_of(repeats, || evaluate_matrix(program, &log, MatrixMode::EarlyAbort, eval));
    early?;
    let (full, full_matrix) = best_of(repeats, || evaluate_matrix(program, &log, MatrixMode::Full, eval));
    full?;
    Ok(Timing { plain_run, recorded_run, early_abort, full_matrix })
}

pub fn time_corpus(corpus: &Corpus, options: &RunOptions, repeats: usize) -> Result<Timing, PipelineError> {
    let mut total = Timing::default();
    for p in &corpus.projects {
        total.add(&time_stages(&p.program, options, repeats)?);
    }
    Ok(total)
}

pub fn write_timing_csv(timing: &Timing, path: &Path) -> Result<(), PipelineError> {
    write_csv(path, |out| {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["stage", "seconds"])?;
        for (stage, d) in timing.stages() {
            w.write_record([stage.to_string(), format!("{:.6}", d.as_secs_f64())])?;
        }
        w.flush()?;
        Ok(())
    })
}

/// `matrix.csv`, plus `verdicts.csv` and `kill_kinds.json` in full mode.
pub fn cmd_mutate(
    program: &Program,
    mode: MatrixMode,
    options: &RunOptions,
    out: &Path,
) -> Result<MutationMatrix, PipelineError> {
    let log = recorded_run(program, options.step_budget)?;
    let eval = EvalOptions { step_budget: options.step_budget, workers: options.workers };
    let matrix = evaluate_matrix(program, &log, mode, eval)?;
    write_csv(&out.join("matrix.csv"), |w| matrix.write_matrix_csv(w))?;
    if mode == MatrixMode::Full {
        let verdicts = matrix.classify_methods()?;
        write_csv(&out.join("verdicts.csv"), |w| write_verdicts_csv(&verdicts, w))?;
        let kinds: KillEventReport = matrix.kill_event_report()?;
        write_json(&out.join("kill_kinds.json"), &kinds)?;
    }
    Ok(matrix)
}

/// Per project: both datasets and `buckets.csv`; corpus-wide `correlation.csv`.
pub fn cmd_correlate(analyses: &[ProjectAnalysis], out: &Path) -> Result<(), PipelineError> {
    let mut correlation = Vec::new();
    for a in analyses {
        let dir = out.join(&a.project_id);
        write_csv(&dir.join("dataset_method.csv"), |w| write_dataset_csv(&a.method_rows, Granularity::Method, w))?;
        write_csv(&dir.join("dataset_pair.csv"), |w| write_dataset_csv(&a.pair_rows, Granularity::Pair, w))?;
        let buckets = distance_bucket_report(&a.method_rows, BUCKET_CROP_THRESHOLD);
        write_csv(&dir.join("buckets.csv"), |w| write_buckets_csv(&buckets, w))?;
        correlation.extend(correlate_rows(&a.project_id, &a.method_rows));
    }
    write_csv(&out.join("correlation.csv"), |w| write_correlation_csv(&correlation, w))
}

/// Runs the selected prediction scenarios and writes `eval_report.json` and `importance.csv`.
pub fn cmd_predict(
    analyses: &[ProjectAnalysis],
    scenarios: &[Scenario],
    settings: &CorpusSettings,
    seed: u64,
    out: &Path,
) -> Result<EvalDocument, PipelineError> {
    let (doc, importance) = predict(analyses, scenarios, settings, seed)?;
    write_json(&out.join("eval_report.json"), &doc)?;
    write_csv(&out.join("importance.csv"), |w| crate::learn::write_importance_csv(&importance, w))?;
    Ok(doc)
}

/// Plain-text table with one line per project.
pub fn render_report(analyses: &[ProjectAnalysis]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<12} {:>7} {:>7} {:>8} {:>11} {:>9} {:>9} {:>9}",
        "project", "methods", "covered", "mutants", "ineffective", "spearman", "p", "kendall"
    );
    for a in analyses {
        let ineffective = a.method_rows.iter().filter(|r| r.label == crate::metrics::Label::Ineffective).count();
        let corr = correlate_rows(&a.project_id, &a.method_rows);
        let coef = |i: usize| corr[i].result.as_ref().map_or("n/a".to_string(), |r| format!("{:.3}", r.coefficient));
        let p = corr[0].result.as_ref().map_or("n/a".to_string(), |r| format!("{:.4}", r.p_value));
        let _ = writeln!(
            s,
            "{:<12} {:>7} {:>7} {:>8} {:>11} {:>9} {:>9} {:>9}",
            a.project_id,
            a.methods.len(),
            a.method_rows.len(),
            a.matrix.mutants.len(),
            ineffective,
            coef(0),
            p,
            coef(1),
        );
    }
    s
}

pub fn cmd_report(analyses: &[ProjectAnalysis], out: &Path) -> Result<String, PipelineError> {
    let text = render_report(analyses);
    let path = out.join("report.txt");
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    fs::write(&path, &text).map_err(|e| io_err(&path, e))?;
    Ok(text)
}

/// Output directory for a project within a multi-project run.
pub fn project_out(out: &Path, project_id: &str, multi: bool) -> PathBuf {
    if multi {
        out.join(project_id)
    } else {
        out.to_path_buf()
    }
}
