//! Labeled feature datasets at method and (method, test) pair granularity.
//!
//! All measures come from a single recorded suite execution; the label comes
//! from the full mutation matrix.

use std::collections::BTreeMap;
use std::fmt;
use std::io;

use serde::{Deserialize, Serialize};

use crate::interp::ExecutionLog;
use crate::lang::{MethodInfo, ReturnCategory};
use crate::mutation::{MethodVerdict, MutationError, MutationMatrix, PairVerdict, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Method,
    Pair,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Method => "method",
            Granularity::Pair => "pair",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Effective,
    Ineffective,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Effective => "effective",
            Label::Ineffective => "ineffective",
        }
    }

    /// Binary encoding used for correlation: ineffective = 1.
    pub fn as_binary(self) -> f64 {
        match self {
            Label::Effective => 0.0,
            Label::Ineffective => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub granularity: Granularity,
    pub method_id: String,
    pub test_id: Option<String>,
    pub line_count: u32,
    pub branch_count: u32,
    pub line_coverage: f64,
    pub branch_coverage: f64,
    pub covering_test_count: u32,
    /// Smallest number of methods covered by any of the covering tests.
    pub test_scope: u32,
    pub max_invocation_count: u64,
    pub min_stack_distance: u32,
    pub return_category: ReturnCategory,
    pub label: Label,
}

/// Names of the numeric feature columns, in [`FeatureVector::numeric`] order.
pub const NUMERIC_FEATURES: [&str; 8] = [
    "line_count",
    "branch_count",
    "line_coverage",
    "branch_coverage",
    "covering_test_count",
    "test_scope",
    "max_invocation_count",
    "min_stack_distance",
];

impl FeatureVector {
    pub fn numeric(&self) -> [f64; 8] {
        [
            f64::from(self.line_count),
            f64::from(self.branch_count),
            self.line_coverage,
            self.branch_coverage,
            f64::from(self.covering_test_count),
            f64::from(self.test_scope),
            self.max_invocation_count as f64,
            f64::from(self.min_stack_distance),
        ]
    }
}

fn fraction(covered: usize, total: u32) -> f64 {
    if total == 0 {
        1.0
    } else {
        covered as f64 / f64::from(total)
    }
}

fn verdicts(matrix: &MutationMatrix) -> Result<Vec<MethodVerdict>, MutationError> {
    matrix.classify_methods()
}

/// One row per covered, eligible method.
pub fn build_method_dataset(
    log: &ExecutionLog,
    matrix: &MutationMatrix,
    methods: &[MethodInfo],
) -> Result<Vec<FeatureVector>, MutationError> {
    let mut rows = Vec::new();
    for verdict in verdicts(matrix)? {
        let info = &methods[verdict.method];
        let records: Vec<_> = log.records_of(verdict.method).collect();
        let mut lines = std::collections::BTreeSet::new();
        let mut dirs = std::collections::BTreeSet::new();
        for r in &records {
            lines.extend(r.covered_lines.iter().copied());
            dirs.extend(r.covered_branch_dirs.iter().copied());
        }
        rows.push(FeatureVector {
            granularity: Granularity::Method,
            method_id: info.method_id.clone(),
            test_id: None,
            line_count: info.statement_count,
            branch_count: info.branch_count,
            line_coverage: fraction(lines.len(), info.statement_count),
            branch_coverage: fraction(dirs.len(), info.branch_count),
            covering_test_count: records.len() as u32,
            test_scope: records.iter().map(|r| log.covered_methods[r.test].len() as u32).min().unwrap_or(0),
            max_invocation_count: records.iter().map(|r| r.invocation_count).max().unwrap_or(0),
            min_stack_distance: records.iter().map(|r| r.min_stack_distance).min().unwrap_or(0),
            return_category: info.return_category,
            label: match verdict.verdict {
                Verdict::IneffectivelyTested => Label::Ineffective,
                Verdict::EffectivelyTested => Label::Effective,
            },
        });
    }
    Ok(rows)
}

/// One row per covering (method, test) pair of every covered, eligible method.
pub fn build_pair_dataset(
    log: &ExecutionLog,
    matrix: &MutationMatrix,
    methods: &[MethodInfo],
) -> Result<Vec<FeatureVector>, MutationError> {
    let mut rows = Vec::new();
    for verdict in verdicts(matrix)? {
        let info = &methods[verdict.method];
        let covering = log.covering_tests(verdict.method).len() as u32;
        for (&test, pair) in &verdict.pairs {
            let r = &log.traces[&(verdict.method, test)];
            rows.push(FeatureVector {
                granularity: Granularity::Pair,
                method_id: info.method_id.clone(),
                test_id: Some(r.test_id.clone()),
                line_count: info.statement_count,
                branch_count: info.branch_count,
                line_coverage: fraction(r.covered_lines.len(), info.statement_count),
                branch_coverage: fraction(r.covered_branch_dirs.len(), info.branch_count),
                covering_test_count: covering,
                test_scope: log.covered_methods[test].len() as u32,
                max_invocation_count: r.invocation_count,
                min_stack_distance: r.min_stack_distance,
                return_category: info.return_category,
                label: match pair {
                    PairVerdict::Ineffective => Label::Ineffective,
                    PairVerdict::Effective => Label::Effective,
                },
            });
        }
    }
    Ok(rows)
}

/// Writes `dataset_method.csv` or `dataset_pair.csv`, depending on the rows' granularity.
pub fn write_dataset_csv<W: io::Write>(rows: &[FeatureVector], granularity: Granularity, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["granularity", "method_id"];
    if granularity == Granularity::Pair {
        header.push("test_id");
    }
    header.extend(NUMERIC_FEATURES);
    header.extend(["return_category", "label"]);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.granularity.to_string(), r.method_id.clone()];
        if granularity == Granularity::Pair {
            rec.push(r.test_id.clone().unwrap_or_default());
        }
        rec.extend([
            r.line_count.to_string(),
            r.branch_count.to_string(),
            r.line_coverage.to_string(),
            r.branch_coverage.to_string(),
            r.covering_test_count.to_string(),
            r.test_scope.to_string(),
            r.max_invocation_count.to_string(),
            r.min_stack_distance.to_string(),
            r.return_category.to_string(),
            r.label.as_str().to_string(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Groups pair rows by method id.
pub fn pairs_by_method(rows: &[FeatureVector]) -> BTreeMap<&str, Vec<&FeatureVector>> {
    let mut out: BTreeMap<&str, Vec<&FeatureVector>> = BTreeMap::new();
    for r in rows {
        out.entry(r.method_id.as_str()).or_default().push(r);
    }
    out
}
