//! Rank correlation between minimal stack distance and mutation outcome.
//!
//! Outcomes are encoded 1 = ineffectively tested, 0 = effectively tested,
//! so a positive coefficient means the share of ineffectively tested
//! methods grows with distance.

pub mod special;

use std::collections::BTreeMap;
use std::fmt;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{FeatureVector, Label};

/// Largest sample size for which p-values come from full permutation enumeration.
pub const EXACT_MAX_N: usize = 8;

/// Significance level used to call a correlation significant.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("input vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("coefficient undefined: one input is constant")]
    DegenerateInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorrelationMethod {
    Spearman,
    KendallTauB,
}

impl fmt::Display for CorrelationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationMethod::Spearman => "spearman",
            CorrelationMethod::KendallTauB => "kendall",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub method: CorrelationMethod,
    pub coefficient: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub n: usize,
    /// Whether `p_value` comes from exact permutation enumeration.
    pub exact: bool,
}

impl CorrelationResult {
    pub fn significant(&self) -> bool {
        self.p_value < SIGNIFICANCE_LEVEL
    }
}

fn validate(x: &[f64], y: &[f64]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewSamples(x.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
    if constant(x) || constant(y) {
        return Err(StatsError::DegenerateInput);
    }
    Ok(())
}

/// Ranks starting at 1; tied values share the average of their positions.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Visits every permutation of `items` (Heap's algorithm, iterative).
fn for_each_permutation(items: &mut [f64], mut visit: impl FnMut(&[f64])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Share of permutations of `y` whose statistic is at least as extreme as the observed one.
fn permutation_p(x: &[f64], y: &[f64], statistic: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    let observed = statistic(x, y).abs();
    let mut perm = y.to_vec();
    let (mut extreme, mut total) = (0u64, 0u64);
    for_each_permutation(&mut perm, |p| {
        total += 1;
        if statistic(x, p).abs() >= observed - 1e-12 {
            extreme += 1;
        }
    });
    extreme as f64 / total as f64
}

/// Spearman rank correlation with a two-sided p-value.
///
/// The coefficient is the Pearson correlation of mid-ranks. For
/// `n <= EXACT_MAX_N` the p-value enumerates every permutation; otherwise it
/// uses t = r * sqrt((n - 2) / (1 - r^2)) with n - 2 degrees of freedom.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    validate(x, y)?;
    let (rx, ry) = (mid_ranks(x), mid_ranks(y));
    let r = pearson(&rx, &ry);
    let n = x.len();
    let (p_value, exact) = if n <= EXACT_MAX_N {
        (permutation_p(&rx, &ry, pearson), true)
    } else if r.abs() >= 1.0 {
        (0.0, false)
    } else {
        let df = (n - 2) as f64;
        let t = r * (df / (1.0 - r * r)).sqrt();
        (special::student_t_two_sided(t, df), false)
    };
    Ok(CorrelationResult { method: CorrelationMethod::Spearman, coefficient: r, p_value, n, exact })
}

/// Number of pairs sharing a value, summed over tie groups: sum of t(t-1)/2.
fn tie_groups(sorted: &[f64]) -> Vec<u64> {
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        if j > i {
            groups.push((j - i + 1) as u64);
        }
        i = j + 1;
    }
    groups
}

// Counts inversions of `v` while merge-sorting it.
fn merge_count(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], buf) + merge_count(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

struct KendallCounts {
    /// Concordant minus discordant pairs.
    s: f64,
    n0: f64,
    x_ties: Vec<u64>,
    y_ties: Vec<u64>,
}

// Knight's O(n log n) pair counting.
fn kendall_counts(x: &[f64], y: &[f64]) -> KendallCounts {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();

    let x_ties = tie_groups(&xs);
    let pairs = |g: &[u64]| g.iter().map(|t| t * (t - 1) / 2).sum::<u64>();
    let n1 = pairs(&x_ties);
    // Pairs tied in both x and y: runs of equal (x, y) in the sorted order.
    let mut n3 = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[j + 1] == xs[i] && ys[j + 1] == ys[i] {
            j += 1;
        }
        let t = (j - i + 1) as u64;
        n3 += t * (t - 1) / 2;
        i = j + 1;
    }
    let discordant = merge_count(&mut ys, &mut Vec::with_capacity(n));
    let y_ties = tie_groups(&ys);
    let n2 = pairs(&y_ties);
    let n0 = (n * (n - 1) / 2) as u64;
    let s = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * discordant as f64;
    KendallCounts { s, n0: n0 as f64, x_ties, y_ties }
}

fn tau_b(c: &KendallCounts) -> f64 {
    let pairs = |g: &[u64]| g.iter().map(|t| (t * (t - 1) / 2) as f64).sum::<f64>();
    let denom = ((c.n0 - pairs(&c.x_ties)) * (c.n0 - pairs(&c.y_ties))).sqrt();
    (c.s / denom).clamp(-1.0, 1.0)
}

// O(n^2) S statistic; only used inside permutation enumeration where n is tiny.
fn kendall_s(x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let prod = (x[i] - x[j]) * (y[i] - y[j]);
            if prod != 0.0 {
                s += prod.signum();
            }
        }
    }
    s
}

/// Kendall's tau-b with tie correction and a two-sided p-value.
///
/// For `n <= EXACT_MAX_N` the p-value enumerates permutations of `y`;
/// otherwise it uses the normal approximation of S with the tie-corrected
/// variance.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    validate(x, y)?;
    let counts = kendall_counts(x, y);
    let tau = tau_b(&counts);
    let n = x.len();
    let (p_value, exact) = if n <= EXACT_MAX_N {
        (permutation_p(x, y, kendall_s), true)
    } else {
        let nf = n as f64;
        let sum = |g: &[u64], f: &dyn Fn(f64) -> f64| g.iter().map(|&t| f(t as f64)).sum::<f64>();
        let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
        let vt = sum(&counts.x_ties, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
        let vu = sum(&counts.y_ties, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
        let v1 = sum(&counts.x_ties, &|t| t * (t - 1.0)) * sum(&counts.y_ties, &|t| t * (t - 1.0));
        let v2 = sum(&counts.x_ties, &|t| t * (t - 1.0) * (t - 2.0))
            * sum(&counts.y_ties, &|t| t * (t - 1.0) * (t - 2.0));
        let var = (v0 - vt - vu) / 18.0 + v1 / (2.0 * nf * (nf - 1.0)) + v2 / (9.0 * nf * (nf - 1.0) * (nf - 2.0));
        (special::normal_two_sided(counts.s / var.sqrt()), false)
    };
    Ok(CorrelationResult { method: CorrelationMethod::KendallTauB, coefficient: tau, p_value, n, exact })
}

/// Distance against binary outcome (ineffective = 1) over method rows.
pub fn distance_outcome_vectors(rows: &[FeatureVector]) -> (Vec<f64>, Vec<f64>) {
    rows.iter().map(|r| (f64::from(r.min_stack_distance), r.label.as_binary())).unzip()
}

/// One line of `correlation.csv`; degenerate inputs keep their error.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub project_id: String,
    pub method: CorrelationMethod,
    pub result: Result<CorrelationResult, StatsError>,
    pub n: usize,
}

pub fn correlate_rows(project_id: &str, rows: &[FeatureVector]) -> Vec<CorrelationRow> {
    let (x, y) = distance_outcome_vectors(rows);
    [(CorrelationMethod::Spearman, spearman(&x, &y)), (CorrelationMethod::KendallTauB, kendall_tau_b(&x, &y))]
        .into_iter()
        .map(|(method, result)| CorrelationRow { project_id: project_id.to_string(), method, result, n: x.len() })
        .collect()
}

/// Writes `correlation.csv`. Degenerate rows carry `NaN` and an empty p-value.
pub fn write_correlation_csv<W: io::Write>(rows: &[CorrelationRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["project_id", "method", "coefficient", "p_value", "n"])?;
    for row in rows {
        let (coef, p) = match &row.result {
            Ok(r) => (r.coefficient.to_string(), r.p_value.to_string()),
            Err(_) => ("NaN".to_string(), String::new()),
        };
        w.write_record([row.project_id.clone(), row.method.to_string(), coef, p, row.n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBucket {
    pub distance: u32,
    pub methods: usize,
    /// Share of all methods that have this distance.
    pub method_proportion: f64,
    /// Share of this bucket's methods that are ineffectively tested.
    pub ineffective_proportion: f64,
}

/// Default cropping threshold for bucket reports.
pub const BUCKET_CROP_THRESHOLD: f64 = 0.005;

/// Every distance value present in the rows, ascending, without cropping.
pub fn distance_buckets(rows: &[FeatureVector]) -> Vec<DistanceBucket> {
    let mut counts: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for r in rows {
        let e = counts.entry(r.min_stack_distance).or_default();
        e.0 += 1;
        if r.label == Label::Ineffective {
            e.1 += 1;
        }
    }
    let total = rows.len() as f64;
    counts
        .into_iter()
        .map(|(distance, (methods, ineffective))| DistanceBucket {
            distance,
            methods,
            method_proportion: methods as f64 / total,
            ineffective_proportion: ineffective as f64 / methods as f64,
        })
        .collect()
}

/// Buckets in ascending distance, cut at the first bucket whose share of
/// methods falls below `crop_below`.
pub fn distance_bucket_report(rows: &[FeatureVector], crop_below: f64) -> Vec<DistanceBucket> {
    distance_buckets(rows).into_iter().take_while(|b| b.method_proportion >= crop_below).collect()
}

/// Writes `buckets.csv`.
pub fn write_buckets_csv<W: io::Write>(buckets: &[DistanceBucket], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["distance", "method_proportion", "ineffective_proportion"])?;
    for b in buckets {
        w.write_record([b.distance.to_string(), b.method_proportion.to_string(), b.ineffective_proportion.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
