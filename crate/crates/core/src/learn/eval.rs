//! Confusion-matrix metrics, stratified repeated cross-validation and
//! leave-one-project-out evaluation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{Class, Dataset, EFFECTIVE, INEFFECTIVE};
use super::forest::{train_forest, ForestConfig};
use super::smote::{smote, DEFAULT_NEIGHBORS};
use super::LearnError;

/// Counts indexed `[actual][predicted]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix(pub [[u64; 2]; 2]);

impl ConfusionMatrix {
    pub fn record(&mut self, actual: Class, predicted: Class) {
        self.0[actual as usize][predicted as usize] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for a in 0..2 {
            for p in 0..2 {
                self.0[a][p] += other.0[a][p];
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.0.iter().flatten().sum()
    }

    pub fn support(&self, class: Class) -> u64 {
        self.0[class as usize].iter().sum()
    }

    pub fn class_metrics(&self, class: Class) -> ClassMetrics {
        let c = class as usize;
        let tp = self.0[c][c] as f64;
        let predicted = (self.0[0][c] + self.0[1][c]) as f64;
        let support = self.support(class);
        let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support as f64);
        ClassMetrics { precision, recall, f_score: ratio(2.0 * precision * recall, precision + recall), support }
    }

    /// Support-weighted average of the per-class metrics.
    pub fn weighted(&self) -> Summary {
        let total = self.total() as f64;
        let mut s = Summary::default();
        if total == 0.0 {
            return s;
        }
        for class in [EFFECTIVE, INEFFECTIVE] {
            let m = self.class_metrics(class);
            let w = m.support as f64 / total;
            s.precision += w * m.precision;
            s.recall += w * m.recall;
            s.f_score += w * m.f_score;
        }
        s
    }
}

/// Precision, recall and F-score for one class; 0 where a denominator is 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Project the report is about; for cross-project runs, the held-out one.
    pub project_id: String,
    pub confusion_matrix: ConfusionMatrix,
    pub weighted: Summary,
    pub effective: ClassMetrics,
    pub ineffective: ClassMetrics,
    pub folds_evaluated: usize,
    /// Folds left out because train or test data lacked a class.
    pub folds_skipped: usize,
    /// Evaluated folds whose training part had too few minority rows for SMOTE.
    pub smote_skipped: usize,
    pub synthetic_rows_in_test: usize,
    /// Confusion counts are summed over folds and repeats before metrics are taken.
    pub aggregation: String,
}

impl EvalReport {
    fn new(project_id: &str, tally: FoldTally) -> EvalReport {
        let c = tally.confusion;
        EvalReport {
            project_id: project_id.to_string(),
            confusion_matrix: c,
            weighted: c.weighted(),
            effective: c.class_metrics(EFFECTIVE),
            ineffective: c.class_metrics(INEFFECTIVE),
            folds_evaluated: tally.evaluated,
            folds_skipped: tally.skipped,
            smote_skipped: tally.smote_skipped,
            synthetic_rows_in_test: tally.synthetic_in_test,
            aggregation: "micro".to_string(),
        }
    }
}

impl EvalReport {
    /// Sums the confusion counts and fold tallies of several reports.
    pub fn pool(project_id: &str, reports: &[EvalReport]) -> EvalReport {
        let mut tally = FoldTally::default();
        for r in reports {
            tally.add(&FoldTally {
                confusion: r.confusion_matrix,
                evaluated: r.folds_evaluated,
                skipped: r.folds_skipped,
                smote_skipped: r.smote_skipped,
                synthetic_in_test: r.synthetic_rows_in_test,
            });
        }
        EvalReport::new(project_id, tally)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub repeats: usize,
    pub smote: bool,
    pub smote_neighbors: usize,
    /// Minority rows per majority row after oversampling.
    pub smote_ratio: f64,
    pub forest: ForestConfig,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 10,
            repeats: 3,
            smote: false,
            smote_neighbors: DEFAULT_NEIGHBORS,
            smote_ratio: 1.0,
            forest: ForestConfig::default(),
        }
    }
}

/// SplitMix64 finalizer over `seed` and a tag.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Assigns rows to `k` folds so each fold gets a near-equal share of each class.
pub fn stratified_folds(labels: &[Class], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let k = k.max(1);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in [EFFECTIVE, INEFFECTIVE] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(rng);
        for i in idx {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// One train/test split after optional oversampling of the training part.
#[derive(Debug, Clone)]
pub struct Split {
    pub repeat: usize,
    pub fold: usize,
    pub train: Dataset,
    pub test: Dataset,
    pub smote_skipped: bool,
}

fn has_both(d: &Dataset) -> bool {
    let [e, i] = d.class_counts();
    e > 0 && i > 0
}

fn oversample(train: Dataset, config: &CvConfig, seed: u64) -> (Dataset, bool) {
    if !config.smote {
        return (train, false);
    }
    match smote(&train, config.smote_neighbors, config.smote_ratio, seed) {
        Ok(d) => (d, false),
        Err(_) => (train, true),
    }
}

/// Every (repeat, fold) split of a stratified repeated k-fold run, or the
/// reason it was skipped. SMOTE touches only the training part.
pub fn cv_splits(data: &Dataset, config: &CvConfig, seed: u64) -> Vec<Result<Split, LearnError>> {
    let mut out = Vec::new();
    for repeat in 0..config.repeats {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, repeat as u64));
        let folds = stratified_folds(&data.labels, config.folds, &mut rng);
        for (fold, test_idx) in folds.iter().enumerate() {
            let train_idx: Vec<usize> = (0..data.len()).filter(|i| test_idx.binary_search(i).is_err()).collect();
            let (train, test) = (data.subset(&train_idx), data.subset(test_idx));
            if !has_both(&train) || !has_both(&test) {
                out.push(Err(LearnError::FoldTooSmall { repeat, fold }));
                continue;
            }
            let tag = (1 << 32) + (repeat * config.folds + fold) as u64;
            let (train, smote_skipped) = oversample(train, config, derive_seed(seed, tag));
            out.push(Ok(Split { repeat, fold, train, test, smote_skipped }));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default)]
struct FoldTally {
    confusion: ConfusionMatrix,
    evaluated: usize,
    skipped: usize,
    smote_skipped: usize,
    synthetic_in_test: usize,
}

impl FoldTally {
    fn add(&mut self, other: &FoldTally) {
        self.confusion.merge(&other.confusion);
        self.evaluated += other.evaluated;
        self.skipped += other.skipped;
        self.smote_skipped += other.smote_skipped;
        self.synthetic_in_test += other.synthetic_in_test;
    }
}

fn evaluate_split(split: &Split, forest: &ForestConfig, seed: u64) -> Result<FoldTally, LearnError> {
    let model = train_forest(&split.train, forest, seed)?;
    let mut tally = FoldTally { evaluated: 1, smote_skipped: usize::from(split.smote_skipped), ..Default::default() };
    for (p, &actual) in model.predict_dataset(&split.test)?.iter().zip(&split.test.labels) {
        tally.confusion.record(actual, p.class);
    }
    tally.synthetic_in_test = split.test.origins.iter().filter(|o| o.is_synthetic()).count();
    Ok(tally)
}

fn tally_splits(splits: Vec<Result<Split, LearnError>>, forest: &ForestConfig, seed: u64) -> Result<FoldTally, LearnError> {
    let parts: Vec<Result<FoldTally, LearnError>> = splits
        .into_par_iter()
        .enumerate()
        .map(|(i, split)| match split {
            Ok(s) => evaluate_split(&s, forest, derive_seed(seed, (2 << 32) + i as u64)),
            Err(LearnError::FoldTooSmall { .. }) => Ok(FoldTally { skipped: 1, ..Default::default() }),
            Err(e) => Err(e),
        })
        .collect();
    let mut total = FoldTally::default();
    for p in parts {
        total.add(&p?);
    }
    Ok(total)
}

/// Stratified repeated k-fold cross-validation of a forest on one dataset.
pub fn cross_validate(data: &Dataset, config: &CvConfig, seed: u64) -> Result<EvalReport, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let tally = tally_splits(cv_splits(data, config, seed), &config.forest, seed)?;
    let project = data.group_keys().join("+");
    Ok(EvalReport::new(&project, tally))
}

/// Leave-one-group-out splits, one per distinct group key in first-seen order.
pub fn project_splits(data: &Dataset, config: &CvConfig, seed: u64) -> Result<Vec<(String, Result<Split, LearnError>)>, LearnError> {
    let keys = data.group_keys();
    if keys.len() < 2 {
        return Err(LearnError::SingleProject);
    }
    Ok(keys
        .into_iter()
        .enumerate()
        .map(|(fold, key)| {
            let (test_idx, train_idx): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| data.groups[i] == key);
            let (train, test) = (data.subset(&train_idx), data.subset(&test_idx));
            let split = if !has_both(&train) || test.is_empty() {
                Err(LearnError::FoldTooSmall { repeat: 0, fold })
            } else {
                let (train, smote_skipped) = oversample(train, config, derive_seed(seed, (3 << 32) + fold as u64));
                Ok(Split { repeat: 0, fold, train, test, smote_skipped })
            };
            (key, split)
        })
        .collect())
}

/// Trains on all other projects and tests on each held-out project in turn.
///
/// Unlike within-project folds, a held-out project with a single class is
/// still evaluated; only a single-class training side is skipped.
pub fn cross_project_eval(data: &Dataset, config: &CvConfig, seed: u64) -> Result<Vec<EvalReport>, LearnError> {
    project_splits(data, config, seed)?
        .into_iter()
        .map(|(key, split)| {
            let tally = tally_splits(vec![split], &config.forest, derive_seed(seed, 4 << 32))?;
            Ok(EvalReport::new(&key, tally))
        })
        .collect()
}
