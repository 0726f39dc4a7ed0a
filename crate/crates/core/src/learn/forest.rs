use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{Class, Dataset, INEFFECTIVE};
use super::tree::{Tree, TreeParams};
use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    /// floor(sqrt(p)), at least 1.
    Sqrt,
    All,
    Fixed(usize),
}

impl MaxFeatures {
    pub fn resolve(self, width: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((width as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::All => width,
            MaxFeatures::Fixed(n) => n.clamp(1, width.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub min_leaf: usize,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { n_trees: 100, max_features: MaxFeatures::Sqrt, min_leaf: 1, bootstrap: true }
    }
}

impl ForestConfig {
    /// One tree on all rows, every feature examined at every split.
    pub fn single_tree() -> Self {
        ForestConfig { n_trees: 1, max_features: MaxFeatures::All, min_leaf: 1, bootstrap: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub feature_names: Vec<String>,
    pub config: ForestConfig,
    pub seed: u64,
    /// Class that wins tied votes: the rarer class in the training data.
    pub minority_class: Class,
    pub trees: Vec<Tree>,
    /// Total weighted Gini decrease per feature over all trees.
    pub feature_importance: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class: Class,
    /// Share of trees voting for `class`.
    pub vote_fraction: f64,
}

/// RNG for tree `index` of a forest seeded with `seed`.
pub fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Trains a forest. Trees are grown in parallel on the current rayon pool;
/// each draws from its own stream so the result is independent of thread count.
pub fn train_forest(data: &Dataset, config: &ForestConfig, seed: u64) -> Result<ForestModel, LearnError> {
    let [e, i] = data.class_counts();
    if e == 0 || i == 0 {
        return Err(LearnError::SingleClassDataset);
    }
    let params = TreeParams { max_features: config.max_features.resolve(data.width()), min_leaf: config.min_leaf };
    let n = data.len();
    let grown: Vec<(Tree, Vec<f64>)> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(seed, t);
            let rows = if config.bootstrap { (0..n).map(|_| rng.gen_range(0..n)).collect() } else { (0..n).collect() };
            let mut importance = vec![0.0; data.width()];
            let tree = Tree::fit(data, rows, &params, &mut rng, &mut importance);
            (tree, importance)
        })
        .collect();
    let mut feature_importance = vec![0.0; data.width()];
    let mut trees = Vec::with_capacity(grown.len());
    for (tree, imp) in grown {
        for (total, v) in feature_importance.iter_mut().zip(imp) {
            *total += v;
        }
        trees.push(tree);
    }
    Ok(ForestModel {
        feature_names: data.feature_names.clone(),
        config: *config,
        seed,
        minority_class: data.minority_class(),
        trees,
        feature_importance,
    })
}

impl ForestModel {
    fn check_width(&self, width: usize) -> Result<(), LearnError> {
        if self.trees.is_empty() {
            return Err(LearnError::UntrainedModel);
        }
        if width != self.feature_names.len() {
            return Err(LearnError::SchemaMismatch { expected: self.feature_names.len(), found: width });
        }
        Ok(())
    }

    pub fn predict_row(&self, x: &[f64]) -> Result<Prediction, LearnError> {
        self.check_width(x.len())?;
        let ones = self.trees.iter().filter(|t| t.predict(x, self.minority_class) == INEFFECTIVE).count();
        let zeros = self.trees.len() - ones;
        let class = match zeros.cmp(&ones) {
            std::cmp::Ordering::Greater => 0,
            std::cmp::Ordering::Less => INEFFECTIVE,
            std::cmp::Ordering::Equal => self.minority_class,
        };
        let votes = if class == INEFFECTIVE { ones } else { zeros };
        Ok(Prediction { class, vote_fraction: votes as f64 / self.trees.len() as f64 })
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<Prediction>, LearnError> {
        rows.iter().map(|x| self.predict_row(x)).collect()
    }

    /// Predicts a dataset whose column names must match the training schema.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<Prediction>, LearnError> {
        if self.trees.is_empty() {
            return Err(LearnError::UntrainedModel);
        }
        if data.feature_names != self.feature_names {
            return Err(LearnError::SchemaMismatch { expected: self.feature_names.len(), found: data.width() });
        }
        self.predict(&data.rows)
    }

    /// Importance scaled so the largest is 1, sorted descending (ties keep column order).
    /// All zeros when no tree ever split.
    pub fn importance_report(&self) -> Vec<(String, f64)> {
        let max = self.feature_importance.iter().cloned().fold(0.0, f64::max);
        let mut out: Vec<(String, f64)> = self
            .feature_names
            .iter()
            .zip(&self.feature_importance)
            .map(|(name, &v)| (name.clone(), if max > 0.0 { v / max } else { 0.0 }))
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1));
        out
    }
}

/// Writes `importance.csv`.
pub fn write_importance_csv<W: io::Write>(report: &[(String, f64)], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["feature", "importance"])?;
    for (name, v) in report {
        w.write_record([name.clone(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable(n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let (a, b): (f64, f64) = (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
            labels.push(u8::from(a + b > 10.0));
            rows.push(vec![a, b]);
        }
        Dataset::from_rows(rows, labels).unwrap()
    }

    #[test]
    fn fits_training_data() {
        let d = separable(120);
        let m = train_forest(&d, &ForestConfig::default(), 1).unwrap();
        let acc = m.predict(&d.rows).unwrap().iter().zip(&d.labels).filter(|(p, y)| p.class == **y).count();
        assert_eq!(acc, d.len());
    }

    #[test]
    fn same_seed_same_model() {
        let d = separable(80);
        let a = train_forest(&d, &ForestConfig::default(), 5).unwrap();
        let b = train_forest(&d, &ForestConfig::default(), 5).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = train_forest(&d, &ForestConfig::default(), 6).unwrap();
        assert_ne!(a.trees, c.trees);
    }

    #[test]
    fn single_class_is_rejected() {
        let d = Dataset::from_rows(vec![vec![1.0], vec![2.0]], vec![1, 1]).unwrap();
        assert_eq!(train_forest(&d, &ForestConfig::default(), 0), Err(LearnError::SingleClassDataset));
    }

    #[test]
    fn schema_checks() {
        let d = separable(30);
        let m = train_forest(&d, &ForestConfig::default(), 0).unwrap();
        assert_eq!(m.predict_row(&[1.0]), Err(LearnError::SchemaMismatch { expected: 2, found: 1 }));
        let empty = ForestModel { trees: Vec::new(), ..m };
        assert_eq!(empty.predict_row(&[1.0, 2.0]), Err(LearnError::UntrainedModel));
    }

    #[test]
    fn unanimous_vote() {
        let d = Dataset::from_rows(vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]], vec![0, 0, 1, 1]).unwrap();
        let cfg = ForestConfig { n_trees: 5, bootstrap: false, ..ForestConfig::default() };
        let m = train_forest(&d, &cfg, 0).unwrap();
        assert_eq!(m.predict_row(&[20.0]).unwrap(), Prediction { class: 1, vote_fraction: 1.0 });
    }

    #[test]
    fn tied_vote_goes_to_minority() {
        let d = Dataset::from_rows(vec![vec![1.0], vec![1.0], vec![0.0]], vec![0, 1, 0]).unwrap();
        let m = train_forest(&d, &ForestConfig::single_tree(), 0).unwrap();
        assert_eq!(m.minority_class, 1);
        assert_eq!(m.predict_row(&[1.0]).unwrap().class, 1);
    }

    #[test]
    fn importance_prefers_signal_and_ignores_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..200 {
            let signal: f64 = rng.gen_range(0.0..10.0);
            rows.push(vec![rng.gen_range(0.0..1.0), 4.0, signal]);
            labels.push(u8::from(signal > 6.0));
        }
        let mut d = Dataset::from_rows(rows, labels).unwrap();
        d.feature_names = vec!["noise".into(), "constant".into(), "signal".into()];
        let m = train_forest(&d, &ForestConfig::default(), 11).unwrap();
        let report = m.importance_report();
        assert_eq!(report[0], ("signal".to_string(), 1.0));
        assert_eq!(report.iter().find(|r| r.0 == "constant").unwrap().1, 0.0);
        assert!(report.windows(2).all(|w| w[0].1 >= w[1].1));
    }
}
