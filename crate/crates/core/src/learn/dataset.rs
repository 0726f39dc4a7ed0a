use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::lang::ReturnCategory;
use crate::metrics::{FeatureVector, Label, NUMERIC_FEATURES};

/// Class index used throughout the learner: 0 = effective, 1 = ineffective.
pub type Class = u8;

pub const EFFECTIVE: Class = 0;
pub const INEFFECTIVE: Class = 1;

pub fn class_name(c: Class) -> &'static str {
    if c == INEFFECTIVE {
        "ineffective"
    } else {
        "effective"
    }
}

/// Where a row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowOrigin {
    /// Index into the dataset the row was first loaded into.
    Original(usize),
    /// Interpolated by SMOTE between a seed row and one of its neighbours.
    Synthetic { seed: usize, neighbor: usize },
}

impl RowOrigin {
    pub fn is_synthetic(self) -> bool {
        matches!(self, RowOrigin::Synthetic { .. })
    }
}

/// Feature matrix with labels, project groups and row provenance.
///
/// The first `numeric_columns` columns are numeric; the rest are one-hot
/// indicators that SMOTE copies rather than interpolates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub numeric_columns: usize,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Class>,
    pub groups: Vec<String>,
    pub origins: Vec<RowOrigin>,
}

/// Column names for datasets built from feature vectors.
pub fn feature_schema() -> Vec<String> {
    NUMERIC_FEATURES
        .iter()
        .map(|s| s.to_string())
        .chain(ReturnCategory::ALL.iter().map(|c| format!("return_{}", c.as_str())))
        .collect()
}

impl Dataset {
    pub fn from_features(project_id: &str, rows: &[FeatureVector]) -> Dataset {
        let mut d = Dataset {
            feature_names: feature_schema(),
            numeric_columns: NUMERIC_FEATURES.len(),
            ..Dataset::default()
        };
        for (i, r) in rows.iter().enumerate() {
            let mut x = r.numeric().to_vec();
            x.extend(ReturnCategory::ALL.iter().map(|c| if *c == r.return_category { 1.0 } else { 0.0 }));
            d.rows.push(x);
            d.labels.push(match r.label {
                Label::Effective => EFFECTIVE,
                Label::Ineffective => INEFFECTIVE,
            });
            d.groups.push(project_id.to_string());
            d.origins.push(RowOrigin::Original(i));
        }
        d
    }

    /// Builds a dataset from raw numeric rows, all in one group.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<Class>) -> Result<Dataset, LearnError> {
        if rows.len() != labels.len() {
            return Err(LearnError::Shape(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(LearnError::Shape("rows differ in width".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(LearnError::Shape("non-finite feature value".into()));
        }
        Ok(Dataset {
            feature_names: (0..width).map(|i| format!("x{i}")).collect(),
            numeric_columns: width,
            origins: (0..rows.len()).map(RowOrigin::Original).collect(),
            groups: vec![String::new(); rows.len()],
            rows,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&c| c == INEFFECTIVE).count();
        [self.labels.len() - ones, ones]
    }

    /// The rarer class; ties go to ineffective.
    pub fn minority_class(&self) -> Class {
        let [e, i] = self.class_counts();
        if e < i {
            EFFECTIVE
        } else {
            INEFFECTIVE
        }
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            numeric_columns: self.numeric_columns,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            groups: indices.iter().map(|&i| self.groups[i].clone()).collect(),
            origins: indices.iter().map(|&i| self.origins[i]).collect(),
        }
    }

    /// Appends another dataset with the same schema; origins are renumbered past this one's rows.
    pub fn append(&mut self, other: &Dataset) -> Result<(), LearnError> {
        if self.is_empty() && self.feature_names.is_empty() {
            *self = other.clone();
            return Ok(());
        }
        if other.feature_names != self.feature_names {
            return Err(LearnError::SchemaMismatch { expected: self.width(), found: other.width() });
        }
        let offset = self.len();
        self.rows.extend(other.rows.iter().cloned());
        self.labels.extend(&other.labels);
        self.groups.extend(other.groups.iter().cloned());
        self.origins.extend(other.origins.iter().map(|o| match *o {
            RowOrigin::Original(i) => RowOrigin::Original(i + offset),
            RowOrigin::Synthetic { seed, neighbor } => {
                RowOrigin::Synthetic { seed: seed + offset, neighbor: neighbor + offset }
            }
        }));
        Ok(())
    }

    /// Distinct group keys in first-seen order.
    pub fn group_keys(&self) -> Vec<String> {
        let mut keys: Vec<String> = Vec::new();
        for g in &self.groups {
            if !keys.contains(g) {
                keys.push(g.clone());
            }
        }
        keys
    }
}
