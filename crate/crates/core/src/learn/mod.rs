//! Random-forest prediction of ineffectively tested methods.

pub mod dataset;
pub mod eval;
pub mod forest;
pub mod smote;
pub mod tree;

use thiserror::Error;

pub use dataset::{feature_schema, Class, Dataset, RowOrigin, EFFECTIVE, INEFFECTIVE};
pub use eval::{cross_project_eval, cross_validate, ConfusionMatrix, CvConfig, EvalReport};
pub use forest::{train_forest, write_importance_csv, ForestConfig, ForestModel, MaxFeatures, Prediction};
pub use smote::smote;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnError {
    #[error("training data holds a single class")]
    SingleClassDataset,
    #[error("feature schema mismatch: model expects {expected} columns, got {found}")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("model has no trees")]
    UntrainedModel,
    #[error("SMOTE needs at least 2 minority rows, got {0}")]
    TooFewMinoritySamples(usize),
    #[error("fold {fold} of repeat {repeat} lacks a class")]
    FoldTooSmall { repeat: usize, fold: usize },
    #[error("cross-project evaluation needs at least two projects")]
    SingleProject,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("malformed dataset: {0}")]
    Shape(String),
}
