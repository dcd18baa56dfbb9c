//! Subject-grouped cross-validation, threshold and ROC metrics, permutation
//! importance, class mean cycles and the run report.

mod cv;
pub mod figures;
mod folds;
mod importance;
mod mean_cycle;
mod metrics;
mod report;

pub use cv::{aggregate, cross_validate, cross_validate_record_wise, split_subjects, FoldResult, ModelReport};
pub use folds::{grouped_stratified_kfold, record_wise_kfold, subject_kfold, subject_labels, FoldPlan};
pub use importance::{importance_with, permutation_importance};
pub use mean_cycle::{mean_cycle_report, ClassMean, MeanCycleReport, GRID_CENTER, GRID_POINTS};
pub use metrics::{confusion_metrics, roc_auc, summarize, Confusion, MetricSet, RocPoint, Summary};
pub use report::{fingerprint, EvaluationReport, REPORT_FORMAT_VERSION};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::ModelError;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("class {class} has {got} subjects, need at least {needed}")]
    TooFewSubjects { class: u8, needed: usize, got: usize },
    #[error("fold count must be at least 2, got {0}")]
    BadK(usize),
    #[error("subject {0} has cycles with different labels")]
    InconsistentLabel(String),
    #[error("subject {0} is not in the fold plan")]
    Unassigned(String),
    #[error("subject {0} appears in both train and test")]
    Leak(String),
    #[error("fold {0} has no train or no test cycles")]
    EmptyFold(usize),
    #[error("only one class present")]
    SingleClass,
    #[error("class {0} has no cycles")]
    EmptyClass(String),
    #[error("empty input")]
    EmptyInput,
    #[error("score {0} is not finite")]
    NonFinite(usize),
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("report: {0}")]
    Report(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub k: usize,
    /// Scores at or above this are called diabetic.
    pub threshold: f64,
    /// 0 disables permutation importance.
    pub permutation_repeats: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            k: 5,
            threshold: 0.5,
            permutation_repeats: 10,
        }
    }
}
