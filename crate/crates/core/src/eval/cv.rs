use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::FoldPlan;
use super::importance::permutation_importance;
use super::metrics::{confusion_metrics, roc_auc, summarize, Confusion, MetricSet, RocPoint, Summary};
use super::{EvalConfig, EvalError};
use crate::features::FeatureVector;
use crate::models::{Model, ModelConfig, ModelKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub test_subjects: Vec<String>,
    pub confusion: Confusion,
    pub metrics: MetricSet,
    pub roc: Vec<RocPoint>,
    /// Per-feature AUC drop on this fold's test cycles; empty when disabled.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub importance: Vec<f64>,
}

/// Cross-validated results for one model kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub kind: ModelKind,
    pub folds: Vec<FoldResult>,
    /// Mean and sample std across folds, keyed by metric name.
    pub aggregate: BTreeMap<String, Summary>,
    /// Fold-mean permutation importance per feature.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub importance: Vec<f64>,
}

impl ModelReport {
    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.aggregate.get(metric).and_then(|s| s.mean)
    }
}

/// Recompute the per-metric summaries from fold results.
pub fn aggregate(folds: &[FoldResult]) -> BTreeMap<String, Summary> {
    MetricSet::NAMES
        .iter()
        .map(|&name| {
            let vals: Vec<f64> = folds.iter().filter_map(|f| f.metrics.get(name)).collect();
            (name.to_string(), summarize(&vals))
        })
        .collect()
}

fn fold_mean_importance(folds: &[FoldResult]) -> Vec<f64> {
    let Some(d) = folds.first().map(|f| f.importance.len()) else {
        return Vec::new();
    };
    (0..d)
        .map(|j| folds.iter().map(|f| f.importance[j]).sum::<f64>() / folds.len() as f64)
        .collect()
}

/// Subjects on each side of `fold` for a per-record fold assignment.
pub fn split_subjects<'a>(vectors: &'a [FeatureVector], folds: &[usize], fold: usize) -> (BTreeSet<&'a str>, BTreeSet<&'a str>) {
    let mut train = BTreeSet::new();
    let mut test = BTreeSet::new();
    for (v, &f) in vectors.iter().zip(folds) {
        if f == fold {
            test.insert(v.subject_id.as_str());
        } else {
            train.insert(v.subject_id.as_str());
        }
    }
    (train, test)
}

fn run_fold(
    vectors: &[FeatureVector],
    folds: &[usize],
    fold: usize,
    kind: ModelKind,
    model_cfg: &ModelConfig,
    cfg: &EvalConfig,
    seed: u64,
) -> Result<FoldResult, EvalError> {
    let (mut xtr, mut ytr, mut xte, mut yte) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (v, &f) in vectors.iter().zip(folds) {
        if f == fold {
            xte.push(v.values.clone());
            yte.push(v.label);
        } else {
            xtr.push(v.values.clone());
            ytr.push(v.label);
        }
    }
    if xte.is_empty() || xtr.is_empty() {
        return Err(EvalError::EmptyFold(fold));
    }
    let model = Model::train(kind, &xtr, &ytr, model_cfg)?;
    let scores = model.predict_many(&xte)?;
    let confusion = Confusion::at_threshold(&scores, &yte, cfg.threshold);
    let mut metrics = confusion_metrics(&confusion)?;
    let roc = match roc_auc(&scores, &yte) {
        Ok((auc, roc)) => {
            metrics.auc = Some(auc);
            roc
        }
        Err(EvalError::SingleClass) => Vec::new(),
        Err(e) => return Err(e),
    };
    let importance = if cfg.permutation_repeats > 0 && metrics.auc.is_some() {
        permutation_importance(&model, &xte, &yte, cfg.permutation_repeats, seed ^ fold as u64)?
    } else {
        Vec::new()
    };
    let test_subjects: BTreeSet<&str> = vectors
        .iter()
        .zip(folds)
        .filter(|(_, &f)| f == fold)
        .map(|(v, _)| v.subject_id.as_str())
        .collect();
    Ok(FoldResult {
        fold,
        n_train: xtr.len(),
        n_test: xte.len(),
        test_subjects: test_subjects.into_iter().map(String::from).collect(),
        confusion,
        metrics,
        roc,
        importance,
    })
}

fn run_all(
    vectors: &[FeatureVector],
    folds: &[usize],
    k: usize,
    kind: ModelKind,
    model_cfg: &ModelConfig,
    cfg: &EvalConfig,
    seed: u64,
) -> Result<ModelReport, EvalError> {
    let results: Vec<FoldResult> = (0..k)
        .into_par_iter()
        .map(|f| run_fold(vectors, folds, f, kind, model_cfg, cfg, seed))
        .collect::<Result<_, _>>()?;
    Ok(ModelReport {
        kind,
        aggregate: aggregate(&results),
        importance: fold_mean_importance(&results),
        folds: results,
    })
}

/// Subject-grouped k-fold evaluation of one model kind. Folds run in
/// parallel; each fits its own scaler, class weights and model on the
/// training cycles only. Permutation shuffles are seeded from the plan.
pub fn cross_validate(
    vectors: &[FeatureVector],
    plan: &FoldPlan,
    kind: ModelKind,
    model_cfg: &ModelConfig,
    cfg: &EvalConfig,
) -> Result<ModelReport, EvalError> {
    let folds = plan.record_folds(vectors)?;
    for f in 0..plan.k {
        let (train, test) = split_subjects(vectors, &folds, f);
        if let Some(s) = train.intersection(&test).next() {
            return Err(EvalError::Leak(s.to_string()));
        }
    }
    run_all(vectors, &folds, plan.k, kind, model_cfg, cfg, plan.seed)
}

/// Evaluation on per-record folds that ignore subjects. Only meant for
/// demonstrating the optimism of leaky splits.
pub fn cross_validate_record_wise(
    vectors: &[FeatureVector],
    folds: &[usize],
    k: usize,
    kind: ModelKind,
    model_cfg: &ModelConfig,
    cfg: &EvalConfig,
    seed: u64,
) -> Result<ModelReport, EvalError> {
    run_all(vectors, folds, k, kind, model_cfg, cfg, seed)
}
