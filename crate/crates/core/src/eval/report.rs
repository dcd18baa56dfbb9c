use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cv::ModelReport;
use super::folds::FoldPlan;
use super::mean_cycle::MeanCycleReport;
use super::EvalError;
use crate::dataset::CohortSummary;
use crate::features::FeatureVector;

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Everything a run produced. Figures are regenerated from this alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub format_version: u32,
    /// Configuration snapshot of the run.
    pub config: serde_json::Value,
    /// SHA-256 over the evaluated feature vectors.
    pub dataset_fingerprint: String,
    pub n_cycles: usize,
    pub n_subjects: usize,
    /// Folds stratified by subject label.
    pub stratified_folds: bool,
    pub threshold: f64,
    pub plan: FoldPlan,
    pub feature_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cohort: Option<CohortSummary>,
    pub models: Vec<ModelReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_cycles: Option<MeanCycleReport>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        let r: EvaluationReport = serde_json::from_str(text).map_err(|e| EvalError::Report(e.to_string()))?;
        if r.format_version != REPORT_FORMAT_VERSION {
            return Err(EvalError::Report(format!("unsupported format version {}", r.format_version)));
        }
        Ok(r)
    }

    /// SHA-256 of the pretty JSON.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

/// Content hash of ids, labels and the exact bits of every value.
pub fn fingerprint(vectors: &[FeatureVector]) -> String {
    let mut h = Sha256::new();
    for v in vectors {
        h.update((v.subject_id.len() as u64).to_le_bytes());
        h.update(v.subject_id.as_bytes());
        h.update([v.label]);
        h.update((v.values.len() as u64).to_le_bytes());
        for x in &v.values {
            h.update(x.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}
