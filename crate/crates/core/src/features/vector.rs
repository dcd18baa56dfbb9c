use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::dataset::SubjectRecord;

pub const PPG_FEATURE_COUNT: usize = 104;
pub const METADATA_FEATURES: [&str; 6] = ["sex", "age", "height", "weight", "heart_rate", "bmi"];
pub const VECTOR_LEN: usize = PPG_FEATURE_COUNT + METADATA_FEATURES.len();

/// One cycle's model input: 104 PPG features then the six metadata slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub subject_id: String,
    pub values: Vec<f64>,
    /// 1 = diabetic.
    pub label: u8,
    /// Metadata slots filled by the imputer.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub imputed: Vec<String>,
}

/// Medians of the numeric metadata over a reference set of subjects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputer {
    /// Age, height, weight, heart rate, BMI; `None` if no subject had one.
    pub medians: [Option<f64>; 5],
}

fn numeric_metadata(r: &SubjectRecord) -> [Option<f64>; 5] {
    [r.age, r.height_cm, r.weight_kg, r.heart_rate_bpm, r.bmi]
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

impl Imputer {
    pub fn fit<'a>(records: impl IntoIterator<Item = &'a SubjectRecord>) -> Self {
        let mut columns: [Vec<f64>; 5] = Default::default();
        for r in records {
            for (col, v) in columns.iter_mut().zip(numeric_metadata(r)) {
                col.extend(v.filter(|v| v.is_finite()));
            }
        }
        Imputer {
            medians: columns.map(median),
        }
    }
}

/// Append the subject's metadata to its PPG features.
///
/// Blood pressure is never included. A missing numeric field is replaced
/// by the imputer's median and recorded in `imputed`; without an imputer it
/// is an error.
pub fn assemble_vector(
    subject: &SubjectRecord,
    ppg_features: &[f64],
    imputer: Option<&Imputer>,
) -> Result<FeatureVector, FeatureError> {
    if ppg_features.len() != PPG_FEATURE_COUNT {
        return Err(FeatureError::WrongLength {
            expected: PPG_FEATURE_COUNT,
            got: ppg_features.len(),
        });
    }
    let mut values = Vec::with_capacity(VECTOR_LEN);
    values.extend_from_slice(ppg_features);
    values.push(subject.sex.encode());
    let mut imputed = Vec::new();
    for (k, v) in numeric_metadata(subject).into_iter().enumerate() {
        let field = METADATA_FEATURES[k + 1];
        let v = match (v, imputer.and_then(|imp| imp.medians[k])) {
            (Some(v), _) => v,
            (None, Some(m)) => {
                log::info!("subject {}: imputed {field} = {m}", subject.subject_id);
                imputed.push(field.to_string());
                m
            }
            (None, None) => {
                return Err(FeatureError::MissingMetadata {
                    subject_id: subject.subject_id.clone(),
                    field,
                })
            }
        };
        values.push(v);
    }
    Ok(FeatureVector {
        subject_id: subject.subject_id.clone(),
        values,
        label: u8::from(subject.has_diabetes),
        imputed,
    })
}
