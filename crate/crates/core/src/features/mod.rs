//! Fiducial points, the 104-entry PPG feature catalog and the 110-slot
//! feature vector.

mod catalog;
mod compute;
mod fiducials;
mod vector;

pub use catalog::{catalog_markdown, Dimension, FeatureCatalog, FeatureDef, Formula, Point, Signal, Stat};
pub use compute::{compute_features, extract_features};
pub use fiducials::{detect_fiducials, Fiducial, FiducialSet};
pub use vector::{
    assemble_vector, FeatureVector, Imputer, METADATA_FEATURES, PPG_FEATURE_COUNT, VECTOR_LEN,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("series too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("cycle has no peak (all samples equal)")]
    NoPeak,
    #[error("degenerate cycle: {0}")]
    DegenerateCycle(String),
    #[error("subject {subject_id}: missing {field} and imputation is disabled")]
    MissingMetadata { subject_id: String, field: &'static str },
    #[error("expected {expected} PPG features, got {got}")]
    WrongLength { expected: usize, got: usize },
}

/// First derivative by central differences, one-sided at both ends.
pub fn derivative(samples: &[f64], sample_rate: f64) -> Result<Vec<f64>, FeatureError> {
    let n = samples.len();
    if n < 3 {
        return Err(FeatureError::TooShort { needed: 3, got: n });
    }
    let mut d = Vec::with_capacity(n);
    d.push((samples[1] - samples[0]) * sample_rate);
    d.extend(samples.windows(3).map(|w| (w[2] - w[0]) * sample_rate / 2.0));
    d.push((samples[n - 1] - samples[n - 2]) * sample_rate);
    Ok(d)
}

/// Population mean, standard deviation, skewness and excess kurtosis.
/// Skewness and kurtosis are 0 for a constant series.
pub(crate) fn moments(x: &[f64]) -> [f64; 4] {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    if m2 == 0.0 {
        return [mean, 0.0, 0.0, 0.0];
    }
    [mean, m2.sqrt(), m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0]
}
