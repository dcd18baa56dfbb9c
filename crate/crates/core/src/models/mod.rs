//! Class-weighted L1 logistic regression and second-order gradient-boosted
//! trees for binary labels (1 = diabetic).

mod gbt;
mod logreg;

pub use gbt::{predict_gbt, train_gbt, GbtConfig, GbtModel, Node, Tree};
pub use logreg::{predict_logreg, train_logreg, LogRegConfig, LogRegModel, Scaler};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bumped whenever the serialized model layout changes.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("class {0} has no samples")]
    EmptyClass(u8),
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("non-finite input at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("expected {expected} features, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("label {0} is not 0 or 1")]
    BadLabel(u8),
    #[error("no training samples")]
    Empty,
    #[error("unsupported model format version {0}")]
    Version(u32),
    #[error("model json: {0}")]
    Json(String),
}

/// Per-class loss multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub w0: f64,
    pub w1: f64,
}

impl ClassWeights {
    pub const UNIT: ClassWeights = ClassWeights { w0: 1.0, w1: 1.0 };

    pub fn of(&self, label: u8) -> f64 {
        if label == 1 {
            self.w1
        } else {
            self.w0
        }
    }

    /// Balanced weights from the label counts of `y`.
    pub fn balanced_for(y: &[u8]) -> Result<Self, ModelError> {
        let n1 = y.iter().filter(|&&l| l == 1).count();
        balanced_weights(y.len() - n1, n1)
    }
}

/// `w_c = N / (2 N_c)`.
pub fn balanced_weights(n0: usize, n1: usize) -> Result<ClassWeights, ModelError> {
    if n0 == 0 {
        return Err(ModelError::EmptyClass(0));
    }
    if n1 == 0 {
        return Err(ModelError::EmptyClass(1));
    }
    let n = (n0 + n1) as f64;
    Ok(ClassWeights {
        w0: n / (2.0 * n0 as f64),
        w1: n / (2.0 * n1 as f64),
    })
}

/// Shared preconditions of both trainers; returns the feature count.
fn check_training(x: &[Vec<f64>], y: &[u8]) -> Result<usize, ModelError> {
    if x.is_empty() {
        return Err(ModelError::Empty);
    }
    if x.len() != y.len() {
        return Err(ModelError::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let d = x[0].len();
    for (row, r) in x.iter().enumerate() {
        if r.len() != d {
            return Err(ModelError::LengthMismatch {
                expected: d,
                got: r.len(),
            });
        }
        if let Some(col) = r.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite { row, col });
        }
    }
    if let Some(&l) = y.iter().find(|&&l| l > 1) {
        return Err(ModelError::BadLabel(l));
    }
    if y.iter().all(|&l| l == y[0]) {
        return Err(ModelError::SingleClass);
    }
    Ok(d)
}

fn check_input(x: &[f64], expected: usize) -> Result<(), ModelError> {
    if x.len() != expected {
        return Err(ModelError::LengthMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Logistic loss of margin `z` for label `y`, stable for large |z|.
pub(crate) fn logloss(z: f64, y: u8) -> f64 {
    let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
    softplus - if y == 1 { z } else { 0.0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logreg,
    Gbt,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Logreg, ModelKind::Gbt];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Logreg => "logreg",
            ModelKind::Gbt => "gbt",
        }
    }
}

/// Hyperparameters of both model kinds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub logreg: LogRegConfig,
    pub gbt: GbtConfig,
}

/// A trained classifier of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Logreg(LogRegModel),
    Gbt(GbtModel),
}

impl Model {
    /// Train `kind` with class weights balanced on `y`.
    pub fn train(kind: ModelKind, x: &[Vec<f64>], y: &[u8], config: &ModelConfig) -> Result<Model, ModelError> {
        let weights = ClassWeights::balanced_for(y)?;
        Ok(match kind {
            ModelKind::Logreg => Model::Logreg(train_logreg(x, y, weights, &config.logreg)?),
            ModelKind::Gbt => Model::Gbt(train_gbt(x, y, weights, &config.gbt)?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Logreg(_) => ModelKind::Logreg,
            Model::Gbt(_) => ModelKind::Gbt,
        }
    }

    /// Probability of class 1.
    pub fn predict(&self, x: &[f64]) -> Result<f64, ModelError> {
        match self {
            Model::Logreg(m) => predict_logreg(m, x),
            Model::Gbt(m) => predict_gbt(m, x),
        }
    }

    pub fn predict_many(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn to_json(&self) -> String {
        let saved = SavedModel {
            version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&saved).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Model, ModelError> {
        let saved: SavedModel = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        if saved.version != MODEL_FORMAT_VERSION {
            return Err(ModelError::Version(saved.version));
        }
        Ok(saved.model)
    }
}

#[derive(Serialize, Deserialize)]
struct SavedModel {
    version: u32,
    model: Model,
}
