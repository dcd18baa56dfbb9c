//! End-to-end orchestration: cohort selection, per-segment signal chain,
//! feature vectors, grouped cross-validation of both models and the report.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{select_cohort, summarize_cohort, ClassLabel, Cohort, CohortSummary, DatasetError, SubjectRecord};
use crate::dsp::{process_segment, CycleConfig, DspConfig, FswConfig, LowpassConfig, PulseCycle};
use crate::eval::{
    cross_validate, fingerprint, grouped_stratified_kfold, mean_cycle_report, EvalConfig, EvalError, EvaluationReport,
    REPORT_FORMAT_VERSION,
};
use crate::features::{assemble_vector, extract_features, FeatureCatalog, FeatureVector, Imputer, METADATA_FEATURES};
use crate::models::{ModelConfig, ModelKind};

pub const EXIT_OK: i32 = 0;
/// Bad input: missing or malformed files, invalid configuration.
pub const EXIT_INPUT: i32 = 2;
/// Too little data for the requested evaluation.
pub const EXIT_INSUFFICIENT: i32 = 3;
/// Anything else: solver failure, unwritable output.
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("no accepted cycles in the cohort")]
    NoCycles,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Dataset(_) => EXIT_INPUT,
            PipelineError::NoCycles => EXIT_INSUFFICIENT,
            PipelineError::Eval(e) => match e {
                EvalError::TooFewSubjects { .. }
                | EvalError::BadK(_)
                | EvalError::SingleClass
                | EvalError::EmptyClass(_)
                | EvalError::EmptyFold(_)
                | EvalError::EmptyInput => EXIT_INSUFFICIENT,
                _ => EXIT_INTERNAL,
            },
            PipelineError::Io { .. } => EXIT_INTERNAL,
        }
    }

    /// Short machine-readable name of the failure.
    pub fn kind(&self) -> &'static str {
        match self {
            PipelineError::Config(_) => "Config",
            PipelineError::Dataset(DatasetError::MissingFile(_)) => "MissingFile",
            PipelineError::Dataset(DatasetError::SchemaError(_)) => "SchemaError",
            PipelineError::Dataset(DatasetError::ParseError { .. }) => "ParseError",
            PipelineError::Dataset(_) => "Dataset",
            PipelineError::Eval(EvalError::TooFewSubjects { .. }) => "TooFewSubjects",
            PipelineError::Eval(_) => "Eval",
            PipelineError::NoCycles => "NoCycles",
            PipelineError::Io { .. } => "Io",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// `subjects.csv`.
    pub metadata: Option<PathBuf>,
    /// Directory of `<id>_<k>.txt` signal files.
    pub signals: Option<PathBuf>,
    pub sample_rate: f64,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            metadata: None,
            signals: None,
            sample_rate: 1000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Fill missing numeric metadata with cohort medians instead of failing.
    pub impute_missing: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { impute_missing: true }
    }
}

/// Every tunable of a run. Serialized into the report as a snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Subjects removed after cohort selection.
    pub exclude_ids: Vec<String>,
    pub paths: Paths,
    pub filter: LowpassConfig,
    pub fsw: FswConfig,
    pub cycle: CycleConfig,
    pub features: FeatureConfig,
    pub model: ModelConfig,
    pub eval: EvalConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            exclude_ids: Vec::new(),
            paths: Paths::default(),
            filter: LowpassConfig::default(),
            fsw: FswConfig::default(),
            cycle: CycleConfig::default(),
            features: FeatureConfig::default(),
            model: ModelConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn dsp(&self) -> DspConfig {
        DspConfig {
            filter: self.filter,
            fsw: self.fsw,
            cycle: self.cycle,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessingStats {
    pub segments: usize,
    /// Segments where filtering or valley detection failed.
    pub segments_failed: usize,
    pub cycles_rejected: usize,
    /// Accepted cycles dropped because a feature was undefined.
    pub cycles_degenerate: usize,
    pub cycles_used: usize,
}

/// Features of every usable cycle of the selected cohort.
#[derive(Debug, Clone)]
pub struct CohortFeatures {
    pub cohort: Cohort,
    pub vectors: Vec<FeatureVector>,
    /// The cycles behind `vectors`, in the same order.
    pub cycles: Vec<PulseCycle>,
    pub cycles_per_subject: BTreeMap<String, usize>,
    pub stats: ProcessingStats,
}

impl CohortFeatures {
    pub fn summary(&self) -> CohortSummary {
        summarize_cohort(&self.cohort, &self.cycles_per_subject)
    }
}

/// Column names of a 110-slot vector.
pub fn feature_names() -> Vec<String> {
    let catalog = FeatureCatalog::standard();
    catalog
        .names()
        .chain(METADATA_FEATURES.iter().copied())
        .map(String::from)
        .collect()
}

struct SubjectOutput {
    vectors: Vec<FeatureVector>,
    cycles: Vec<PulseCycle>,
    stats: ProcessingStats,
}

fn process_subject(
    record: &SubjectRecord,
    catalog: &FeatureCatalog,
    imputer: Option<&Imputer>,
    cfg: &DspConfig,
) -> Result<SubjectOutput, PipelineError> {
    let mut out = SubjectOutput {
        vectors: Vec::new(),
        cycles: Vec::new(),
        stats: ProcessingStats::default(),
    };
    for (k, segment) in record.segments.iter().enumerate() {
        out.stats.segments += 1;
        let processed = match process_segment(&record.subject_id, k + 1, segment, cfg) {
            Ok(p) => p,
            Err(e) => {
                log::info!("subject {} segment {}: {e}", record.subject_id, k + 1);
                out.stats.segments_failed += 1;
                continue;
            }
        };
        out.stats.cycles_rejected += processed.segmentation.rejected.len();
        for cycle in processed.segmentation.accepted {
            let ppg = match extract_features(&cycle, catalog) {
                Ok(v) => v,
                Err(e) => {
                    log::info!("subject {} segment {}: cycle dropped: {e}", record.subject_id, k + 1);
                    out.stats.cycles_degenerate += 1;
                    continue;
                }
            };
            let vector = assemble_vector(record, &ppg, imputer).map_err(|e| PipelineError::Config(e.to_string()))?;
            out.stats.cycles_used += 1;
            out.vectors.push(vector);
            out.cycles.push(cycle);
        }
    }
    Ok(out)
}

/// Select the cohort, drop `exclude_ids`, and turn every accepted cycle into
/// a feature vector. Subjects are processed in parallel; output order
/// follows the input records.
pub fn extract_cohort(records: &[SubjectRecord], cfg: &PipelineConfig) -> Result<CohortFeatures, PipelineError> {
    let mut cohort = select_cohort(records)?;
    cohort.exclude_ids(&cfg.exclude_ids, "excluded_by_config");
    let members: Vec<&SubjectRecord> = cohort.included.iter().map(|(r, _)| r).collect();
    let imputer = cfg.features.impute_missing.then(|| Imputer::fit(members.iter().copied()));
    let catalog = FeatureCatalog::standard();
    let dsp = cfg.dsp();
    let outputs: Vec<SubjectOutput> = members
        .par_iter()
        .map(|r| process_subject(r, &catalog, imputer.as_ref(), &dsp))
        .collect::<Result<_, _>>()?;

    let mut features = CohortFeatures {
        cohort: Cohort::default(),
        vectors: Vec::new(),
        cycles: Vec::new(),
        cycles_per_subject: BTreeMap::new(),
        stats: ProcessingStats::default(),
    };
    for (r, o) in members.iter().zip(outputs) {
        features.cycles_per_subject.insert(r.subject_id.clone(), o.vectors.len());
        let s = &mut features.stats;
        s.segments += o.stats.segments;
        s.segments_failed += o.stats.segments_failed;
        s.cycles_rejected += o.stats.cycles_rejected;
        s.cycles_degenerate += o.stats.cycles_degenerate;
        s.cycles_used += o.stats.cycles_used;
        features.vectors.extend(o.vectors);
        features.cycles.extend(o.cycles);
    }
    features.cohort = cohort;
    Ok(features)
}

/// Cross-validate both model kinds on one shared subject-level fold plan
/// and assemble the report.
pub fn evaluate(features: &CohortFeatures, cfg: &PipelineConfig) -> Result<EvaluationReport, PipelineError> {
    if features.vectors.is_empty() {
        return Err(PipelineError::NoCycles);
    }
    let plan = grouped_stratified_kfold(&features.vectors, cfg.eval.k, cfg.seed)?;
    let models = ModelKind::ALL
        .iter()
        .map(|&kind| cross_validate(&features.vectors, &plan, kind, &cfg.model, &cfg.eval))
        .collect::<Result<Vec<_>, _>>()?;

    let mut groups: Vec<(String, Vec<PulseCycle>)> = Vec::new();
    for label in [ClassLabel::NonDiabetic, ClassLabel::Diabetic] {
        let cycles: Vec<PulseCycle> = features
            .vectors
            .iter()
            .zip(&features.cycles)
            .filter(|(v, _)| v.label == label.as_u8())
            .map(|(_, c)| c.clone())
            .collect();
        groups.push((label.name().to_string(), cycles));
    }
    let mean_cycles = mean_cycle_report(&groups).ok();

    let n_subjects = features.cycles_per_subject.values().filter(|&&n| n > 0).count();
    Ok(EvaluationReport {
        format_version: REPORT_FORMAT_VERSION,
        config: serde_json::to_value(cfg).expect("config serializes"),
        dataset_fingerprint: fingerprint(&features.vectors),
        n_cycles: features.vectors.len(),
        n_subjects,
        stratified_folds: true,
        threshold: cfg.eval.threshold,
        plan,
        feature_names: feature_names(),
        cohort: Some(features.summary()),
        models,
        mean_cycles,
    })
}

pub fn run(records: &[SubjectRecord], cfg: &PipelineConfig) -> Result<(CohortFeatures, EvaluationReport), PipelineError> {
    let features = extract_cohort(records, cfg)?;
    let report = evaluate(&features, cfg)?;
    Ok((features, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        let ok: PipelineConfig = toml::from_str("seed = 3\n[model.gbt]\nrounds = 5\n").unwrap();
        assert_eq!(ok.seed, 3);
        assert_eq!(ok.model.gbt.rounds, 5);
        assert_eq!(ok.model.gbt.max_depth, 30);
        assert!(toml::from_str::<PipelineConfig>("[model.gbt]\nroundz = 5\n").is_err());
        assert!(toml::from_str::<PipelineConfig>("colour = 1\n").is_err());
    }

    #[test]
    fn config_round_trips() {
        let mut cfg = PipelineConfig::default();
        cfg.exclude_ids = vec!["12".into()];
        cfg.paths.metadata = Some("a/subjects.csv".into());
        cfg.fsw.window_s = 0.45;
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(toml::from_str::<PipelineConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn vector_columns() {
        let names = feature_names();
        assert_eq!(names.len(), 110);
        assert_eq!(names[104], "sex");
        assert_eq!(names[109], "bmi");
    }
}
