//! Subject records, ingestion of the `subjects.csv` + per-segment signal
//! layout, cohort selection and cohort summaries.
//!
//! The metadata file is a UTF-8 CSV with a header row:
//!
//! ```text
//! subject_id,sex,age,height_cm,weight_kg,heart_rate_bpm,bmi,sbp_mmhg,dbp_mmhg,hypertension_stage,diabetes,cerebrovascular
//! ```
//!
//! Signal files live in a separate directory, one file per segment, named
//! `<subject_id>_<k>.txt` with `k` in `1..=3`, holding one sample per line.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Columns every metadata file must carry.
pub const METADATA_COLUMNS: [&str; 12] = [
    "subject_id",
    "sex",
    "age",
    "height_cm",
    "weight_kg",
    "heart_rate_bpm",
    "bmi",
    "sbp_mmhg",
    "dbp_mmhg",
    "hypertension_stage",
    "diabetes",
    "cerebrovascular",
];

/// Maximum number of segments attached to one subject.
pub const MAX_SEGMENTS: usize = 3;

/// Reason attached to subjects dropped by [`select_cohort`].
pub const COMORBIDITY_FILTER: &str = "comorbidity_filter";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing file: {0}")]
    MissingFile(PathBuf),
    #[error("metadata is missing column `{0}`")]
    SchemaError(String),
    #[error("row {row}, column `{column}`: {message}")]
    ParseError {
        row: usize,
        column: String,
        message: String,
    },
    #[error("duplicate subject id `{0}`")]
    DuplicateSubject(String),
    #[error("invalid segment: {0}")]
    InvalidSegment(String),
    #[error("no records to select from")]
    EmptyInput,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Female,
    Male,
}

impl Sex {
    /// Numeric encoding used in feature vectors: female = 0, male = 1.
    pub fn encode(self) -> f64 {
        match self {
            Sex::Female => 0.0,
            Sex::Male => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypertensionStage {
    Normal,
    Prehypertension,
    Stage1,
    Stage2,
    Unknown,
}

impl HypertensionStage {
    fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "" | "unknown" => Some(Self::Unknown),
            "normal" => Some(Self::Normal),
            "prehtn" | "prehypertension" => Some(Self::Prehypertension),
            "stage1" => Some(Self::Stage1),
            "stage2" => Some(Self::Stage2),
            _ => None,
        }
    }
}

/// One PPG segment as recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
}

impl Segment {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self, DatasetError> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(DatasetError::InvalidSegment(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        if samples.len() < 2 {
            return Err(DatasetError::InvalidSegment(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds, counting one sample period per sample.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }
}

/// One patient: identifier, metadata, diagnosis labels and raw segments.
///
/// Numeric metadata is optional so that blank cells survive ingestion and
/// can be imputed later. Blood pressure is carried for cohort selection and
/// reporting only; it never becomes a model feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub sex: Sex,
    pub age: Option<f64>,
    pub height_cm: Option<f64>,
    pub weight_kg: Option<f64>,
    pub heart_rate_bpm: Option<f64>,
    pub bmi: Option<f64>,
    pub systolic_bp: Option<f64>,
    pub diastolic_bp: Option<f64>,
    pub hypertension_stage: HypertensionStage,
    pub has_diabetes: bool,
    pub has_cerebrovascular_disease: bool,
    #[serde(default)]
    pub segments: Vec<Segment>,
}

impl SubjectRecord {
    /// True when height, weight and BMI are all present and BMI disagrees
    /// with `weight / (height/100)^2` by more than 1 kg/m².
    pub fn bmi_inconsistent(&self) -> bool {
        match (self.height_cm, self.weight_kg, self.bmi) {
            (Some(h), Some(w), Some(b)) if h > 0.0 => {
                let m = h / 100.0;
                (w / (m * m) - b).abs() > 1.0
            }
            _ => false,
        }
    }
}

/// A metadata row that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    /// 1-based data row number (the header is row 0).
    pub row: usize,
    pub column: String,
    pub message: String,
}

/// Result of [`load_dataset`]: the parsed records plus per-row failures.
#[derive(Debug, Clone, Default)]
pub struct LoadedDataset {
    pub records: Vec<SubjectRecord>,
    pub row_errors: Vec<RowError>,
}

/// Load subject metadata and attach signal segments.
///
/// A row whose numeric or enum fields fail to parse produces a [`RowError`]
/// instead of aborting the load. A missing column, an unreadable metadata
/// file, or a signal file that is referenced but absent is fatal. Each
/// subject gets the files `<id>_1.txt`, `<id>_2.txt`, `<id>_3.txt` that
/// exist, in that order; at least the first one must exist.
pub fn load_dataset(
    metadata_path: &Path,
    signals_dir: &Path,
    sample_rate: f64,
) -> Result<LoadedDataset, DatasetError> {
    if !metadata_path.is_file() {
        return Err(DatasetError::MissingFile(metadata_path.to_path_buf()));
    }
    if !signals_dir.is_dir() {
        return Err(DatasetError::MissingFile(signals_dir.to_path_buf()));
    }
    let text = fs::read_to_string(metadata_path).map_err(|source| DatasetError::Io {
        path: metadata_path.to_path_buf(),
        source,
    })?;
    let mut loaded = parse_metadata(&text)?;
    for record in &mut loaded.records {
        record.segments = load_segments(signals_dir, &record.subject_id, sample_rate)?;
    }
    Ok(loaded)
}

/// Parse the metadata CSV without touching signal files.
pub fn parse_metadata(text: &str) -> Result<LoadedDataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let mut index = BTreeMap::new();
    for column in METADATA_COLUMNS {
        let pos = headers
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| DatasetError::SchemaError(column.to_string()))?;
        index.insert(column, pos);
    }

    let mut loaded = LoadedDataset::default();
    let mut seen = HashSet::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row?;
        let field = |name: &str| row.get(index[name]).unwrap_or("");
        match parse_row(row_no, &field) {
            Ok(record) => {
                if !seen.insert(record.subject_id.clone()) {
                    return Err(DatasetError::DuplicateSubject(record.subject_id));
                }
                loaded.records.push(record);
            }
            Err(e) => loaded.row_errors.push(e),
        }
    }
    Ok(loaded)
}

fn parse_row<'a>(row: usize, field: &dyn Fn(&str) -> &'a str) -> Result<SubjectRecord, RowError> {
    let err = |column: &str, message: String| RowError {
        row,
        column: column.to_string(),
        message,
    };
    let number = |column: &str| -> Result<Option<f64>, RowError> {
        let raw = field(column);
        if raw.is_empty() {
            return Ok(None);
        }
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(err(column, format!("not a finite number: `{raw}`"))),
        }
    };
    let flag = |column: &str| -> Result<bool, RowError> {
        match field(column) {
            "0" | "" => Ok(false),
            "1" => Ok(true),
            other => Err(err(column, format!("expected 0 or 1, got `{other}`"))),
        }
    };

    let subject_id = field("subject_id").to_string();
    if subject_id.is_empty() {
        return Err(err("subject_id", "empty subject id".into()));
    }
    let sex = match field("sex") {
        "F" | "f" => Sex::Female,
        "M" | "m" => Sex::Male,
        other => return Err(err("sex", format!("expected F or M, got `{other}`"))),
    };
    let age = number("age")?;
    if let Some(a) = age {
        if a <= 0.0 || a.fract() != 0.0 {
            return Err(err("age", format!("age must be a positive integer, got {a}")));
        }
    }
    let stage_raw = field("hypertension_stage");
    let hypertension_stage = HypertensionStage::parse(stage_raw)
        .ok_or_else(|| err("hypertension_stage", format!("unknown stage `{stage_raw}`")))?;

    Ok(SubjectRecord {
        subject_id,
        sex,
        age,
        height_cm: number("height_cm")?,
        weight_kg: number("weight_kg")?,
        heart_rate_bpm: number("heart_rate_bpm")?,
        bmi: number("bmi")?,
        systolic_bp: number("sbp_mmhg")?,
        diastolic_bp: number("dbp_mmhg")?,
        hypertension_stage,
        has_diabetes: flag("diabetes")?,
        has_cerebrovascular_disease: flag("cerebrovascular")?,
        segments: Vec::new(),
    })
}

fn load_segments(
    dir: &Path,
    subject_id: &str,
    sample_rate: f64,
) -> Result<Vec<Segment>, DatasetError> {
    let mut segments = Vec::new();
    for k in 1..=MAX_SEGMENTS {
        let path = dir.join(format!("{subject_id}_{k}.txt"));
        if !path.is_file() {
            if k == 1 {
                return Err(DatasetError::MissingFile(path));
            }
            continue;
        }
        segments.push(read_signal_file(&path, sample_rate)?);
    }
    Ok(segments)
}

/// Read one signal file. Samples are whitespace separated, so both the
/// one-sample-per-line layout and a single tab-separated line are accepted.
pub fn read_signal_file(path: &Path, sample_rate: f64) -> Result<Segment, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let samples = text
        .split_whitespace()
        .enumerate()
        .map(|(i, tok)| {
            tok.parse::<f64>().map_err(|_| DatasetError::ParseError {
                row: i + 1,
                column: path.display().to_string(),
                message: format!("bad sample `{tok}`"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Segment::new(samples, sample_rate)
}

/// Class label of an included subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    NonDiabetic,
    Diabetic,
}

impl ClassLabel {
    pub fn as_u8(self) -> u8 {
        match self {
            ClassLabel::NonDiabetic => 0,
            ClassLabel::Diabetic => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::NonDiabetic => "non_diabetic",
            ClassLabel::Diabetic => "diabetic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Excluded {
    pub subject_id: String,
    pub reason: String,
}

/// Subjects partitioned into the two study arms plus everyone left out.
#[derive(Debug, Clone, Default)]
pub struct Cohort {
    pub included: Vec<(SubjectRecord, ClassLabel)>,
    pub excluded: Vec<Excluded>,
}

impl Cohort {
    pub fn count(&self, label: ClassLabel) -> usize {
        self.included.iter().filter(|(_, l)| *l == label).count()
    }

    /// Move the listed subjects from `included` to `excluded` with `reason`.
    /// Unknown ids are ignored.
    pub fn exclude_ids(&mut self, ids: &[String], reason: &str) {
        let drop: HashSet<&str> = ids.iter().map(String::as_str).collect();
        let (kept, removed): (Vec<_>, Vec<_>) = std::mem::take(&mut self.included)
            .into_iter()
            .partition(|(r, _)| !drop.contains(r.subject_id.as_str()));
        self.included = kept;
        self.excluded
            .extend(removed.into_iter().map(|(r, _)| Excluded {
                subject_id: r.subject_id,
                reason: reason.to_string(),
            }));
    }
}

/// Split records into the non-diabetic and diabetic arms.
///
/// Non-diabetic subjects must have a normal blood-pressure stage and no
/// cerebrovascular disease. Every diabetic subject is kept regardless of
/// comorbidity. An unknown stage keeps a non-diabetic subject out.
pub fn select_cohort(records: &[SubjectRecord]) -> Result<Cohort, DatasetError> {
    if records.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    let mut cohort = Cohort::default();
    for r in records {
        if r.has_diabetes {
            cohort.included.push((r.clone(), ClassLabel::Diabetic));
        } else if r.hypertension_stage == HypertensionStage::Normal
            && !r.has_cerebrovascular_disease
        {
            cohort.included.push((r.clone(), ClassLabel::NonDiabetic));
        } else {
            cohort.excluded.push(Excluded {
                subject_id: r.subject_id.clone(),
                reason: COMORBIDITY_FILTER.to_string(),
            });
        }
    }
    Ok(cohort)
}

/// Mean and sample standard deviation. `std` is absent below two values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: Option<f64>,
    pub n: usize,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = (n > 1).then(|| {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        });
        Some(Self { mean, std, n })
    }
}

/// One row of a cohort summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub subjects: usize,
    pub male: usize,
    pub cycles: usize,
    pub age: Option<MeanStd>,
    pub height_cm: Option<MeanStd>,
    pub weight_kg: Option<MeanStd>,
    pub heart_rate_bpm: Option<MeanStd>,
    pub bmi: Option<MeanStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub non_diabetic: GroupSummary,
    pub diabetic: GroupSummary,
    pub total: GroupSummary,
}

/// Per-class and total counts plus mean ± sample std of the metadata.
/// Subjects without an entry in `cycles_per_subject` count as zero cycles.
pub fn summarize_cohort(
    cohort: &Cohort,
    cycles_per_subject: &BTreeMap<String, usize>,
) -> CohortSummary {
    let group = |filter: &dyn Fn(ClassLabel) -> bool| {
        let members: Vec<&SubjectRecord> = cohort
            .included
            .iter()
            .filter(|(_, l)| filter(*l))
            .map(|(r, _)| r)
            .collect();
        let stat = |get: fn(&SubjectRecord) -> Option<f64>| {
            let values: Vec<f64> = members.iter().filter_map(|r| get(r)).collect();
            MeanStd::of(&values)
        };
        GroupSummary {
            subjects: members.len(),
            male: members.iter().filter(|r| r.sex == Sex::Male).count(),
            cycles: members
                .iter()
                .map(|r| cycles_per_subject.get(&r.subject_id).copied().unwrap_or(0))
                .sum(),
            age: stat(|r| r.age),
            height_cm: stat(|r| r.height_cm),
            weight_kg: stat(|r| r.weight_kg),
            heart_rate_bpm: stat(|r| r.heart_rate_bpm),
            bmi: stat(|r| r.bmi),
        }
    };
    CohortSummary {
        non_diabetic: group(&|l| l == ClassLabel::NonDiabetic),
        diabetic: group(&|l| l == ClassLabel::Diabetic),
        total: group(&|_| true),
    }
}

impl CohortSummary {
    /// Plain-text table in the layout of a classic "summary of data" table.
    pub fn to_table(&self) -> String {
        fn cell(s: &Option<MeanStd>) -> String {
            match s {
                Some(MeanStd { mean, std: Some(sd), .. }) => format!("{mean:.0} ± {sd:.0}"),
                Some(MeanStd { mean, std: None, .. }) => format!("{mean:.0}"),
                None => "-".to_string(),
            }
        }
        let mut out = format!(
            "{:<14}{:>9}{:>6}{:>8}{:>10}{:>10}{:>10}{:>10}{:>10}\n",
            "Class", "Subjects", "Male", "Cycles", "Age", "Height", "Weight", "HR", "BMI"
        );
        for (name, g) in [
            ("Non-Diabetic", &self.non_diabetic),
            ("Diabetic", &self.diabetic),
            ("Total", &self.total),
        ] {
            out.push_str(&format!(
                "{:<14}{:>9}{:>6}{:>8}{:>10}{:>10}{:>10}{:>10}{:>10}\n",
                name,
                g.subjects,
                g.male,
                g.cycles,
                cell(&g.age),
                cell(&g.height_cm),
                cell(&g.weight_kg),
                cell(&g.heart_rate_bpm),
                cell(&g.bmi)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "subject_id,sex,age,height_cm,weight_kg,heart_rate_bpm,bmi,sbp_mmhg,dbp_mmhg,hypertension_stage,diabetes,cerebrovascular";

    fn record(id: &str) -> SubjectRecord {
        SubjectRecord {
            subject_id: id.to_string(),
            sex: Sex::Female,
            age: Some(50.0),
            height_cm: Some(160.0),
            weight_kg: Some(56.0),
            heart_rate_bpm: Some(72.0),
            bmi: Some(21.9),
            systolic_bp: Some(110.0),
            diastolic_bp: Some(70.0),
            hypertension_stage: HypertensionStage::Normal,
            has_diabetes: false,
            has_cerebrovascular_disease: false,
            segments: Vec::new(),
        }
    }

    #[test]
    fn missing_age_column_is_schema_error() {
        let text = "subject_id,sex,height_cm,weight_kg,heart_rate_bpm,bmi,sbp_mmhg,dbp_mmhg,hypertension_stage,diabetes,cerebrovascular\n1,F,160,56,70,21.9,110,70,normal,0,0\n";
        match parse_metadata(text) {
            Err(DatasetError::SchemaError(c)) => assert_eq!(c, "age"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn bad_number_is_row_error_not_crash() {
        let text = format!(
            "{HEADER}\n1,F,45,160,56,70,21.9,110,70,normal,0,0\n2,M,abc,170,70,80,24.2,120,80,normal,0,0\n"
        );
        let loaded = parse_metadata(&text).unwrap();
        assert_eq!(loaded.records.len(), 1);
        assert_eq!(loaded.row_errors.len(), 1);
        assert_eq!(loaded.row_errors[0].row, 2);
        assert_eq!(loaded.row_errors[0].column, "age");
    }

    #[test]
    fn blank_stage_parses_as_unknown() {
        let text = format!("{HEADER}\n7,M,45,170,70,80,24.2,,,,0,0\n");
        let loaded = parse_metadata(&text).unwrap();
        let r = &loaded.records[0];
        assert_eq!(r.hypertension_stage, HypertensionStage::Unknown);
        assert_eq!(r.systolic_bp, None);
        assert_eq!(r.sex, Sex::Male);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = format!(
            "{HEADER}\n1,F,45,160,56,70,21.9,110,70,normal,0,0\n1,F,45,160,56,70,21.9,110,70,normal,0,0\n"
        );
        assert!(matches!(
            parse_metadata(&text),
            Err(DatasetError::DuplicateSubject(_))
        ));
    }

    #[test]
    fn segment_duration() {
        let seg = Segment::new(vec![0.0; 2100], 1000.0).unwrap();
        assert!((seg.duration_s() - 2.1).abs() < 1e-12);
        assert!(Segment::new(vec![1.0], 1000.0).is_err());
        assert!(Segment::new(vec![1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn cohort_rules() {
        assert!(matches!(select_cohort(&[]), Err(DatasetError::EmptyInput)));

        let healthy = record("a");
        let mut hypertensive = record("b");
        hypertensive.hypertension_stage = HypertensionStage::Stage1;
        let mut diabetic_htn = record("c");
        diabetic_htn.has_diabetes = true;
        diabetic_htn.hypertension_stage = HypertensionStage::Stage2;
        diabetic_htn.has_cerebrovascular_disease = true;
        let mut unknown = record("d");
        unknown.hypertension_stage = HypertensionStage::Unknown;
        let mut stroke = record("e");
        stroke.has_cerebrovascular_disease = true;

        let cohort =
            select_cohort(&[healthy, hypertensive, diabetic_htn, unknown, stroke]).unwrap();
        assert_eq!(cohort.count(ClassLabel::NonDiabetic), 1);
        assert_eq!(cohort.count(ClassLabel::Diabetic), 1);
        let ex: Vec<_> = cohort.excluded.iter().map(|e| e.subject_id.as_str()).collect();
        assert_eq!(ex, ["b", "d", "e"]);
        assert!(cohort.excluded.iter().all(|e| e.reason == COMORBIDITY_FILTER));
    }

    #[test]
    fn explicit_exclusion_moves_subjects() {
        let mut cohort = select_cohort(&[record("a"), record("b")]).unwrap();
        cohort.exclude_ids(&["b".to_string(), "zz".to_string()], "manual");
        assert_eq!(cohort.included.len(), 1);
        assert_eq!(cohort.excluded[0].subject_id, "b");
        assert_eq!(cohort.excluded[0].reason, "manual");
    }

    #[test]
    fn summary_stats() {
        let mut a = record("a");
        a.age = Some(40.0);
        a.sex = Sex::Male;
        let mut b = record("b");
        b.age = Some(60.0);
        let cohort = select_cohort(&[a.clone(), b]).unwrap();
        let cycles = BTreeMap::from([("a".to_string(), 3), ("b".to_string(), 5)]);
        let s = summarize_cohort(&cohort, &cycles);
        let age = s.non_diabetic.age.unwrap();
        assert_eq!(age.mean, 50.0);
        assert!((age.std.unwrap() - 200f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.total.cycles, 8);
        assert_eq!(s.non_diabetic.male, 1);
        assert_eq!(s.diabetic.subjects, 0);
        assert!(s.diabetic.age.is_none());

        let single = select_cohort(&[a]).unwrap();
        let s = summarize_cohort(&single, &BTreeMap::new());
        let age = s.total.age.unwrap();
        assert_eq!(age.mean, 40.0);
        assert!(age.std.is_none());
        assert_eq!(s.total.cycles, 0);
    }

    #[test]
    fn bmi_consistency_check() {
        let mut r = record("a");
        assert!(!r.bmi_inconsistent());
        r.bmi = Some(30.0);
        assert!(r.bmi_inconsistent());
    }
}
