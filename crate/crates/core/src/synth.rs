//! Deterministic synthetic PPG cohorts with ground truth.
//!
//! Each beat is the sum of a systolic and a dicrotic Gaussian whose centers
//! and widths scale with the beat period. Segments add a DC offset, a linear
//! drift and optional white noise. The generator knows the noise-free
//! waveform, so valley and peak times are located by brute force on it and
//! emitted as ground truth.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{HypertensionStage, Segment, Sex, SubjectRecord};

/// Beat shape. Centers and widths are fractions of the beat period,
/// amplitudes are relative to the systolic wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseShape {
    pub systolic_amp: f64,
    pub systolic_center: f64,
    pub systolic_width: f64,
    pub dicrotic_amp: f64,
    pub dicrotic_center: f64,
    pub dicrotic_width: f64,
}

impl Default for PulseShape {
    fn default() -> Self {
        Self {
            systolic_amp: 1.0,
            systolic_center: 0.24,
            systolic_width: 0.075,
            dicrotic_amp: 0.42,
            dicrotic_center: 0.56,
            dicrotic_width: 0.11,
        }
    }
}

impl PulseShape {
    /// Value of one beat at `tau` seconds after its onset.
    pub fn beat(&self, tau: f64, period: f64) -> f64 {
        let g = |amp: f64, center: f64, width: f64| {
            let z = (tau - center * period) / (width * period);
            amp * (-0.5 * z * z).exp()
        };
        g(self.systolic_amp, self.systolic_center, self.systolic_width)
            + g(self.dicrotic_amp, self.dicrotic_center, self.dicrotic_width)
    }
}

/// Everything needed to render one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentParams {
    pub shape: PulseShape,
    pub heart_rate_bpm: f64,
    /// Time of the first beat onset at or after t = 0.
    pub phase_s: f64,
    pub duration_s: f64,
    pub sample_rate: f64,
    pub offset: f64,
    pub gain: f64,
    /// Linear drift in output units per second.
    pub drift_per_s: f64,
    /// Standard deviation of additive white noise in output units.
    pub noise_std: f64,
}

impl SegmentParams {
    pub fn period(&self) -> f64 {
        60.0 / self.heart_rate_bpm
    }

    pub fn len(&self) -> usize {
        (self.duration_s * self.sample_rate).round() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Noise-free value at sample index `i` (may lie outside the segment).
    pub fn clean_at(&self, i: i64) -> f64 {
        let t = i as f64 / self.sample_rate;
        let period = self.period();
        let k_now = ((t - self.phase_s) / period).floor() as i64;
        let pulses: f64 = (k_now - 2..=k_now + 1)
            .map(|k| self.shape.beat(t - (self.phase_s + k as f64 * period), period))
            .sum();
        self.offset + self.gain * pulses + self.drift_per_s * t
    }
}

/// A rendered segment with its ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticSegment {
    pub samples: Vec<f64>,
    pub clean: Vec<f64>,
    pub valley_indices: Vec<usize>,
    pub peak_indices: Vec<usize>,
}

impl SyntheticSegment {
    pub fn valley_times(&self, sample_rate: f64) -> Vec<f64> {
        self.valley_indices.iter().map(|&i| i as f64 / sample_rate).collect()
    }
}

/// Render a segment. Valleys are the brute-force minima of the noise-free
/// waveform within ±30% of a period around each nominal onset, kept when
/// they fall inside the segment; peaks are the maxima between consecutive
/// valleys.
pub fn synthesize_segment(p: &SegmentParams, rng: &mut impl Rng) -> SyntheticSegment {
    let n = p.len();
    let clean: Vec<f64> = (0..n as i64).map(|i| p.clean_at(i)).collect();
    let samples = if p.noise_std > 0.0 {
        let noise = Normal::new(0.0, p.noise_std).expect("finite noise std");
        clean.iter().map(|v| v + noise.sample(rng)).collect()
    } else {
        clean.clone()
    };

    let period = p.period();
    let reach = (0.3 * period * p.sample_rate).round() as i64;
    let mut valley_indices = Vec::new();
    let mut k = -1i64;
    loop {
        let onset = p.phase_s + k as f64 * period;
        if onset > p.duration_s + period {
            break;
        }
        let centre = (onset * p.sample_rate).round() as i64;
        let best = (centre - reach..=centre + reach)
            .min_by(|&a, &b| p.clean_at(a).total_cmp(&p.clean_at(b)))
            .expect("non-empty search window");
        if best >= 0 && (best as usize) < n {
            valley_indices.push(best as usize);
        }
        k += 1;
    }
    let peak_indices = valley_indices
        .windows(2)
        .map(|w| w[0] + crate::dsp::argmax(&clean[w[0]..=w[1]]))
        .collect();
    SyntheticSegment {
        samples,
        clean,
        valley_indices,
        peak_indices,
    }
}

/// Cohort-level generator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSpec {
    pub n_non_diabetic: usize,
    pub n_diabetic: usize,
    /// Extra non-diabetic subjects with hypertension, removed by cohort
    /// selection.
    pub n_comorbid: usize,
    pub heart_rate_bpm: (f64, f64),
    pub segments_per_subject: usize,
    pub segment_s: f64,
    pub sample_rate: f64,
    pub shape: PulseShape,
    /// Relative standard deviation of per-subject shape parameters.
    pub subject_jitter: f64,
    /// Strength of the diabetic shape change: weaker dicrotic wave and a
    /// wider systolic wave. Zero makes the classes indistinguishable by shape.
    pub class_effect: f64,
    /// Noise standard deviation as a fraction of the pulse amplitude.
    pub noise_level: f64,
    /// Largest |drift| as a fraction of the pulse amplitude per second.
    pub drift_max: f64,
    pub offset: f64,
    pub gain: f64,
    /// No beat onset is placed closer than this to a segment edge.
    pub edge_guard_s: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_non_diabetic: 10,
            n_diabetic: 10,
            n_comorbid: 0,
            heart_rate_bpm: (58.0, 95.0),
            segments_per_subject: 3,
            segment_s: 2.1,
            sample_rate: 1000.0,
            shape: PulseShape::default(),
            subject_jitter: 0.08,
            class_effect: 1.0,
            noise_level: 0.0,
            drift_max: 0.05,
            offset: 2000.0,
            gain: 400.0,
            edge_guard_s: 0.2,
            seed: 7,
        }
    }
}

/// Ground truth for one generated segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentTruth {
    pub subject_id: String,
    pub segment: usize,
    pub heart_rate_bpm: f64,
    pub phase_s: f64,
    pub drift_per_s: f64,
    pub shape: PulseShape,
    pub valley_times_s: Vec<f64>,
    pub peak_times_s: Vec<f64>,
    pub expected_cycles: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthTruth {
    pub spec: SynthSpec,
    pub segments: Vec<SegmentTruth>,
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub records: Vec<SubjectRecord>,
    pub truth: SynthTruth,
}

fn jittered(rng: &mut ChaCha8Rng, value: f64, rel: f64) -> f64 {
    if rel <= 0.0 {
        return value;
    }
    let n = Normal::new(0.0, rel).expect("finite jitter");
    value * (1.0 + n.sample(rng)).clamp(0.5, 1.5)
}

fn clamp_normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    let n = Normal::new(mean, sd).expect("finite normal");
    n.sample(rng).clamp(lo, hi)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Arm {
    Healthy,
    Diabetic,
    Comorbid,
}

/// Generate a cohort. Identical specs give identical datasets.
pub fn generate(spec: &SynthSpec) -> SynthDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let arms = std::iter::repeat_n(Arm::Healthy, spec.n_non_diabetic)
        .chain(std::iter::repeat_n(Arm::Diabetic, spec.n_diabetic))
        .chain(std::iter::repeat_n(Arm::Comorbid, spec.n_comorbid));

    let mut records = Vec::new();
    let mut truths = Vec::new();
    for (idx, arm) in arms.enumerate() {
        let subject_id = format!("{}", idx + 1);
        let diabetic = arm == Arm::Diabetic;

        let (age_mean, weight_mean) = if diabetic { (59.0, 62.0) } else { (45.0, 56.0) };
        let sex = if rng.random_bool(0.42) { Sex::Male } else { Sex::Female };
        let age = clamp_normal(&mut rng, age_mean, 13.0, 21.0, 86.0).round();
        let height = clamp_normal(&mut rng, 161.0, 8.0, 140.0, 190.0).round();
        let weight = clamp_normal(&mut rng, weight_mean, 11.0, 38.0, 110.0).round();
        let bmi = (weight / (height / 100.0).powi(2) * 10.0).round() / 10.0;
        let (lo, hi) = spec.heart_rate_bpm;
        let hr = if hi > lo { rng.random_range(lo..hi) } else { lo };
        let stage = match arm {
            Arm::Healthy => HypertensionStage::Normal,
            Arm::Comorbid => HypertensionStage::Stage1,
            Arm::Diabetic => [
                HypertensionStage::Normal,
                HypertensionStage::Prehypertension,
                HypertensionStage::Stage1,
                HypertensionStage::Stage2,
            ][rng.random_range(0..4)],
        };
        let sbp = match stage {
            HypertensionStage::Normal => clamp_normal(&mut rng, 112.0, 6.0, 95.0, 119.0),
            HypertensionStage::Prehypertension => clamp_normal(&mut rng, 130.0, 4.0, 120.0, 139.0),
            HypertensionStage::Stage1 => clamp_normal(&mut rng, 148.0, 4.0, 140.0, 159.0),
            _ => clamp_normal(&mut rng, 168.0, 6.0, 160.0, 190.0),
        }
        .round();
        let dbp = (sbp * 0.62).round();

        let mut shape = spec.shape;
        if diabetic {
            shape.dicrotic_amp *= 1.0 - 0.45 * spec.class_effect;
            shape.systolic_width *= 1.0 + 0.2 * spec.class_effect;
        }
        let j = spec.subject_jitter;
        shape.systolic_width = jittered(&mut rng, shape.systolic_width, j);
        shape.dicrotic_amp = jittered(&mut rng, shape.dicrotic_amp, j);
        shape.dicrotic_center = jittered(&mut rng, shape.dicrotic_center, j / 3.0);
        shape.dicrotic_width = jittered(&mut rng, shape.dicrotic_width, j);
        let gain = jittered(&mut rng, spec.gain, 0.2);

        let mut segments = Vec::new();
        for seg_no in 1..=spec.segments_per_subject {
            // Re-draw the rate when no onset layout clears the edges.
            let (seg_hr, phase) = loop {
                let seg_hr = jittered(&mut rng, hr, 0.02);
                if let Some(phase) =
                    draw_phase(&mut rng, 60.0 / seg_hr, spec.segment_s, spec.edge_guard_s)
                {
                    break (seg_hr, phase);
                }
            };
            let drift = rng.random_range(-1.0..=1.0) * spec.drift_max * gain;
            let params = SegmentParams {
                shape,
                heart_rate_bpm: seg_hr,
                phase_s: phase,
                duration_s: spec.segment_s,
                sample_rate: spec.sample_rate,
                offset: spec.offset,
                gain,
                drift_per_s: drift,
                noise_std: spec.noise_level * gain * shape.systolic_amp,
            };
            let rendered = synthesize_segment(&params, &mut rng);
            truths.push(SegmentTruth {
                subject_id: subject_id.clone(),
                segment: seg_no,
                heart_rate_bpm: seg_hr,
                phase_s: phase,
                drift_per_s: drift,
                shape,
                valley_times_s: rendered.valley_times(spec.sample_rate),
                peak_times_s: rendered
                    .peak_indices
                    .iter()
                    .map(|&i| i as f64 / spec.sample_rate)
                    .collect(),
                expected_cycles: rendered.valley_indices.len().saturating_sub(1),
            });
            // Six decimals round-trip through the text files exactly while
            // staying well below the flat diastolic foot's curvature.
            let samples = rendered.samples.iter().map(|v| (v * 1e6).round() / 1e6).collect();
            segments.push(Segment {
                samples,
                sample_rate: spec.sample_rate,
            });
        }

        records.push(SubjectRecord {
            subject_id,
            sex,
            age: Some(age),
            height_cm: Some(height),
            weight_kg: Some(weight),
            heart_rate_bpm: Some(hr.round()),
            bmi: Some(bmi),
            systolic_bp: Some(sbp),
            diastolic_bp: Some(dbp),
            hypertension_stage: stage,
            has_diabetes: diabetic,
            has_cerebrovascular_disease: false,
            segments,
        });
    }
    SynthDataset {
        records,
        truth: SynthTruth {
            spec: spec.clone(),
            segments: truths,
        },
    }
}

/// Onset phase in `[0, period)` keeping every onset of the infinite train,
/// including those just outside the record, at least `guard` away from both
/// edges. `None` when no such phase exists for this period.
fn draw_phase(rng: &mut ChaCha8Rng, period: f64, duration: f64, guard: f64) -> Option<f64> {
    let circular = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(period);
        d.min(period - d)
    };
    let end = duration.rem_euclid(period);
    let ok = |phase: f64| circular(phase, 0.0) >= guard && circular(phase, end) >= guard;
    // Forbidden arcs cover at most 4 * guard of the circle; a feasible arc,
    // if any, is found with overwhelming probability well within this budget.
    (0..4096)
        .map(|_| rng.random_range(0.0..period))
        .find(|&p| ok(p))
}

fn stage_code(stage: HypertensionStage) -> &'static str {
    match stage {
        HypertensionStage::Normal => "normal",
        HypertensionStage::Prehypertension => "prehtn",
        HypertensionStage::Stage1 => "stage1",
        HypertensionStage::Stage2 => "stage2",
        HypertensionStage::Unknown => "",
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// Render records as `subjects.csv` text.
pub fn metadata_csv(records: &[SubjectRecord]) -> String {
    let mut out = crate::dataset::METADATA_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        let sex = match r.sex {
            Sex::Female => "F",
            Sex::Male => "M",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.subject_id,
            sex,
            opt(r.age),
            opt(r.height_cm),
            opt(r.weight_kg),
            opt(r.heart_rate_bpm),
            opt(r.bmi),
            opt(r.systolic_bp),
            opt(r.diastolic_bp),
            stage_code(r.hypertension_stage),
            u8::from(r.has_diabetes),
            u8::from(r.has_cerebrovascular_disease),
        ));
    }
    out
}

/// Write `subjects.csv`, `signals/<id>_<k>.txt` and `truth.json` under
/// `out_dir`.
pub fn write_dataset(data: &SynthDataset, out_dir: &Path) -> std::io::Result<()> {
    let signals = out_dir.join("signals");
    fs::create_dir_all(&signals)?;
    fs::write(out_dir.join("subjects.csv"), metadata_csv(&data.records))?;
    for r in &data.records {
        for (k, seg) in r.segments.iter().enumerate() {
            let mut text = String::with_capacity(seg.samples.len() * 10);
            for v in &seg.samples {
                text.push_str(&format!("{v}\n"));
            }
            fs::write(signals.join(format!("{}_{}.txt", r.subject_id, k + 1)), text)?;
        }
    }
    let truth = serde_json::to_string_pretty(&data.truth).map_err(std::io::Error::other)?;
    fs::write(out_dir.join("truth.json"), truth + "\n")
}

/// Raised cosine `1 - cos(2 pi t / period)`, handy for quick checks.
pub fn raised_cosine(duration_s: f64, period_s: f64, sample_rate: f64) -> Vec<f64> {
    let n = (duration_s * sample_rate).round() as usize;
    (0..n)
        .map(|i| 1.0 - (2.0 * PI * i as f64 / sample_rate / period_s).cos())
        .collect()
}

/// A single beat sampled from onset to the next onset, inclusive, with the
/// end points pulled to zero by subtracting the chord between them.
pub fn single_beat(shape: &PulseShape, period_s: f64, sample_rate: f64) -> Vec<f64> {
    let n = (period_s * sample_rate).round() as usize;
    let raw: Vec<f64> = (0..=n)
        .map(|i| {
            let t = i as f64 / sample_rate;
            shape.beat(t, period_s) + shape.beat(t + period_s, period_s)
                + shape.beat(t - period_s, period_s)
        })
        .collect();
    let (a, b) = (raw[0], raw[n]);
    raw.iter()
        .enumerate()
        .map(|(i, v)| v - (a + (b - a) * i as f64 / n as f64))
        .collect()
}
