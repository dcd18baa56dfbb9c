//! Cutting a baseline-corrected segment into single heartbeats and the
//! deterministic acceptance rule applied to each candidate.

use serde::{Deserialize, Serialize};

use super::baseline::BaselineFit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleConfig {
    pub min_s: f64,
    pub max_s: f64,
    /// Allowed |first|, |last| sample as a fraction of the amplitude range.
    pub baseline_tolerance: f64,
    /// Required prominence of the dominant peak, fraction of amplitude range.
    pub peak_prominence_frac: f64,
    /// The dominant peak must sit before this fraction of the cycle.
    pub max_peak_position: f64,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            min_s: 0.4,
            max_s: 1.5,
            baseline_tolerance: 0.01,
            peak_prominence_frac: 0.5,
            max_peak_position: 0.6,
        }
    }
}

/// One heartbeat, valley to valley, on the baseline-corrected signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseCycle {
    pub subject_id: String,
    /// Segment number within the subject (1-based, as in the file name).
    pub segment: usize,
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
    /// Position of the first sample in the parent segment.
    pub onset_index: usize,
    /// Position of the last sample in the parent segment (inclusive).
    pub end_index: usize,
}

impl PulseCycle {
    /// Build a cycle directly from samples, e.g. for synthetic tests.
    pub fn from_samples(subject_id: &str, samples: Vec<f64>, sample_rate_hz: f64) -> Self {
        let end_index = samples.len().saturating_sub(1);
        Self {
            subject_id: subject_id.to_string(),
            segment: 0,
            samples,
            sample_rate_hz,
            onset_index: 0,
            end_index,
        }
    }

    pub fn duration_s(&self) -> f64 {
        (self.end_index - self.onset_index) as f64 / self.sample_rate_hz
    }

    pub fn amplitude_range(&self) -> f64 {
        let (lo, hi) = min_max(&self.samples);
        hi - lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TooShort,
    TooLong,
    NonPositivePeak,
    PeakPosition,
    PeakProminence,
    MultiplePeaks,
    Baseline,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::TooShort => "too_short",
            RejectReason::TooLong => "too_long",
            RejectReason::NonPositivePeak => "non_positive_peak",
            RejectReason::PeakPosition => "peak_position",
            RejectReason::PeakProminence => "peak_prominence",
            RejectReason::MultiplePeaks => "multiple_peaks",
            RejectReason::Baseline => "baseline",
        }
    }
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

pub(crate) fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Index of the maximum, earliest on ties.
pub(crate) fn argmax(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in x.iter().enumerate() {
        if v > x[best] {
            best = i;
        }
    }
    best
}

/// Interior local maxima (plateaus reported at their first index) with
/// their topographic prominence.
pub fn peak_prominences(x: &[f64]) -> Vec<(usize, f64)> {
    let n = x.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if x[i - 1] < x[i] {
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                peaks.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
        .into_iter()
        .map(|p| {
            let v = x[p];
            let mut left_min = v;
            for &s in x[..p].iter().rev() {
                if s > v {
                    break;
                }
                left_min = left_min.min(s);
            }
            let mut right_min = v;
            for &s in &x[p + 1..] {
                if s > v {
                    break;
                }
                right_min = right_min.min(s);
            }
            (p, v - left_min.max(right_min))
        })
        .collect()
}

/// Acceptance rule standing in for visual inspection of each beat.
///
/// Checks, in order: duration bounds, a positive maximum, the maximum lying
/// in the first `max_peak_position` of the cycle, the maximum being the one
/// and only peak with prominence of at least `peak_prominence_frac` of the
/// amplitude range, and both end samples within `baseline_tolerance` of zero.
pub fn validate_cycle(cycle: &PulseCycle, cfg: &CycleConfig) -> Verdict {
    let d = cycle.duration_s();
    // Durations are compared at sample resolution.
    let eps = 0.5 / cycle.sample_rate_hz;
    if d + eps < cfg.min_s || cycle.samples.len() < 3 {
        return Verdict::Reject(RejectReason::TooShort);
    }
    if d - eps > cfg.max_s {
        return Verdict::Reject(RejectReason::TooLong);
    }
    let x = &cycle.samples;
    let peak = argmax(x);
    let range = cycle.amplitude_range();
    if x[peak] <= 0.0 {
        return Verdict::Reject(RejectReason::NonPositivePeak);
    }
    if peak as f64 > cfg.max_peak_position * (x.len() - 1) as f64 {
        return Verdict::Reject(RejectReason::PeakPosition);
    }
    let threshold = cfg.peak_prominence_frac * range;
    let dominant: Vec<usize> = peak_prominences(x)
        .into_iter()
        .filter(|&(_, p)| p >= threshold)
        .map(|(i, _)| i)
        .collect();
    match dominant.as_slice() {
        [] => return Verdict::Reject(RejectReason::PeakProminence),
        [only] if *only == peak => {}
        [only] if x[*only] == x[peak] => {}
        [_] => return Verdict::Reject(RejectReason::PeakProminence),
        _ => return Verdict::Reject(RejectReason::MultiplePeaks),
    }
    let tol = cfg.baseline_tolerance * range;
    if x[0].abs() > tol || x[x.len() - 1].abs() > tol {
        return Verdict::Reject(RejectReason::Baseline);
    }
    Verdict::Accept
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedCycle {
    pub onset_index: usize,
    pub end_index: usize,
    pub reason: RejectReason,
}

/// Accepted heartbeats of one segment plus the candidates that were dropped.
#[derive(Debug, Clone, Default)]
pub struct Segmentation {
    pub accepted: Vec<PulseCycle>,
    pub rejected: Vec<RejectedCycle>,
}

/// Cut the corrected signal at consecutive valleys and keep the candidates
/// that pass [`validate_cycle`]. Data before the first and after the last
/// valley is discarded.
pub fn segment_cycles(
    subject_id: &str,
    segment: usize,
    corrected: &[f64],
    sample_rate_hz: f64,
    fit: &BaselineFit,
    cfg: &CycleConfig,
) -> Segmentation {
    let mut out = Segmentation::default();
    for pair in fit.valley_indices.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let cycle = PulseCycle {
            subject_id: subject_id.to_string(),
            segment,
            samples: corrected[a..=b].to_vec(),
            sample_rate_hz,
            onset_index: a,
            end_index: b,
        };
        match validate_cycle(&cycle, cfg) {
            Verdict::Accept => out.accepted.push(cycle),
            Verdict::Reject(reason) => {
                log::debug!(
                    "subject {subject_id} segment {segment}: dropped cycle {a}..{b}: {reason}"
                );
                out.rejected.push(RejectedCycle {
                    onset_index: a,
                    end_index: b,
                    reason,
                });
            }
        }
    }
    out
}
