//! Low-pass filtering, sliding-window baseline removal and segmentation of
//! PPG segments into validated single heartbeats.

mod baseline;
mod cycles;
mod filter;

pub use baseline::{fsw_baseline, BaselineFit, FswConfig};
pub use cycles::{
    peak_prominences, segment_cycles, validate_cycle, CycleConfig, PulseCycle, RejectReason,
    RejectedCycle, Segmentation, Verdict,
};
pub(crate) use cycles::{argmax, min_max};
pub use filter::{design_lowpass, filter_samples, Biquad, FilterCoefficients, FilterMode, FilterSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Segment;

#[derive(Debug, Error)]
pub enum DspError {
    #[error("invalid filter specification: {0}")]
    InvalidSpec(String),
    #[error("series too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("invalid baseline window of {0} s for this series")]
    InvalidWindow(f64),
    #[error("no valleys found")]
    NoValleys,
}

/// Low-pass settings; the sample rate comes from each segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LowpassConfig {
    pub order: usize,
    pub cutoff_hz: f64,
    pub mode: FilterMode,
}

impl Default for LowpassConfig {
    fn default() -> Self {
        Self {
            order: 6,
            cutoff_hz: 16.0,
            mode: FilterMode::ZeroPhase,
        }
    }
}

impl LowpassConfig {
    pub fn spec(&self, sample_rate_hz: f64) -> FilterSpec {
        FilterSpec {
            order: self.order,
            cutoff_hz: self.cutoff_hz,
            sample_rate_hz,
            mode: self.mode,
        }
    }
}

/// Everything the per-segment chain needs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DspConfig {
    pub filter: LowpassConfig,
    pub fsw: FswConfig,
    pub cycle: CycleConfig,
}

/// Filter one segment with `spec`, keeping its length and sample rate.
pub fn filter_segment(segment: &Segment, spec: &FilterSpec) -> Result<Segment, DspError> {
    let coefficients = design_lowpass(spec)?;
    let samples = filter_samples(&segment.samples, &coefficients, spec)?;
    Ok(Segment {
        samples,
        sample_rate: segment.sample_rate,
    })
}

/// Output of [`process_segment`].
#[derive(Debug, Clone)]
pub struct ProcessedSegment {
    pub filtered: Vec<f64>,
    pub corrected: Vec<f64>,
    pub fit: BaselineFit,
    pub segmentation: Segmentation,
}

/// Filter, remove the baseline and cut one segment into accepted cycles.
pub fn process_segment(
    subject_id: &str,
    segment_no: usize,
    segment: &Segment,
    cfg: &DspConfig,
) -> Result<ProcessedSegment, DspError> {
    let spec = cfg.filter.spec(segment.sample_rate);
    let filtered = filter_segment(segment, &spec)?.samples;
    let fit = fsw_baseline(&filtered, segment.sample_rate, &cfg.fsw)?;
    let corrected = fit.subtract_from(&filtered);
    let segmentation = segment_cycles(
        subject_id,
        segment_no,
        &corrected,
        segment.sample_rate,
        &fit,
        &cfg.cycle,
    );
    Ok(ProcessedSegment {
        filtered,
        corrected,
        fit,
        segmentation,
    })
}
