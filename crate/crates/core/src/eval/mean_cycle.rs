use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::dsp::PulseCycle;

pub const GRID_POINTS: usize = 1000;
/// Grid index the peaks are aligned to.
pub const GRID_CENTER: usize = GRID_POINTS / 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMean {
    pub class: String,
    pub n_cycles: usize,
    /// Mean normalized amplitude per grid point; `None` where no cycle
    /// reaches that far from its peak.
    pub values: Vec<Option<f64>>,
}

/// Per-class mean waveforms on a shared grid, time 0 at the peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCycleReport {
    /// Grid spacing in seconds; point `k` sits at `(k − GRID_CENTER) · dt`.
    pub dt_s: f64,
    pub classes: Vec<ClassMean>,
}

impl MeanCycleReport {
    pub fn time_of(&self, k: usize) -> f64 {
        (k as f64 - GRID_CENTER as f64) * self.dt_s
    }
}

fn normalized(c: &PulseCycle) -> (Vec<f64>, usize) {
    let x = &c.samples;
    let (mut lo, mut hi, mut peak) = (f64::INFINITY, f64::NEG_INFINITY, 0);
    for (i, &v) in x.iter().enumerate() {
        lo = lo.min(v);
        if v > hi {
            hi = v;
            peak = i;
        }
    }
    let range = hi - lo;
    let y = x.iter().map(|v| if range > 0.0 { (v - lo) / range } else { 0.0 }).collect();
    (y, peak)
}

/// Linear interpolation of `y` (sampled at `fs`) at `t` seconds after
/// sample `peak`; `None` outside the cycle.
fn sample_at(y: &[f64], peak: usize, fs: f64, t: f64) -> Option<f64> {
    let pos = peak as f64 + t * fs;
    if pos < 0.0 || pos > (y.len() - 1) as f64 {
        return None;
    }
    let i = pos.floor() as usize;
    if i + 1 >= y.len() {
        return Some(y[i]);
    }
    let frac = pos - i as f64;
    Some(if frac == 0.0 { y[i] } else { y[i] + frac * (y[i + 1] - y[i]) })
}

/// Min-max normalize every cycle, shift it so its peak sits at the grid
/// centre, and average each class point by point.
///
/// The grid spans twice the longest peak-to-edge distance of any cycle.
pub fn mean_cycle_report(groups: &[(String, Vec<PulseCycle>)]) -> Result<MeanCycleReport, EvalError> {
    if groups.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut prepared = Vec::with_capacity(groups.len());
    let mut reach: f64 = 0.0;
    for (name, cycles) in groups {
        if cycles.is_empty() {
            return Err(EvalError::EmptyClass(name.clone()));
        }
        let norm: Vec<(Vec<f64>, usize, f64)> = cycles
            .iter()
            .map(|c| {
                let (y, p) = normalized(c);
                let fs = c.sample_rate_hz;
                reach = reach.max(p as f64 / fs).max((y.len() - 1 - p) as f64 / fs);
                (y, p, fs)
            })
            .collect();
        prepared.push((name.clone(), norm));
    }
    let dt_s = 2.0 * reach / GRID_POINTS as f64;
    let classes = prepared
        .into_iter()
        .map(|(class, norm)| {
            let values = (0..GRID_POINTS)
                .map(|k| {
                    let t = (k as f64 - GRID_CENTER as f64) * dt_s;
                    let hits: Vec<f64> = norm.iter().filter_map(|(y, p, fs)| sample_at(y, *p, *fs, t)).collect();
                    (!hits.is_empty()).then(|| hits.iter().sum::<f64>() / hits.len() as f64)
                })
                .collect();
            ClassMean {
                class,
                n_cycles: norm.len(),
                values,
            }
        })
        .collect();
    Ok(MeanCycleReport { dt_s, classes })
}
