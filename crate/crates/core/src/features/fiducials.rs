use serde::{Deserialize, Serialize};

use super::{derivative, FeatureError};
use crate::dsp::{argmax, PulseCycle};

/// A landmark on one of the three signals.
///
/// `t` is refined to sub-sample precision by a parabola through the extremum
/// and its neighbours; `v` is the sample value at `index`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fiducial {
    pub index: usize,
    pub t: f64,
    pub v: f64,
}

/// Landmarks of one cycle. Times are seconds from the cycle start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiducialSet {
    pub sample_rate_hz: f64,
    pub onset: Fiducial,
    pub peak: Fiducial,
    pub end: Fiducial,
    /// First local maximum of d1 before the peak.
    pub d1_max: Fiducial,
    /// Steepest descent: minimum of d1 from the peak on.
    pub d1_min: Fiducial,
    /// d2 maximum up to `d1_max`.
    pub d2_a: Fiducial,
    /// d2 minimum between `d2_a` and `d1_min`.
    pub d2_b: Fiducial,
    /// d2 maximum after `d1_min`, within the first three quarters.
    pub d2_e: Fiducial,
    pub d2_max: Fiducial,
    pub d2_min: Fiducial,
    pub notch: Option<Fiducial>,
    /// The local maximum that follows the notch.
    pub diastolic_peak: Option<Fiducial>,
}

impl FiducialSet {
    pub fn duration_s(&self) -> f64 {
        self.end.t
    }
}

/// Sub-sample position of an extremum at `i` from the parabola through
/// `y[i-1..=i+1]`, in seconds.
pub(crate) fn refine(y: &[f64], i: usize, sample_rate: f64) -> f64 {
    if i == 0 || i + 1 >= y.len() {
        return i as f64 / sample_rate;
    }
    let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
    let curvature = a - 2.0 * b + c;
    let shift = if curvature == 0.0 {
        0.0
    } else {
        (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
    };
    (i as f64 + shift) / sample_rate
}

fn argmin(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in x.iter().enumerate() {
        if v < x[best] {
            best = i;
        }
    }
    best
}

/// Centre of the first plateau-aware local extremum of `y` in `from..to`
/// whose neighbours on both sides are strictly lower (`max`) or higher.
fn first_extremum(y: &[f64], from: usize, to: usize, max: bool) -> Option<usize> {
    let beats = |a: f64, b: f64| if max { a > b } else { a < b };
    let to = to.min(y.len());
    let mut i = from.max(1);
    while i < to {
        if !beats(y[i], y[i - 1]) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < y.len() && y[j + 1] == y[i] {
            j += 1;
        }
        if j + 1 < y.len() && beats(y[i], y[j + 1]) && (i + j) / 2 < to {
            return Some((i + j) / 2);
        }
        i = j + 1;
    }
    None
}

fn at(y: &[f64], i: usize, fs: f64) -> Fiducial {
    Fiducial {
        index: i,
        t: refine(y, i, fs),
        v: y[i],
    }
}

/// Locate the cycle, d1 and d2 landmarks.
///
/// The peak is the global maximum (earliest on ties). The notch is the first
/// local minimum after the peak that is followed by a local maximum; without
/// one the notch and diastolic peak are absent.
pub fn detect_fiducials(cycle: &PulseCycle) -> Result<FiducialSet, FeatureError> {
    let x = &cycle.samples;
    let fs = cycle.sample_rate_hz;
    let n = x.len();
    let d1 = derivative(x, fs)?;
    let d2 = derivative(&d1, fs)?;
    if x.iter().all(|&v| v == x[0]) {
        return Err(FeatureError::NoPeak);
    }

    let p = argmax(x);
    let d1_max = first_extremum(&d1, 1, p, true)
        .or_else(|| (p > 1).then(|| 1 + argmax(&d1[1..p])))
        .unwrap_or(0);
    let d1_min = p + argmin(&d1[p..]);

    let a = argmax(&d2[..=d1_max]);
    let b = a + argmin(&d2[a..=d1_min.max(a)]);
    let e_hi = ((3 * (n - 1)) / 4).max(d1_min + 1).min(n - 1);
    let e = if d1_min + 1 <= e_hi {
        d1_min + 1 + argmax(&d2[d1_min + 1..=e_hi])
    } else {
        n - 1
    };

    let notch = first_extremum(x, p + 1, n - 1, false);
    let diastolic = notch.and_then(|m| first_extremum(x, m + 1, n - 1, true));
    let (notch, diastolic) = match (notch, diastolic) {
        (Some(m), Some(d)) => (Some(at(x, m, fs)), Some(at(x, d, fs))),
        _ => (None, None),
    };

    Ok(FiducialSet {
        sample_rate_hz: fs,
        onset: Fiducial { index: 0, t: 0.0, v: x[0] },
        peak: at(x, p, fs),
        end: Fiducial {
            index: n - 1,
            t: (n - 1) as f64 / fs,
            v: x[n - 1],
        },
        d1_max: at(&d1, d1_max, fs),
        d1_min: at(&d1, d1_min, fs),
        d2_a: at(&d2, a, fs),
        d2_b: at(&d2, b, fs),
        d2_e: at(&d2, e, fs),
        d2_max: at(&d2, argmax(&d2), fs),
        d2_min: at(&d2, argmin(&d2), fs),
        notch,
        diastolic_peak: diastolic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> PulseCycle {
        let x = (0..=800)
            .map(|i| if i <= 200 { i as f64 / 200.0 } else { (800 - i) as f64 / 600.0 })
            .collect();
        PulseCycle::from_samples("t", x, 1000.0)
    }

    #[test]
    fn triangle_fiducials() {
        let f = detect_fiducials(&triangle()).unwrap();
        assert_eq!(f.peak.index, 200);
        assert_eq!(f.peak.v, 1.0);
        assert_eq!(f.end.t, 0.8);
        assert!(f.notch.is_none());
        assert!(f.d1_max.index < f.peak.index);
        assert!(f.d1_min.index > f.peak.index);
    }

    #[test]
    fn flat_cycle_has_no_peak() {
        let c = PulseCycle::from_samples("f", vec![0.5; 100], 1000.0);
        assert_eq!(detect_fiducials(&c), Err(FeatureError::NoPeak));
    }

    #[test]
    fn plateau_extremum_is_centred() {
        let y = [0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0, 1.0];
        assert_eq!(first_extremum(&y, 1, 8, true), Some(3));
        assert_eq!(first_extremum(&y, 1, 8, false), Some(6));
        // A plateau running into the end is not an extremum.
        assert_eq!(first_extremum(&[0.0, 1.0, 1.0], 1, 3, true), None);
    }

    #[test]
    fn refine_recovers_parabola_vertex() {
        let fs = 100.0;
        let y: Vec<f64> = (0..10).map(|i| -(i as f64 - 4.3).powi(2)).collect();
        assert!((refine(&y, 4, fs) - 0.043).abs() < 1e-12);
        assert_eq!(refine(&y, 0, fs), 0.0);
    }
}
