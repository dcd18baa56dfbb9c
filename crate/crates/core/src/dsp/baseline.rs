//! Sliding-window valley detection and piecewise-linear baseline fitting.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::DspError;

/// A boundary sample is a valley only when the parabola through the three
/// samples nearest the edge bottoms out no further than this many samples
/// beyond it.
const EDGE_VERTEX_REACH: f64 = 1.0;

/// A minimum followed by less than this much record is not credited with
/// the ridge before it; upstream filtering bends the last few tens of
/// milliseconds.
const MIN_EDGE_CLIMB_S: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FswConfig {
    /// Width of the centered search window, seconds.
    pub window_s: f64,
    /// Valleys closer than this are merged, keeping the deeper one.
    pub min_cycle_s: f64,
    /// Minimum depth of a valley below its lower surrounding ridge, as a
    /// fraction of the series' amplitude range. Rejects dicrotic notches.
    pub min_prominence: f64,
}

impl Default for FswConfig {
    fn default() -> Self {
        Self {
            window_s: 0.5,
            min_cycle_s: 0.4,
            min_prominence: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineFit {
    pub valley_indices: Vec<usize>,
    pub baseline: Vec<f64>,
}

impl BaselineFit {
    pub fn subtract_from(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.baseline).map(|(v, b)| v - b).collect()
    }
}

/// Indices whose sample is the minimum of the centered window
/// `[i - half, i + half]` (clipped to the series), earliest index winning
/// ties.
fn window_minima(x: &[f64], half: usize) -> Vec<usize> {
    let n = x.len();
    let mut out = Vec::new();
    let mut deque: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            while deque.back().is_some_and(|&b| x[b] > x[next]) {
                deque.pop_back();
            }
            deque.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(half);
        while deque.front().is_some_and(|&f| f < lo) {
            deque.pop_front();
        }
        if deque.front() == Some(&i) {
            out.push(i);
        }
    }
    out
}

/// Height of the rise that follows the minimum at `i`: the highest sample
/// reached before the series drops below `x[i]` again. A beat onset is
/// followed by the systolic upstroke; a dicrotic notch only by the much
/// smaller diastolic wave.
///
/// When the record ends while still climbing, the rise is unknown. The
/// candidate then keeps the depth of the ridge before it, provided it climbs
/// out at least half as fast as it came down over the same span of at least
/// `min_climb` samples. An onset does; a notch, sitting at the foot of the
/// systolic downstroke, does not.
fn valley_prominence(x: &[f64], i: usize, min_climb: usize) -> f64 {
    let v = x[i];
    let n = x.len();
    let mut ridge = v;
    let mut climbing = true;
    for &s in &x[i + 1..] {
        if s < v {
            return ridge - v;
        }
        climbing = s >= ridge;
        ridge = ridge.max(s);
    }
    let span = n - 1 - i;
    if !climbing || span == 0 || span < min_climb {
        return ridge - v;
    }
    let rise = x[n - 1] - v;
    let drop = x[i.saturating_sub(span)] - v;
    if rise < 0.5 * drop {
        return ridge - v;
    }
    let before = x[..i]
        .iter()
        .rev()
        .take_while(|&&s| s >= v)
        .fold(v, |r, &s| r.max(s));
    ridge.max(before) - v
}

/// Offset, in samples measured outward from the edge, of the vertex of the
/// parabola through `a` (the edge sample), `b` and `c`. `None` when the
/// parabola does not open upward.
fn edge_vertex_reach(a: f64, b: f64, c: f64) -> Option<f64> {
    let curvature = (c - 2.0 * b + a) / 2.0;
    if curvature <= 0.0 {
        return None;
    }
    let slope = (b - a) - curvature;
    Some(slope / (2.0 * curvature))
}

/// Locate inter-beat valleys and fit a baseline through them.
///
/// A sample is a valley when it is the strict minimum of the centered window
/// of width `window_s` and its prominence reaches `min_prominence` of the
/// amplitude range. The first and last samples qualify only when the local
/// parabola puts the true minimum within one sample of the edge, so a series
/// cut on a slope does not start or end on a valley. Valleys closer than
/// `min_cycle_s` are merged keeping the lower one. The baseline interpolates
/// linearly between valleys and holds the edge valley values outside them.
pub fn fsw_baseline(x: &[f64], sample_rate: f64, cfg: &FswConfig) -> Result<BaselineFit, DspError> {
    if !(cfg.window_s > 0.0) || !(cfg.min_cycle_s >= 0.0) {
        return Err(DspError::InvalidWindow(cfg.window_s));
    }
    let n = x.len();
    let width = (cfg.window_s * sample_rate).round() as usize;
    if width == 0 || n <= width || n < 3 {
        return Err(DspError::InvalidWindow(cfg.window_s));
    }
    let half = width / 2;
    let (lo, hi) = super::min_max(x);
    let range = hi - lo;
    if range == 0.0 {
        return Err(DspError::NoValleys);
    }

    let min_climb = (MIN_EDGE_CLIMB_S * sample_rate).round() as usize;
    let strict_in_window = |i: usize| {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        (lo..=hi).all(|j| j == i || x[j] > x[i])
    };
    let candidates = window_minima(x, half).into_iter().filter(|&i| {
        let edge_ok = if i == 0 {
            strict_in_window(0)
                && edge_vertex_reach(x[0], x[1], x[2]).is_some_and(|r| r <= EDGE_VERTEX_REACH)
        } else if i == n - 1 {
            strict_in_window(i)
                && edge_vertex_reach(x[n - 1], x[n - 2], x[n - 3])
                    .is_some_and(|r| r <= EDGE_VERTEX_REACH)
        } else {
            true
        };
        edge_ok && valley_prominence(x, i, min_climb) >= cfg.min_prominence * range
    });

    let min_gap = (cfg.min_cycle_s * sample_rate).round() as usize;
    let mut valleys: Vec<usize> = Vec::new();
    for i in candidates {
        match valleys.last_mut() {
            Some(last) if i - *last < min_gap => {
                if x[i] < x[*last] {
                    *last = i;
                }
            }
            _ => valleys.push(i),
        }
    }
    if valleys.is_empty() {
        return Err(DspError::NoValleys);
    }

    let baseline = interpolate_through(x, &valleys);
    Ok(BaselineFit {
        valley_indices: valleys,
        baseline,
    })
}

fn interpolate_through(x: &[f64], knots: &[usize]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    let first = knots[0];
    let last = *knots.last().unwrap();
    out[..=first].fill(x[first]);
    out[last..].fill(x[last]);
    for pair in knots.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (ya, yb) = (x[a], x[b]);
        let span = (b - a) as f64;
        for (k, slot) in out[a..=b].iter_mut().enumerate() {
            let t = k as f64 / span;
            *slot = ya + (yb - ya) * t;
        }
    }
    out
}
