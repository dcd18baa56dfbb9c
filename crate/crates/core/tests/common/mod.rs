//! Brute-force oracles shared by the integration tests and the acceptance
//! suite. Each one is written without reference to the library's solvers.
#![allow(dead_code)]

use ppg_diabetes::models::{ClassWeights, Node, Tree};
use rand::Rng;

/// A tiny random classification problem with both classes present.
pub struct Tiny {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<u8>,
}

pub fn tiny_problem(rng: &mut impl Rng, max_samples: usize, max_features: usize, integer: bool) -> Tiny {
    loop {
        let n = rng.random_range(2..=max_samples);
        let d = rng.random_range(1..=max_features);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        if integer {
                            rng.random_range(0..4) as f64
                        } else {
                            rng.random_range(-2.0..2.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let y: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        if y.contains(&0) && y.contains(&1) {
            return Tiny { x, y };
        }
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Weighted standardization computed from scratch; constant columns map to 0.
pub fn standardize(x: &[Vec<f64>], s: &[f64]) -> Vec<Vec<f64>> {
    let d = x[0].len();
    let total: f64 = s.iter().sum();
    let mut out = x.to_vec();
    for j in 0..d {
        let mean = x.iter().zip(s).map(|(r, w)| w * r[j]).sum::<f64>() / total;
        let var = x.iter().zip(s).map(|(r, w)| w * (r[j] - mean).powi(2)).sum::<f64>() / total;
        let constant = x.iter().all(|r| r[j] == x[0][j]);
        for r in out.iter_mut() {
            r[j] = if constant { 0.0 } else { (r[j] - mean) / var.sqrt() };
        }
    }
    out
}

/// `Σ s_i logloss + λ‖w‖₁` on already standardized rows; `theta = [b, w..]`.
pub fn l1_objective(z: &[Vec<f64>], y: &[u8], s: &[f64], lambda: f64, theta: &[f64]) -> f64 {
    let loss: f64 = z
        .iter()
        .zip(y)
        .zip(s)
        .map(|((r, &l), w)| {
            let m = theta[0] + r.iter().zip(&theta[1..]).map(|(a, b)| a * b).sum::<f64>();
            w * (softplus(m) - if l == 1 { m } else { 0.0 })
        })
        .sum();
    loss + lambda * theta[1..].iter().map(|w| w.abs()).sum::<f64>()
}

/// Global minimum of a convex function on a box by a coarse grid and then
/// pattern search over the axes and all diagonals with step halving.
pub fn minimize(f: impl Fn(&[f64]) -> f64, dim: usize, half_width: f64) -> (Vec<f64>, f64) {
    let steps = 40;
    let mut best = vec![0.0; dim];
    let mut best_v = f(&best);
    let mut idx = vec![0usize; dim];
    loop {
        let p: Vec<f64> = idx.iter().map(|&k| -half_width + 2.0 * half_width * k as f64 / steps as f64).collect();
        let v = f(&p);
        if v < best_v {
            best_v = v;
            best = p;
        }
        let mut k = 0;
        while k < dim {
            idx[k] += 1;
            if idx[k] <= steps {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == dim {
            break;
        }
    }
    // All non-zero direction vectors with entries in {-1, 0, 1}.
    let dirs: Vec<Vec<f64>> = (0..3usize.pow(dim as u32))
        .map(|mut c| {
            (0..dim)
                .map(|_| {
                    let v = (c % 3) as f64 - 1.0;
                    c /= 3;
                    v
                })
                .collect::<Vec<f64>>()
        })
        .filter(|d| d.iter().any(|&v| v != 0.0))
        .collect();
    let mut step = 2.0 * half_width / steps as f64;
    while step > 1e-11 {
        let mut moved = false;
        for d in &dirs {
            let p: Vec<f64> = best.iter().zip(d).map(|(a, b)| a + step * b).collect();
            let v = f(&p);
            if v < best_v {
                best_v = v;
                best = p;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (best, best_v)
}

/// Per-sample class weights.
pub fn sample_weights(y: &[u8], w: ClassWeights) -> Vec<f64> {
    y.iter().map(|&l| w.of(l)).collect()
}

/// Expected tree from enumerating every (feature, threshold) candidate at
/// each node and summing gradients directly.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleTree {
    Leaf(f64),
    Split(usize, f64, Box<OracleTree>, Box<OracleTree>),
}

pub fn oracle_tree(x: &[Vec<f64>], g: &[f64], h: &[f64], rows: &[usize], depth: usize, max_depth: usize, lambda: f64) -> OracleTree {
    let sum = |idx: &[usize], v: &[f64]| idx.iter().map(|&i| v[i]).sum::<f64>();
    let (gt, ht) = (sum(rows, g), sum(rows, h));
    let leaf = OracleTree::Leaf(-gt / (ht + lambda));
    if depth >= max_depth || rows.len() < 2 {
        return leaf;
    }
    let obj = |g: f64, h: f64| g * g / (h + lambda);
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..x[0].len() {
        let mut vals: Vec<f64> = rows.iter().map(|&i| x[i][f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let thr = 0.5 * (w[0] + w[1]);
            let l: Vec<usize> = rows.iter().copied().filter(|&i| x[i][f] < thr).collect();
            let r: Vec<usize> = rows.iter().copied().filter(|&i| x[i][f] >= thr).collect();
            let gain = 0.5 * (obj(sum(&l, g), sum(&l, h)) + obj(sum(&r, g), sum(&r, h)) - obj(gt, ht));
            let take = match best {
                None => true,
                Some((_, _, bg)) => gain - bg > 1e-12 * bg.abs().max(1.0),
            };
            if take {
                best = Some((f, thr, gain));
            }
        }
    }
    match best {
        Some((f, thr, gain)) if gain > 0.0 => {
            let l: Vec<usize> = rows.iter().copied().filter(|&i| x[i][f] < thr).collect();
            let r: Vec<usize> = rows.iter().copied().filter(|&i| x[i][f] >= thr).collect();
            OracleTree::Split(
                f,
                thr,
                Box::new(oracle_tree(x, g, h, &l, depth + 1, max_depth, lambda)),
                Box::new(oracle_tree(x, g, h, &r, depth + 1, max_depth, lambda)),
            )
        }
        _ => leaf,
    }
}

/// Structural equality with leaf values compared to 1e-12.
pub fn same_tree(t: &Tree, i: usize, o: &OracleTree) -> bool {
    match (&t.nodes[i], o) {
        (Node::Leaf { value }, OracleTree::Leaf(v)) => (value - v).abs() < 1e-12,
        (
            Node::Split {
                feature,
                threshold,
                left,
                right,
            },
            OracleTree::Split(f, thr, l, r),
        ) => feature == f && threshold == thr && same_tree(t, *left, l) && same_tree(t, *right, r),
        _ => false,
    }
}

/// First-round gradients and curvatures at the class-weighted prior.
pub fn first_round_gh(y: &[u8], s: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let pos: f64 = y.iter().zip(s).filter(|(l, _)| **l == 1).map(|(_, w)| w).sum();
    let total: f64 = s.iter().sum();
    let p = pos / total;
    let g = y.iter().zip(s).map(|(&l, w)| w * (p - f64::from(l))).collect();
    let h = s.iter().map(|w| w * p * (1.0 - p)).collect();
    (g, h)
}

/// AUC as the fraction of (positive, negative) pairs ranked correctly, ties
/// counting one half.
pub fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                num += if si > sj {
                    1.0
                } else if si == sj {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    num / pairs
}

/// Cohort where each subject has its own feature-space fingerprint and the
/// label moves every cycle by `class_shift` on feature 0. Record-wise splits
/// can recognise subjects; grouped splits cannot.
pub fn fingerprint_cohort(
    rng: &mut impl Rng,
    per_class: usize,
    cycles: usize,
    dims: usize,
    class_shift: f64,
) -> Vec<ppg_diabetes::features::FeatureVector> {
    let mut out = Vec::new();
    for s in 0..2 * per_class {
        let label = u8::from(s >= per_class);
        let center: Vec<f64> = (0..dims).map(|_| rng.random_range(-3.0..3.0)).collect();
        for _ in 0..cycles {
            let mut values: Vec<f64> = center.iter().map(|c| c + rng.random_range(-0.1..0.1)).collect();
            values[0] += class_shift * label as f64;
            out.push(ppg_diabetes::features::FeatureVector {
                subject_id: format!("s{s:03}"),
                values,
                label,
                imputed: vec![],
            });
        }
    }
    out
}

/// Valley matches against synthetic ground truth, per cohort.
#[derive(Debug, Default)]
pub struct Tally {
    pub segments: usize,
    pub truth_valleys: usize,
    pub matched: usize,
    pub worst_error_s: f64,
    pub count_mismatches: usize,
}

/// `tolerance` maps a segment's beat period (s) to the valley match window (s).
pub fn tally(spec: &ppg_diabetes::synth::SynthSpec, tolerance: impl Fn(f64) -> f64) -> Tally {
    let data = ppg_diabetes::synth::generate(spec);
    let cfg = ppg_diabetes::dsp::DspConfig::default();
    let mut t = Tally::default();
    let mut truths = data.truth.segments.iter();
    for r in &data.records {
        for (k, seg) in r.segments.iter().enumerate() {
            let truth = truths.next().unwrap();
            assert_eq!(truth.subject_id, r.subject_id);
            assert_eq!(truth.segment, k + 1);
            t.segments += 1;
            let p = ppg_diabetes::dsp::process_segment(&r.subject_id, k + 1, seg, &cfg).unwrap();
            let found = &p.fit.valley_indices;
            // Compared in whole samples so a 5 ms window at 1 kHz is exactly 5.
            let tolerance = (tolerance(60.0 / truth.heart_rate_bpm) * seg.sample_rate).round();
            t.truth_valleys += truth.valley_times_s.len();
            for v in &truth.valley_times_s {
                let v = (v * seg.sample_rate).round();
                let err = found
                    .iter()
                    .map(|&f| (f as f64 - v).abs())
                    .fold(f64::INFINITY, f64::min);
                if err <= tolerance {
                    t.matched += 1;
                    t.worst_error_s = t.worst_error_s.max(err / seg.sample_rate);
                }
            }
            if p.segmentation.accepted.len() != truth.expected_cycles {
                t.count_mismatches += 1;
            }
        }
    }
    t
}

/// Random subject/cycle layout with a random label mix.
pub fn random_cohort(rng: &mut impl Rng) -> Vec<ppg_diabetes::features::FeatureVector> {
    let n = rng.random_range(10..80);
    let mut v = Vec::new();
    for s in 0..n {
        let label = u8::from(s % 2 == 0 || rng.random_bool(0.3));
        for _ in 0..rng.random_range(1..12) {
            v.push(ppg_diabetes::features::FeatureVector {
                subject_id: format!("p{s}"),
                values: vec![rng.random()],
                label,
                imputed: vec![],
            });
        }
    }
    rand::seq::SliceRandom::shuffle(v.as_mut_slice(), rng);
    v
}

