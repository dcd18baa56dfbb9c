use serde::{Deserialize, Serialize};

use super::{check_input, check_training, sigmoid, ClassWeights, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogRegConfig {
    /// L1 strength on the standardized weights.
    pub lambda: f64,
    /// Stop when no coordinate moves by more than this in a sweep.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            tol: 1e-6,
            max_sweeps: 1000,
        }
    }
}

/// Per-feature standardization fitted on training rows, weighted by the
/// per-sample loss weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    /// Population standard deviation; 1 for constant features.
    pub std: Vec<f64>,
    /// Features that were constant in training. Their weights stay 0.
    pub constant: Vec<bool>,
}

impl Scaler {
    pub fn fit(x: &[Vec<f64>]) -> Scaler {
        Scaler::fit_weighted(x, &vec![1.0; x.len()])
    }

    /// Statistics with row `i` counted `s[i]` times, so a weight of 2 and a
    /// duplicated row give the same scaler.
    pub fn fit_weighted(x: &[Vec<f64>], s: &[f64]) -> Scaler {
        let n: f64 = s.iter().sum();
        let d = x.first().map_or(0, Vec::len);
        let mut mean = vec![0.0; d];
        for (r, si) in x.iter().zip(s) {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += si * v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for (r, si) in x.iter().zip(s) {
            for j in 0..d {
                var[j] += si * (r[j] - mean[j]).powi(2);
            }
        }
        let constant: Vec<bool> = (0..d).map(|j| x.iter().all(|r| r[j] == x[0][j])).collect();
        let std = var
            .iter()
            .zip(&constant)
            .map(|(v, &c)| if c { 1.0 } else { (v / n).sqrt() })
            .collect();
        Scaler { mean, std, constant }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    /// Weights on standardized features.
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub scaler: Scaler,
    pub lambda: f64,
    pub sweeps: usize,
    pub converged: bool,
}

impl LogRegModel {
    pub fn margin(&self, x: &[f64]) -> Result<f64, ModelError> {
        check_input(x, self.weights.len())?;
        let z = self.scaler.transform(x);
        Ok(self.intercept + z.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>())
    }

    pub fn l1_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }
}

pub fn predict_logreg(model: &LogRegModel, x: &[f64]) -> Result<f64, ModelError> {
    Ok(sigmoid(model.margin(x)?))
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// `λ(|w + s| − |w|)`, exact when the sign does not change. Forming
/// `|w + s|` first would round away steps far below the ulp of `w`.
fn penalty_change(w: f64, s: f64, lambda: f64) -> f64 {
    if w != 0.0 && (w + s).signum() == w.signum() {
        lambda * w.signum() * s
    } else {
        lambda * ((w + s).abs() - w.abs())
    }
}

struct Problem<'a> {
    /// Column-major standardized features.
    cols: Vec<Vec<f64>>,
    y: &'a [u8],
    s: Vec<f64>,
    margin: Vec<f64>,
}

impl Problem<'_> {
    /// Weighted gradient and curvature of the loss along `col` (`None` for
    /// the intercept).
    fn grad_hess(&self, col: Option<usize>) -> (f64, f64) {
        let (mut g, mut h) = (0.0, 0.0);
        for i in 0..self.y.len() {
            let z = col.map_or(1.0, |j| self.cols[j][i]);
            let p = sigmoid(self.margin[i]);
            g += self.s[i] * (p - f64::from(self.y[i])) * z;
            h += self.s[i] * p * (1.0 - p) * z * z;
        }
        (g, h)
    }

    /// Change in weighted loss when the margins move by `step` along `col`.
    /// Uses `ℓ(m + δ) − ℓ(m) = ln(1 + σ(m)(e^δ − 1)) − yδ` so that tiny
    /// decreases near the optimum are not lost to cancellation.
    fn loss_change(&self, col: Option<usize>, step: f64) -> f64 {
        (0..self.y.len())
            .map(|i| {
                let delta = step * col.map_or(1.0, |j| self.cols[j][i]);
                let p = sigmoid(self.margin[i]);
                self.s[i] * ((p * delta.exp_m1()).ln_1p() - f64::from(self.y[i]) * delta)
            })
            .sum()
    }

    /// Proximal Newton step on one coordinate with Armijo backtracking.
    /// Returns the accepted change.
    fn update(&mut self, col: Option<usize>, w: f64, lambda: f64) -> f64 {
        let (g, h) = self.grad_hess(col);
        let h = h.max(1e-12);
        let target = match col {
            Some(_) => soft_threshold(h * w - g, lambda) / h,
            None => w - g / h,
        };
        let d = target - w;
        if d == 0.0 {
            return 0.0;
        }
        let lambda = if col.is_some() { lambda } else { 0.0 };
        let decrease = g * d + penalty_change(w, d, lambda);
        let mut t = 1.0;
        for _ in 0..60 {
            let change = self.loss_change(col, t * d) + penalty_change(w, t * d, lambda);
            if change <= 0.01 * t * decrease {
                let step = t * d;
                for i in 0..self.y.len() {
                    self.margin[i] += step * col.map_or(1.0, |j| self.cols[j][i]);
                }
                return step;
            }
            t *= 0.5;
        }
        0.0
    }
}

/// Minimize `Σ s_i · logloss_i + λ‖w‖₁` over standardized features by
/// cyclic coordinate descent; the intercept is unpenalized.
pub fn train_logreg(
    x: &[Vec<f64>],
    y: &[u8],
    weights: ClassWeights,
    config: &LogRegConfig,
) -> Result<LogRegModel, ModelError> {
    let d = check_training(x, y)?;
    let s: Vec<f64> = y.iter().map(|&l| weights.of(l)).collect();
    let scaler = Scaler::fit_weighted(x, &s);
    let rows: Vec<Vec<f64>> = x.iter().map(|r| scaler.transform(r)).collect();
    let mut p = Problem {
        cols: (0..d).map(|j| rows.iter().map(|r| r[j]).collect()).collect(),
        y,
        s,
        margin: vec![0.0; y.len()],
    };
    let lambda = config.lambda.max(0.0);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < config.max_sweeps {
        sweeps += 1;
        let step = p.update(None, b, 0.0);
        b += step;
        let mut biggest = step.abs();
        for j in 0..d {
            if scaler.constant[j] {
                continue;
            }
            let step = p.update(Some(j), w[j], lambda);
            w[j] += step;
            biggest = biggest.max(step.abs());
        }
        if biggest < config.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("logistic regression stopped after {sweeps} sweeps without converging");
    }
    Ok(LogRegModel {
        weights: w,
        intercept: b,
        scaler,
        lambda,
        sweeps,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points() -> (Vec<Vec<f64>>, Vec<u8>) {
        (vec![vec![-1.0], vec![1.0]], vec![0, 1])
    }

    #[test]
    fn strong_penalty_kills_the_weight() {
        let (x, y) = two_points();
        let cfg = LogRegConfig { lambda: 100.0, ..Default::default() };
        let m = train_logreg(&x, &y, ClassWeights::UNIT, &cfg).unwrap();
        assert_eq!(m.weights, vec![0.0]);
        for v in [-1.0, 0.0, 1.0] {
            assert!((predict_logreg(&m, &[v]).unwrap() - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn weak_penalty_separates() {
        let (x, y) = two_points();
        let cfg = LogRegConfig { lambda: 0.01, ..Default::default() };
        let m = train_logreg(&x, &y, ClassWeights::UNIT, &cfg).unwrap();
        assert!(m.converged);
        assert!(predict_logreg(&m, &[1.0]).unwrap() > 0.9);
        assert!(predict_logreg(&m, &[-1.0]).unwrap() < 0.1);
        // Stationarity: 2σ(-w) = λ, so w = ln(2/λ - 1).
        assert!((m.weights[0] - (2.0f64 / 0.01 - 1.0).ln()).abs() < 1e-5);
    }

    #[test]
    fn fixed_intercept_predictions() {
        let model = |b: f64| LogRegModel {
            weights: vec![0.0],
            intercept: b,
            scaler: Scaler { mean: vec![0.0], std: vec![1.0], constant: vec![false] },
            lambda: 0.0,
            sweeps: 0,
            converged: true,
        };
        assert_eq!(predict_logreg(&model(0.0), &[3.0]).unwrap(), 0.5);
        assert!((predict_logreg(&model(3f64.ln()), &[3.0]).unwrap() - 0.75).abs() < 1e-15);
        assert!(matches!(
            predict_logreg(&model(0.0), &[1.0, 2.0]),
            Err(ModelError::LengthMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn constant_feature_gets_unit_std_and_zero_weight() {
        let x = vec![vec![5.0, -1.0], vec![5.0, 0.0], vec![5.0, 1.0], vec![5.0, 2.0]];
        let m = train_logreg(&x, &[0, 0, 1, 1], ClassWeights::UNIT, &LogRegConfig { lambda: 0.1, ..Default::default() }).unwrap();
        assert_eq!(m.scaler.std[0], 1.0);
        assert_eq!(m.weights[0], 0.0);
        assert!(m.weights[1] > 0.0);
    }

    #[test]
    fn weight_two_equals_duplicated_rows() {
        let x = vec![vec![0.3, 1.0], vec![-0.2, 0.5], vec![1.1, -0.4], vec![0.7, 0.2], vec![-0.9, 0.8]];
        let y = vec![0, 0, 1, 1, 0];
        let cfg = LogRegConfig { lambda: 0.05, tol: 1e-10, ..Default::default() };
        let weighted = train_logreg(&x, &y, ClassWeights { w0: 2.0, w1: 1.0 }, &cfg).unwrap();
        let mut xd = x.clone();
        let mut yd = y.clone();
        for (r, &l) in x.iter().zip(&y) {
            if l == 0 {
                xd.push(r.clone());
                yd.push(0);
            }
        }
        let dup = train_logreg(&xd, &yd, ClassWeights::UNIT, &cfg).unwrap();
        for (a, b) in weighted.weights.iter().zip(&dup.weights) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        assert!((weighted.intercept - dup.intercept).abs() < 1e-6);
    }
}
