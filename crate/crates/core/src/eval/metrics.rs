use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    /// Counts with "positive" meaning `score >= threshold`.
    pub fn at_threshold(scores: &[f64], labels: &[u8], threshold: f64) -> Confusion {
        let mut c = Confusion::default();
        for (&s, &l) in scores.iter().zip(labels) {
            match (s >= threshold, l == 1) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Threshold metrics; a ratio with a zero denominator is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub se: Option<f64>,
    pub sp: Option<f64>,
    pub f1: Option<f64>,
    pub acc: Option<f64>,
    pub ppv: Option<f64>,
    pub auc: Option<f64>,
}

impl MetricSet {
    pub const NAMES: [&'static str; 6] = ["acc", "se", "sp", "f1", "ppv", "auc"];

    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "se" => self.se,
            "sp" => self.sp,
            "f1" => self.f1,
            "acc" => self.acc,
            "ppv" => self.ppv,
            "auc" => self.auc,
            _ => None,
        }
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Se, Sp, PPV, Acc and F1 from confusion counts. AUC is left empty.
pub fn confusion_metrics(c: &Confusion) -> Result<MetricSet, EvalError> {
    if c.total() == 0 {
        return Err(EvalError::EmptyInput);
    }
    let se = ratio(c.tp, c.tp + c.fn_);
    let ppv = ratio(c.tp, c.tp + c.fp);
    let f1 = match (se, ppv) {
        (Some(s), Some(p)) if s + p > 0.0 => Some(2.0 * p * s / (p + s)),
        _ => None,
    };
    Ok(MetricSet {
        se,
        sp: ratio(c.tn, c.tn + c.fp),
        f1,
        acc: ratio(c.tp + c.tn, c.total()),
        ppv,
        auc: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores `>= threshold` are positive; `None` for the (0, 0) corner.
    pub threshold: Option<f64>,
}

/// ROC curve over the distinct scores, highest first, and its trapezoidal
/// area. Tied scores move both rates at once, which gives ties half credit.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<(f64, Vec<RocPoint>), EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(EvalError::NonFinite(i));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: None,
    }];
    // Twice the area in units of (one positive × one negative); integral.
    let mut area2: u128 = 0;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        area2 += ((fp - fp0) * (tp + tp0)) as u128;
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold: Some(s),
        });
    }
    let auc = area2 as f64 / (2.0 * pos as f64 * neg as f64);
    Ok((auc, points))
}

/// Mean and sample (n − 1) standard deviation over folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    /// Folds where the metric was defined.
    pub n: usize,
}

pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary { mean: None, std: None, n };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = (n > 1).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
    Summary {
        mean: Some(mean),
        std,
        n,
    }
}
