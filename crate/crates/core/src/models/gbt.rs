use serde::{Deserialize, Serialize};

use super::{check_input, check_training, logloss, sigmoid, ClassWeights, ModelError};

/// Relative gain margin under which two candidate splits count as tied.
/// Prefix sums and direct sums of the same gradients differ in the last
/// bits, so exact float comparison would break the tie rule at random.
pub const GAIN_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtConfig {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// L2 penalty on leaf scores.
    pub l2_leaf_reg: f64,
    /// Fewest samples allowed in either child of a split.
    pub min_child_count: usize,
}

impl Default for GbtConfig {
    fn default() -> Self {
        Self {
            rounds: 100,
            learning_rate: 0.1,
            max_depth: 30,
            l2_leaf_reg: 1.0,
            min_child_count: 1,
        }
    }
}

/// Samples with `x[feature] < threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Node array with the root at index 0. Leaf values are raw Newton steps,
/// before the learning rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] < threshold { left } else { right },
            }
        }
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(t, left).max(walk(t, right)),
            }
        }
        walk(self, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { value } => Some(*value),
            Node::Split { .. } => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub feature_count: usize,
    /// Class-weighted prior log-odds.
    pub base_score: f64,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub l2_leaf_reg: f64,
    pub trees: Vec<Tree>,
    /// Weighted mean training log-loss after each round.
    pub train_loss: Vec<f64>,
}

impl GbtModel {
    pub fn margin(&self, x: &[f64]) -> Result<f64, ModelError> {
        check_input(x, self.feature_count)?;
        Ok(self.base_score + self.learning_rate * self.trees.iter().map(|t| t.eval(x)).sum::<f64>())
    }
}

pub fn predict_gbt(model: &GbtModel, x: &[f64]) -> Result<f64, ModelError> {
    Ok(sigmoid(model.margin(x)?))
}

/// Structure score of a node, `G² / (H + λ)`.
fn score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    g: Vec<f64>,
    h: Vec<f64>,
    config: &'a GbtConfig,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    /// Exact greedy search over all features and midpoints between distinct
    /// sorted values. Ties go to the lowest feature, then lowest threshold.
    fn best_split(&self, rows: &[usize], gt: f64, ht: f64) -> Option<Split> {
        let lambda = self.config.l2_leaf_reg;
        let min_child = self.config.min_child_count.max(1);
        let parent = score(gt, ht, lambda);
        let mut best: Option<Split> = None;
        let mut order = rows.to_vec();
        for f in 0..self.x[0].len() {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 1..order.len() {
                gl += self.g[order[k - 1]];
                hl += self.h[order[k - 1]];
                let (lo, hi) = (self.x[order[k - 1]][f], self.x[order[k]][f]);
                if lo == hi || k < min_child || order.len() - k < min_child {
                    continue;
                }
                let gain = 0.5 * (score(gl, hl, lambda) + score(gt - gl, ht - hl, lambda) - parent);
                let better = match &best {
                    None => true,
                    Some(b) => gain > b.gain + GAIN_TIE_TOL * b.gain.abs().max(1.0),
                };
                if better {
                    let mut threshold = 0.5 * (lo + hi);
                    if !(threshold > lo) {
                        threshold = hi;
                    }
                    best = Some(Split { feature: f, threshold, gain });
                }
            }
        }
        best.filter(|b| b.gain > 0.0)
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let gt: f64 = rows.iter().map(|&i| self.g[i]).sum();
        let ht: f64 = rows.iter().map(|&i| self.h[i]).sum();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: -gt / (ht + self.config.l2_leaf_reg),
        });
        if depth >= self.config.max_depth || rows.len() < 2 {
            return id;
        }
        let Some(split) = self.best_split(&rows, gt, ht) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x[i][split.feature] < split.threshold);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

/// Fit one regression tree to the class-weighted logistic gradients at
/// margins `f`.
fn fit_tree(x: &[Vec<f64>], y: &[u8], s: &[f64], f: &[f64], config: &GbtConfig) -> Tree {
    let p: Vec<f64> = f.iter().map(|&m| sigmoid(m)).collect();
    let mut b = Builder {
        x,
        g: (0..y.len()).map(|i| s[i] * (p[i] - f64::from(y[i]))).collect(),
        h: (0..y.len()).map(|i| s[i] * p[i] * (1.0 - p[i])).collect(),
        config,
        nodes: Vec::new(),
    };
    b.build((0..y.len()).collect(), 0);
    Tree { nodes: b.nodes }
}

fn weighted_loss(f: &[f64], y: &[u8], s: &[f64]) -> f64 {
    let total: f64 = s.iter().sum();
    (0..y.len()).map(|i| s[i] * logloss(f[i], y[i])).sum::<f64>() / total
}

/// Logistic boosting with second-order leaf scores.
pub fn train_gbt(x: &[Vec<f64>], y: &[u8], weights: ClassWeights, config: &GbtConfig) -> Result<GbtModel, ModelError> {
    let d = check_training(x, y)?;
    let s: Vec<f64> = y.iter().map(|&l| weights.of(l)).collect();
    let pos: f64 = (0..y.len()).filter(|&i| y[i] == 1).map(|i| s[i]).sum();
    let neg: f64 = s.iter().sum::<f64>() - pos;
    let base_score = (pos / neg).ln();
    let mut f = vec![base_score; y.len()];
    let mut trees = Vec::with_capacity(config.rounds);
    let mut train_loss = Vec::with_capacity(config.rounds);
    for _ in 0..config.rounds {
        let tree = fit_tree(x, y, &s, &f, config);
        for (fi, r) in f.iter_mut().zip(x) {
            *fi += config.learning_rate * tree.eval(r);
        }
        trees.push(tree);
        train_loss.push(weighted_loss(&f, y, &s));
    }
    Ok(GbtModel {
        feature_count: d,
        base_score,
        learning_rate: config.learning_rate,
        max_depth: config.max_depth,
        l2_leaf_reg: config.l2_leaf_reg,
        trees,
        train_loss,
    })
}
