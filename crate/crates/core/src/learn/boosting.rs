// SPDX-License-Identifier: MIT OR Apache-2.0

//! Gradient boosting of depth-limited regression trees on the logistic loss.

use serde::{Deserialize, Serialize};

use super::tree::{grow, Criterion, GrowParams, MaxFeatures, Tree};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostingParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_split: usize,
}

impl Default for BoostingParams {
    fn default() -> Self {
        BoostingParams {
            rounds: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_samples_split: 2,
        }
    }
}

pub struct BoostFit<T> {
    /// Prior log-odds.
    pub init: T,
    /// Leaf values are the already-shrunk log-odds increments.
    pub trees: Vec<Tree<T>>,
    /// Summed squared-error decrease per feature, not yet normalized.
    pub importance: Vec<f64>,
    /// Mean training log-loss before the first round and after each round.
    pub trace: Vec<f64>,
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^{−s·F})` with `s = ±1`.
fn point_loss(label: u8, f: f64) -> f64 {
    let u = if label == 1 { -f } else { f };
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

fn mean_loss(y: &[u8], f: &[f64]) -> f64 {
    y.iter().zip(f).map(|(&l, &v)| point_loss(l, v)).sum::<f64>() / y.len() as f64
}

/// Each round fits a regression tree to the residuals `y − p`, then sets every
/// leaf to a shrunk Newton step `η·Σr / Σp(1−p)`. The step is halved until the
/// loss of the rows in that leaf does not increase, so the training loss is
/// non-increasing round over round.
pub fn train_boosting<T: Scalar>(x: &[&[T]], y: &[u8], p: &BoostingParams) -> BoostFit<T> {
    let n = x.len();
    let d = x.first().map_or(0, |r| r.len());
    let pos = y.iter().filter(|&&l| l == 1).count() as f64;
    let prior = (pos / n as f64).clamp(1e-6, 1.0 - 1e-6);
    let init = (prior / (1.0 - prior)).ln();
    let mut f = vec![init; n];
    let mut trace = vec![mean_loss(y, &f)];
    let mut trees = Vec::with_capacity(p.rounds);
    let mut importance = vec![0.0; d];
    let params = GrowParams {
        max_depth: Some(p.max_depth),
        min_samples_split: p.min_samples_split,
        max_features: MaxFeatures::All,
    };

    for _ in 0..p.rounds {
        let prob: Vec<f64> = f.iter().map(|&v| sigmoid(v)).collect();
        let resid: Vec<T> = y
            .iter()
            .zip(&prob)
            .map(|(&l, &q)| T::of(l as f64 - q))
            .collect();
        let fv = &f;
        let grown = grow(x, &resid, (0..n).collect(), Criterion::SquaredError, params, None, |m| {
            let num: f64 = m.iter().map(|&i| resid[i].as_f64()).sum();
            let den: f64 = m.iter().map(|&i| prob[i] * (1.0 - prob[i])).sum();
            let newton = if den > 1e-12 { num / den } else { num.signum() * 1e3 };
            let before: f64 = m.iter().map(|&i| point_loss(y[i], fv[i])).sum();
            let mut step = p.learning_rate * newton.clamp(-1e3, 1e3);
            for _ in 0..60 {
                let after: f64 = m.iter().map(|&i| point_loss(y[i], fv[i] + step)).sum();
                if after <= before {
                    return T::of(step);
                }
                step /= 2.0;
            }
            T::zero()
        });
        for (a, b) in importance.iter_mut().zip(&grown.importance) {
            *a += b;
        }
        for (leaf, members) in &grown.leaf_members {
            let v = grown.tree.value[*leaf].as_f64();
            for &i in members {
                f[i] += v;
            }
        }
        trace.push(mean_loss(y, &f));
        trees.push(grown.tree);
    }
    BoostFit {
        init: T::of(init),
        trees,
        importance,
        trace,
    }
}

pub fn raw_score<T: Scalar>(init: T, trees: &[Tree<T>], row: &[T]) -> T {
    trees.iter().fold(init, |acc, t| acc + t.predict_row(row))
}
