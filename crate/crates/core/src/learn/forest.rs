// SPDX-License-Identifier: MIT OR Apache-2.0

//! Random forest of Gini trees with bootstrap rows and per-node feature
//! subsampling; prediction is a majority vote.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, Criterion, GrowParams, MaxFeatures, Tree};
use crate::seed::{self, Stream};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    /// Nodes with fewer samples are not split.
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            min_samples_split: 2,
            max_depth: None,
        }
    }
}

pub struct ForestFit<T> {
    pub trees: Vec<Tree<T>>,
    /// Summed Gini decrease per feature, not yet normalized.
    pub importance: Vec<f64>,
}

/// Tree `t` draws from its own stream `derive(seed, Tree, t)`, so the fitted
/// forest does not depend on thread scheduling.
pub fn train_forest<T: Scalar>(x: &[&[T]], y: &[u8], p: &ForestParams, seed_: u64) -> ForestFit<T> {
    let n = x.len();
    let d = x.first().map_or(0, |r| r.len());
    let targets: Vec<T> = y.iter().map(|&l| T::of(l as f64)).collect();
    let grown: Vec<_> = (0..p.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed::derive(seed_, Stream::Tree, t as u64));
            let sample: Vec<usize> = if p.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let params = GrowParams {
                max_depth: p.max_depth,
                min_samples_split: p.min_samples_split,
                max_features: p.max_features,
            };
            grow(x, &targets, sample, Criterion::Gini, params, Some(&mut rng), |m| {
                let ones = m.iter().filter(|&&i| y[i] == 1).count();
                T::of(ones as f64 / m.len() as f64)
            })
        })
        .collect();
    let mut importance = vec![0.0; d];
    let trees = grown
        .into_iter()
        .map(|g| {
            for (a, b) in importance.iter_mut().zip(&g.importance) {
                *a += b;
            }
            g.tree
        })
        .collect();
    ForestFit { trees, importance }
}

/// Fraction of trees voting chatter. A tree votes chatter when its leaf holds
/// more chatter than stable samples.
pub fn vote_fraction<T: Scalar>(trees: &[Tree<T>], row: &[T]) -> f64 {
    let half = T::of(0.5);
    let votes = trees.iter().filter(|t| t.predict_row(row) > half).count();
    votes as f64 / trees.len() as f64
}
