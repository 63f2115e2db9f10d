// SPDX-License-Identifier: MIT OR Apache-2.0

//! Recursive feature elimination: refit, drop the least important feature,
//! repeat. The last survivor ranks first.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EvalError, LearnError};
use crate::evaluate::{self, Protocol};
use crate::features::FeatureMatrix;
use crate::learn::{fit, ClassifierKind};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    /// Feature indices, best first.
    pub order: Vec<usize>,
    pub classifier: ClassifierKind,
    pub seed: u64,
}

/// Ranks every column of `x`. Each round refits on the surviving columns with
/// the same seed and removes the one with the smallest importance; on ties the
/// higher original index goes first.
pub fn rank_features<T: Scalar>(
    x: &FeatureMatrix<T>,
    kind: &ClassifierKind,
    seed: u64,
) -> Result<Ranking, LearnError> {
    let d = x.n_features();
    if d == 0 {
        return Err(LearnError::Hyper("cannot rank zero features".into()));
    }
    let mut surviving: Vec<usize> = (0..d).collect();
    let mut eliminated = Vec::with_capacity(d);
    while surviving.len() > 1 {
        let model = fit(kind, &x.select_columns(&surviving), seed)?;
        let imp = model.importance();
        let mut worst = 0;
        for k in 1..surviving.len() {
            // `surviving` is ascending, so `<=` prefers the higher index on ties
            if imp[k] <= imp[worst] {
                worst = k;
            }
        }
        eliminated.push(surviving.remove(worst));
    }
    if d == 1 {
        // nothing to eliminate, but the preconditions of fit still apply
        fit(kind, x, seed)?;
    }
    let mut order = surviving;
    order.extend(eliminated.into_iter().rev());
    Ok(Ranking {
        order,
        classifier: *kind,
        seed,
    })
}

/// `S_1 ⊂ S_2 ⊂ … ⊂ S_d`, with `S_k` the top `k` of the ranking.
pub fn nested_subsets(r: &Ranking) -> Vec<Vec<usize>> {
    (1..=r.order.len()).map(|k| r.order[..k].to_vec()).collect()
}

/// Scores each nested subset under `protocol` (always on the rows given, which
/// callers restrict to training data) and returns the size with the highest
/// mean test accuracy, preferring the smallest on ties.
pub fn select_best_k<T: Scalar>(
    x: &FeatureMatrix<T>,
    kind: &ClassifierKind,
    r: &Ranking,
    protocol: &Protocol,
    seed: u64,
) -> Result<(usize, f64), EvalError> {
    let subsets = nested_subsets(r);
    let scores: Vec<f64> = subsets
        .par_iter()
        .map(|s| {
            evaluate::evaluate_without_rfe(&x.select_columns(s), kind, protocol, seed)
                .map(|res| res.mean_test)
        })
        .collect::<Result<_, EvalError>>()?;
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = k;
        }
    }
    Ok((best + 1, scores[best]))
}
