// SPDX-License-Identifier: MIT OR Apache-2.0

//! CART trees stored as parallel arrays.
//!
//! Classification trees split on Gini impurity, regression trees on squared
//! error. Thresholds sit halfway between consecutive distinct values; a row
//! goes left when its value is `<=` the threshold. Among equally good splits
//! the lowest feature index wins, then the lowest threshold.

use std::cmp::Ordering;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::Scalar;

pub const LEAF: i64 = -1;

/// Node `i` is a leaf when `feature[i] == -1`; otherwise its children are
/// `left[i]` and `right[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<T> {
    pub feature: Vec<i64>,
    pub threshold: Vec<T>,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub value: Vec<T>,
    pub n_samples: Vec<usize>,
}

impl<T: Scalar> Tree<T> {
    fn empty() -> Self {
        Tree {
            feature: Vec::new(),
            threshold: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
            value: Vec::new(),
            n_samples: Vec::new(),
        }
    }

    fn push_leaf(&mut self, value: T, n: usize) -> usize {
        self.feature.push(LEAF);
        self.threshold.push(T::zero());
        self.left.push(0);
        self.right.push(0);
        self.value.push(value);
        self.n_samples.push(n);
        self.feature.len() - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.feature.len()
    }

    pub fn leaf_index(&self, row: &[T]) -> usize {
        let mut i = 0;
        while self.feature[i] != LEAF {
            i = if row[self.feature[i] as usize] <= self.threshold[i] {
                self.left[i]
            } else {
                self.right[i]
            };
        }
        i
    }

    pub fn predict_row(&self, row: &[T]) -> T {
        self.value[self.leaf_index(row)]
    }

    pub fn depth(&self) -> usize {
        fn go<T>(t: &Tree<T>, i: usize) -> usize {
            if t.feature[i] == LEAF {
                0
            } else {
                1 + go(t, t.left[i]).max(go(t, t.right[i]))
            }
        }
        go(self, 0)
    }
}

/// How many features a node may consider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    /// `⌈√d⌉`
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => ((d as f64).sqrt().ceil() as usize).clamp(1, d.max(1)),
            MaxFeatures::Count(k) => k.clamp(1, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GrowParams {
    pub max_depth: Option<usize>,
    /// Nodes with fewer samples become leaves.
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
}

/// Split objective. `Gini` expects 0/1 targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Gini,
    SquaredError,
}

/// A fitted tree plus the impurity decrease attributed to each feature
/// (sample-count weighted, in the criterion's own units).
pub struct Grown<T> {
    pub tree: Tree<T>,
    pub importance: Vec<f64>,
    /// Sample indices per leaf node, keyed by node id.
    pub leaf_members: Vec<(usize, Vec<usize>)>,
}

struct Builder<'a, T, F> {
    x: &'a [&'a [T]],
    y: &'a [T],
    criterion: Criterion,
    params: GrowParams,
    rng: Option<&'a mut ChaCha8Rng>,
    leaf_value: F,
    tree: Tree<T>,
    importance: Vec<f64>,
    leaf_members: Vec<(usize, Vec<usize>)>,
}

/// Candidate split quality, comparable exactly for Gini.
#[derive(Clone, Copy, Debug)]
enum Score<T> {
    /// Maximize `a_l/n_l + a_r/n_r` with `a = c0² + c1²`, kept as a fraction.
    Gini { num: u128, den: u128 },
    /// Minimize summed squared error.
    Sse(T),
}

impl<T: Scalar> Score<T> {
    fn better_than(&self, other: &Score<T>) -> bool {
        match (self, other) {
            (Score::Gini { num: n1, den: d1 }, Score::Gini { num: n2, den: d2 }) => {
                n1 * d2 > n2 * d1
            }
            (Score::Sse(a), Score::Sse(b)) => a < b,
            _ => unreachable!("mixed criteria"),
        }
    }
}

struct Split<T> {
    feature: usize,
    threshold: T,
    score: Score<T>,
}

/// Grows one tree on the rows listed in `sample` (repeats allowed, as in a
/// bootstrap draw). `leaf_value` maps the member indices of a leaf to its
/// stored value.
pub fn grow<T: Scalar, F: FnMut(&[usize]) -> T>(
    x: &[&[T]],
    y: &[T],
    sample: Vec<usize>,
    criterion: Criterion,
    params: GrowParams,
    rng: Option<&mut ChaCha8Rng>,
    leaf_value: F,
) -> Grown<T> {
    let d = x.first().map_or(0, |r| r.len());
    let mut b = Builder {
        x,
        y,
        criterion,
        params,
        rng,
        leaf_value,
        tree: Tree::empty(),
        importance: vec![0.0; d],
        leaf_members: Vec::new(),
    };
    b.node(sample, 0);
    Grown {
        tree: b.tree,
        importance: b.importance,
        leaf_members: b.leaf_members,
    }
}

impl<'a, T: Scalar, F: FnMut(&[usize]) -> T> Builder<'a, T, F> {
    fn node(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let n = idx.len();
        let depth_ok = self.params.max_depth.map_or(true, |m| depth < m);
        let split = if n >= self.params.min_samples_split.max(2) && depth_ok && !self.is_pure(&idx)
        {
            self.best_split(&idx)
        } else {
            None
        };
        let Some(split) = split else {
            let v = (self.leaf_value)(&idx);
            let id = self.tree.push_leaf(v, n);
            self.leaf_members.push((id, idx));
            return id;
        };

        let parent_impurity = self.impurity(&idx);
        let (li, ri): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x[i][split.feature] <= split.threshold);
        let child_impurity = self.impurity(&li) + self.impurity(&ri);
        self.importance[split.feature] += (parent_impurity - child_impurity).max(0.0);

        let id = self.tree.push_leaf(T::zero(), n);
        self.tree.feature[id] = split.feature as i64;
        self.tree.threshold[id] = split.threshold;
        let l = self.node(li, depth + 1);
        let r = self.node(ri, depth + 1);
        self.tree.left[id] = l;
        self.tree.right[id] = r;
        id
    }

    fn is_pure(&self, idx: &[usize]) -> bool {
        let first = self.y[idx[0]];
        idx.iter().all(|&i| self.y[i] == first)
    }

    /// Sample-weighted impurity `n·I(node)` in f64.
    fn impurity(&self, idx: &[usize]) -> f64 {
        if idx.is_empty() {
            return 0.0;
        }
        let n = idx.len() as f64;
        match self.criterion {
            Criterion::Gini => {
                let ones = idx.iter().filter(|&&i| self.y[i] > T::zero()).count() as f64;
                let p = ones / n;
                n * (1.0 - p * p - (1.0 - p) * (1.0 - p))
            }
            Criterion::SquaredError => {
                let mean = idx.iter().map(|&i| self.y[i].as_f64()).sum::<f64>() / n;
                idx.iter().map(|&i| (self.y[i].as_f64() - mean).powi(2)).sum()
            }
        }
    }

    /// Features to examine at this node, in ascending index order.
    fn candidate_features(&mut self, idx: &[usize]) -> Vec<usize> {
        let d = self.importance.len();
        let non_constant = |j: usize| {
            let v0 = self.x[idx[0]][j];
            idx.iter().any(|&i| self.x[i][j] != v0)
        };
        let m = self.params.max_features.resolve(d);
        let mut chosen = match self.rng.as_deref_mut() {
            Some(rng) if m < d => {
                // visit features in random order until m non-constant ones
                // are found (or all are exhausted)
                let mut order: Vec<usize> = (0..d).collect();
                let mut out = Vec::with_capacity(m);
                for k in 0..d {
                    let pick = rng.random_range(k..d);
                    order.swap(k, pick);
                    let j = order[k];
                    if non_constant(j) {
                        out.push(j);
                        if out.len() == m {
                            break;
                        }
                    }
                }
                out
            }
            _ => (0..d).filter(|&j| non_constant(j)).collect(),
        };
        chosen.sort_unstable();
        chosen
    }

    fn best_split(&mut self, idx: &[usize]) -> Option<Split<T>> {
        let features = self.candidate_features(idx);
        let mut best: Option<Split<T>> = None;
        let mut order = idx.to_vec();
        for j in features {
            order.sort_by(|&a, &b| {
                self.x[a][j]
                    .partial_cmp(&self.x[b][j])
                    .unwrap_or(Ordering::Equal)
            });
            if let Some(s) = self.scan_feature(&order, j) {
                if best.as_ref().map_or(true, |b| s.score.better_than(&b.score)) {
                    best = Some(s);
                }
            }
        }
        best
    }

    /// Best threshold for feature `j` over rows pre-sorted by that feature.
    fn scan_feature(&self, order: &[usize], j: usize) -> Option<Split<T>> {
        let n = order.len();
        let mut best: Option<Split<T>> = None;
        match self.criterion {
            Criterion::Gini => {
                let total1 = order.iter().filter(|&&i| self.y[i] > T::zero()).count() as u128;
                let total = n as u128;
                let mut l1: u128 = 0;
                for k in 0..n - 1 {
                    if self.y[order[k]] > T::zero() {
                        l1 += 1;
                    }
                    let (lo, hi) = (self.x[order[k]][j], self.x[order[k + 1]][j]);
                    if lo == hi {
                        continue;
                    }
                    let nl = (k + 1) as u128;
                    let nr = total - nl;
                    let l0 = nl - l1;
                    let r1 = total1 - l1;
                    let r0 = nr - r1;
                    let al = l0 * l0 + l1 * l1;
                    let ar = r0 * r0 + r1 * r1;
                    let score = Score::Gini {
                        num: al * nr + ar * nl,
                        den: nl * nr,
                    };
                    if best.as_ref().map_or(true, |b| score.better_than(&b.score)) {
                        best = Some(Split {
                            feature: j,
                            threshold: midpoint(lo, hi),
                            score,
                        });
                    }
                }
            }
            Criterion::SquaredError => {
                let total: T = order.iter().map(|&i| self.y[i]).sum();
                let total_sq: T = order.iter().map(|&i| self.y[i] * self.y[i]).sum();
                let mut ls = T::zero();
                let mut lsq = T::zero();
                for k in 0..n - 1 {
                    let yi = self.y[order[k]];
                    ls += yi;
                    lsq += yi * yi;
                    let (lo, hi) = (self.x[order[k]][j], self.x[order[k + 1]][j]);
                    if lo == hi {
                        continue;
                    }
                    let nl = T::of_usize(k + 1);
                    let nr = T::of_usize(n - k - 1);
                    let rs = total - ls;
                    let rsq = total_sq - lsq;
                    let sse = (lsq - ls * ls / nl) + (rsq - rs * rs / nr);
                    let score = Score::Sse(sse);
                    if best.as_ref().map_or(true, |b| score.better_than(&b.score)) {
                        best = Some(Split {
                            feature: j,
                            threshold: midpoint(lo, hi),
                            score,
                        });
                    }
                }
            }
        }
        best
    }
}

/// Halfway between two distinct values, never rounding up onto `hi`.
pub fn midpoint<T: Scalar>(lo: T, hi: T) -> T {
    let m = lo + (hi - lo) / T::of(2.0);
    if m >= hi || m < lo {
        lo
    } else {
        m
    }
}
