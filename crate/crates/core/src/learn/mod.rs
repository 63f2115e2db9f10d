// SPDX-License-Identifier: MIT OR Apache-2.0

//! The four classifier families behind one fit / predict / importance
//! contract.
//!
//! Linear models standardize internally with training-row statistics and keep
//! the scaler in the model; tree models consume raw features.

pub mod boosting;
pub mod forest;
pub mod linear;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::BinaryClass;
use crate::error::LearnError;
use crate::features::{FeatureMatrix, Scaler};
use crate::Scalar;

pub use boosting::BoostingParams;
pub use forest::ForestParams;
pub use linear::{LogisticParams, SvmParams};
pub use tree::{MaxFeatures, Tree};

/// Classifier family with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum ClassifierKind {
    Svm(SvmParams),
    LogisticRegression(LogisticParams),
    RandomForest(ForestParams),
    GradientBoosting(BoostingParams),
}

impl ClassifierKind {
    pub fn svm() -> Self {
        ClassifierKind::Svm(SvmParams::default())
    }
    pub fn logistic() -> Self {
        ClassifierKind::LogisticRegression(LogisticParams::default())
    }
    pub fn forest() -> Self {
        ClassifierKind::RandomForest(ForestParams::default())
    }
    pub fn boosting() -> Self {
        ClassifierKind::GradientBoosting(BoostingParams::default())
    }

    /// All four families with default hyperparameters.
    pub fn all() -> [ClassifierKind; 4] {
        [Self::svm(), Self::logistic(), Self::forest(), Self::boosting()]
    }

    /// Short name: `svm`, `lr`, `rf` or `gb`.
    pub fn short_name(&self) -> &'static str {
        match self {
            ClassifierKind::Svm(_) => "svm",
            ClassifierKind::LogisticRegression(_) => "lr",
            ClassifierKind::RandomForest(_) => "rf",
            ClassifierKind::GradientBoosting(_) => "gb",
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, ClassifierKind::Svm(_) | ClassifierKind::LogisticRegression(_))
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |m: String| Err(LearnError::Hyper(m));
        match *self {
            ClassifierKind::Svm(p) if !(p.c > 0.0 && p.c.is_finite()) || p.epochs == 0 => {
                bad(format!("svm C {} / epochs {}", p.c, p.epochs))
            }
            ClassifierKind::LogisticRegression(p)
                if !(p.lambda >= 0.0 && p.lambda.is_finite()) || p.max_iter == 0 || p.tol <= 0.0 =>
            {
                bad(format!("lr lambda {} / tol {} / max_iter {}", p.lambda, p.tol, p.max_iter))
            }
            ClassifierKind::RandomForest(p) if p.n_trees == 0 => bad("rf needs at least one tree".into()),
            ClassifierKind::GradientBoosting(p)
                if p.rounds == 0 || p.max_depth == 0 || !(p.learning_rate > 0.0) =>
            {
                bad(format!(
                    "gb rounds {} / depth {} / learning rate {}",
                    p.rounds, p.max_depth, p.learning_rate
                ))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "svm" => Ok(Self::svm()),
            "lr" | "logistic" => Ok(Self::logistic()),
            "rf" | "forest" => Ok(Self::forest()),
            "gb" | "boosting" => Ok(Self::boosting()),
            _ => Err(format!("unknown classifier {s:?} (expected svm, lr, rf or gb)")),
        }
    }
}

/// Fitted state per family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FittedParams<T> {
    Linear { weights: Vec<T>, bias: T },
    Forest { trees: Vec<Tree<T>>, importance: Vec<f64> },
    Boosting { init: T, trees: Vec<Tree<T>>, importance: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model<T> {
    pub kind: ClassifierKind,
    pub params: FittedParams<T>,
    pub scaler: Option<Scaler<T>>,
    pub feature_names: Vec<String>,
    pub seed: u64,
}

const MODEL_FORMAT: &str = "chatterkit-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile<T> {
    format: String,
    version: u32,
    model: Model<T>,
}

fn validate_training<T: Scalar>(x: &FeatureMatrix<T>) -> Result<(), LearnError> {
    if x.n_rows() < 2 {
        return Err(LearnError::TooFewRows {
            needed: 2,
            got: x.n_rows(),
        });
    }
    match x.class_counts() {
        [0, _] => return Err(LearnError::SingleClass(1)),
        [_, 0] => return Err(LearnError::SingleClass(0)),
        _ => {}
    }
    for (i, r) in x.rows.iter().enumerate() {
        if r.values.len() != x.n_features() {
            return Err(LearnError::Width {
                expected: x.n_features(),
                got: r.values.len(),
            });
        }
        if let Some(j) = r.values.iter().position(|v| !v.is_finite()) {
            return Err(LearnError::NonFinite { row: i, col: j });
        }
    }
    Ok(())
}

/// Trains `kind` on every row of `x`. Identical `(kind, x, seed)` give
/// bit-identical models.
pub fn fit<T: Scalar>(kind: &ClassifierKind, x: &FeatureMatrix<T>, seed: u64) -> Result<Model<T>, LearnError> {
    kind.validate()?;
    validate_training(x)?;
    let raw: Vec<&[T]> = x.rows.iter().map(|r| r.values.as_slice()).collect();
    let (params, scaler) = match kind {
        ClassifierKind::Svm(_) | ClassifierKind::LogisticRegression(_) => {
            let scaler = Scaler::fit(raw.iter().copied(), x.n_features());
            let scaled: Vec<Vec<T>> = raw.iter().map(|r| scaler.transform_row(r)).collect();
            let rows: Vec<&[T]> = scaled.iter().map(|r| r.as_slice()).collect();
            let signs: Vec<T> = x
                .labels
                .iter()
                .map(|&l| if l == 1 { T::one() } else { -T::one() })
                .collect();
            let lf = match kind {
                ClassifierKind::Svm(p) => linear::train_svm(&rows, &signs, p),
                ClassifierKind::LogisticRegression(p) => linear::train_logistic(&rows, &signs, p),
                _ => unreachable!(),
            };
            (
                FittedParams::Linear {
                    weights: lf.weights,
                    bias: lf.bias,
                },
                Some(scaler),
            )
        }
        ClassifierKind::RandomForest(p) => {
            let ff = forest::train_forest(&raw, &x.labels, p, seed);
            (
                FittedParams::Forest {
                    trees: ff.trees,
                    importance: ff.importance,
                },
                None,
            )
        }
        ClassifierKind::GradientBoosting(p) => {
            let bf = boosting::train_boosting(&raw, &x.labels, p);
            (
                FittedParams::Boosting {
                    init: bf.init,
                    trees: bf.trees,
                    importance: bf.importance,
                },
                None,
            )
        }
    };
    Ok(Model {
        kind: *kind,
        params,
        scaler,
        feature_names: x.feature_names.clone(),
        seed,
    })
}

impl<T: Scalar> Model<T> {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    fn check_width(&self, row: &[T]) -> Result<(), LearnError> {
        if row.len() != self.n_features() {
            return Err(LearnError::Width {
                expected: self.n_features(),
                got: row.len(),
            });
        }
        Ok(())
    }

    /// Real-valued score, positive exactly when the predicted label is 1:
    /// `w·x̃ + b` for linear models, the vote fraction minus ½ for the forest,
    /// and the log-odds for boosting.
    pub fn score_row(&self, row: &[T]) -> Result<f64, LearnError> {
        self.check_width(row)?;
        Ok(match &self.params {
            FittedParams::Linear { weights, bias } => {
                let scaled;
                let xr = match &self.scaler {
                    Some(s) => {
                        scaled = s.transform_row(row);
                        scaled.as_slice()
                    }
                    None => row,
                };
                (weights.iter().zip(xr).map(|(&w, &v)| w * v).sum::<T>() + *bias).as_f64()
            }
            FittedParams::Forest { trees, .. } => forest::vote_fraction(trees, row) - 0.5,
            FittedParams::Boosting { init, trees, .. } => boosting::raw_score(*init, trees, row).as_f64(),
        })
    }

    pub fn predict_row(&self, row: &[T]) -> Result<BinaryClass, LearnError> {
        Ok(u8::from(self.score_row(row)? > 0.0))
    }

    pub fn decision_scores(&self, rows: &[&[T]]) -> Result<Vec<f64>, LearnError> {
        rows.iter().map(|r| self.score_row(r)).collect()
    }

    pub fn predict(&self, rows: &[&[T]]) -> Result<Vec<BinaryClass>, LearnError> {
        rows.iter().map(|r| self.predict_row(r)).collect()
    }

    pub fn predict_matrix(&self, x: &FeatureMatrix<T>) -> Result<Vec<BinaryClass>, LearnError> {
        x.rows.iter().map(|r| self.predict_row(&r.values)).collect()
    }

    /// Fraction of rows of `x` predicted correctly.
    pub fn accuracy(&self, x: &FeatureMatrix<T>) -> Result<f64, LearnError> {
        if x.n_rows() == 0 {
            return Ok(0.0);
        }
        let pred = self.predict_matrix(x)?;
        let hits = pred.iter().zip(&x.labels).filter(|(a, b)| a == b).count();
        Ok(hits as f64 / x.n_rows() as f64)
    }

    /// Non-negative score per feature: `|w_i|` on standardized inputs for
    /// linear models, the share of total impurity decrease for tree ensembles
    /// (all zeros when no split happened).
    pub fn importance(&self) -> Vec<f64> {
        match &self.params {
            FittedParams::Linear { weights, .. } => weights.iter().map(|w| w.abs().as_f64()).collect(),
            FittedParams::Forest { importance, .. } | FittedParams::Boosting { importance, .. } => {
                let total: f64 = importance.iter().sum();
                if total > 0.0 {
                    importance.iter().map(|v| v / total).collect()
                } else {
                    vec![0.0; importance.len()]
                }
            }
        }
    }

    pub fn to_json(&self) -> Result<String, LearnError> {
        serde_json::to_string(&ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        })
        .map_err(|e| LearnError::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self, LearnError> {
        let f: ModelFile<T> = serde_json::from_str(s).map_err(|e| LearnError::Format(e.to_string()))?;
        if f.format != MODEL_FORMAT || f.version != MODEL_VERSION {
            return Err(LearnError::Format(format!(
                "unsupported model file {} v{}",
                f.format, f.version
            )));
        }
        Ok(f.model)
    }
}
