// SPDX-License-Identifier: MIT OR Apache-2.0

//! Experiment protocols: repeated stratified splits, stratified k-fold CV and
//! train-on-one-configuration, test-on-another transfer.
//!
//! Every repetition is a pure function of the root seed and its index, so the
//! work runs in parallel and merges in index order.

mod report;
mod splits;

pub use report::{emit_report, write_atomic, EvalRow, Report, ReportFormat, TransferRow};
pub use splits::{stratified_folds, stratified_split};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EvalError, LearnError};
use crate::features::FeatureMatrix;
use crate::learn::{fit, ClassifierKind, Model};
use crate::rfe::{rank_features, select_best_k};
use crate::seed::{self, Stream};
use crate::Scalar;

pub const DEFAULT_REPS: usize = 10;
pub const DEFAULT_TEST_FRAC: f64 = 0.33;
/// Folds used to choose the subset size inside each training split.
pub const SELECTION_FOLDS: usize = 5;
const MAX_REDRAWS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Protocol {
    RepeatedSplit { reps: usize, test_frac: f64 },
    KFold { k: usize },
    /// Train and score on the same rows. Only used for subset selection when a
    /// training split is too small to fold.
    Resubstitution,
}

impl Protocol {
    pub fn repeated_default() -> Self {
        Protocol::RepeatedSplit {
            reps: DEFAULT_REPS,
            test_frac: DEFAULT_TEST_FRAC,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Protocol::RepeatedSplit { reps, test_frac } => {
                format!("repeated_split(reps={reps},test_frac={test_frac})")
            }
            Protocol::KFold { k } => format!("kfold(k={k})"),
            Protocol::Resubstitution => "resubstitution".into(),
        }
    }
}

/// Subset-size selection protocol for a training part with the given class
/// counts: stratified k-fold with k capped by the minority class.
pub fn selection_protocol(class_counts: [usize; 2]) -> Protocol {
    let k = SELECTION_FOLDS.min(class_counts[0]).min(class_counts[1]);
    if k >= 2 {
        Protocol::KFold { k }
    } else {
        Protocol::Resubstitution
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepResult {
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    /// Columns used by the final fit when RFE is on.
    pub selected: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub per_rep: Vec<RepResult>,
    pub mean_train: f64,
    pub std_train: f64,
    pub mean_test: f64,
    pub std_test: f64,
    pub protocol: Protocol,
    pub classifier: ClassifierKind,
    pub use_rfe: bool,
    pub seed: u64,
}

/// Mean and population standard deviation.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl EvalResult {
    fn aggregate(
        per_rep: Vec<RepResult>,
        protocol: Protocol,
        classifier: ClassifierKind,
        use_rfe: bool,
        seed: u64,
    ) -> Self {
        let tr: Vec<f64> = per_rep.iter().map(|r| r.train_accuracy).collect();
        let te: Vec<f64> = per_rep.iter().map(|r| r.test_accuracy).collect();
        let (mean_train, std_train) = mean_std(&tr);
        let (mean_test, std_test) = mean_std(&te);
        EvalResult {
            per_rep,
            mean_train,
            std_train,
            mean_test,
            std_test,
            protocol,
            classifier,
            use_rfe,
            seed,
        }
    }
}

/// A model fitted on training rows, with the columns it consumes.
#[derive(Debug, Clone)]
pub struct Pipeline<T> {
    pub model: Model<T>,
    pub selected: Option<Vec<usize>>,
}

impl<T: Scalar> Pipeline<T> {
    pub fn accuracy(&self, x: &FeatureMatrix<T>) -> Result<f64, LearnError> {
        match &self.selected {
            Some(cols) => self.model.accuracy(&x.select_columns(cols)),
            None => self.model.accuracy(x),
        }
    }
}

/// Ranks, selects and fits using `train` alone.
pub fn fit_pipeline<T: Scalar>(
    train: &FeatureMatrix<T>,
    kind: &ClassifierKind,
    use_rfe: bool,
    seed: u64,
) -> Result<Pipeline<T>, EvalError> {
    if !use_rfe {
        return Ok(Pipeline {
            model: fit(kind, train, seed)?,
            selected: None,
        });
    }
    let ranking = rank_features(train, kind, seed)?;
    let inner = selection_protocol(train.class_counts());
    let (k, _) = select_best_k(train, kind, &ranking, &inner, seed::derive(seed, Stream::Inner, 0))?;
    let cols = ranking.order[..k].to_vec();
    Ok(Pipeline {
        model: fit(kind, &train.select_columns(&cols), seed)?,
        selected: Some(cols),
    })
}

fn score_split<T: Scalar>(
    x: &FeatureMatrix<T>,
    train_idx: &[usize],
    test_idx: &[usize],
    kind: &ClassifierKind,
    use_rfe: bool,
    fit_seed: u64,
) -> Result<(RepResult, Pipeline<T>), EvalError> {
    let train = x.select_rows(train_idx);
    let test = x.select_rows(test_idx);
    let p = fit_pipeline(&train, kind, use_rfe, fit_seed)?;
    let rep = RepResult {
        train_accuracy: p.accuracy(&train)?,
        test_accuracy: p.accuracy(&test)?,
        selected: p.selected.clone(),
    };
    Ok((rep, p))
}

fn check_two_classes<T: Scalar>(x: &FeatureMatrix<T>) -> Result<(), EvalError> {
    let c = x.class_counts();
    if c[0] == 0 {
        return Err(LearnError::SingleClass(1).into());
    }
    if c[1] == 0 {
        return Err(LearnError::SingleClass(0).into());
    }
    Ok(())
}

/// Index sets of repetition `rep`: redraws until the training part holds both
/// classes.
pub fn repetition_split(
    labels: &[u8],
    test_frac: f64,
    seed: u64,
    rep: usize,
) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    let rep_seed = seed::derive(seed, Stream::Split, rep as u64);
    for attempt in 0..MAX_REDRAWS {
        let mut rng = seed::rng(seed::derive(rep_seed, Stream::Repetition, attempt));
        let (train, test) = stratified_split(labels, test_frac, &mut rng);
        let ones = train.iter().filter(|&&i| labels[i] == 1).count();
        if ones > 0 && ones < train.len() && !test.is_empty() {
            return Ok((train, test));
        }
    }
    Err(EvalError::DegenerateSplit(MAX_REDRAWS as usize))
}

/// Fits repetition `rep` of a repeated-split run and returns its outcome with
/// the fitted pipeline.
pub fn run_repetition<T: Scalar>(
    x: &FeatureMatrix<T>,
    kind: &ClassifierKind,
    use_rfe: bool,
    test_frac: f64,
    seed: u64,
    rep: usize,
) -> Result<(RepResult, Pipeline<T>), EvalError> {
    let (train, test) = repetition_split(&x.labels, test_frac, seed, rep)?;
    score_split(x, &train, &test, kind, use_rfe, seed::derive(seed, Stream::Fit, rep as u64))
}

pub fn repeated_split_eval<T: Scalar>(
    x: &FeatureMatrix<T>,
    kind: &ClassifierKind,
    use_rfe: bool,
    n_rep: usize,
    test_frac: f64,
    seed: u64,
) -> Result<EvalResult, EvalError> {
    kind.validate()?;
    if n_rep == 0 {
        return Err(EvalError::Protocol("n_rep must be at least 1".into()));
    }
    if !(test_frac > 0.0 && test_frac < 1.0) {
        return Err(EvalError::Protocol(format!("test_frac {test_frac} outside (0, 1)")));
    }
    check_two_classes(x)?;
    let per_rep = (0..n_rep)
        .into_par_iter()
        .map(|r| run_repetition(x, kind, use_rfe, test_frac, seed, r).map(|(rep, _)| rep))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvalResult::aggregate(
        per_rep,
        Protocol::RepeatedSplit { reps: n_rep, test_frac },
        *kind,
        use_rfe,
        seed,
    ))
}

pub fn kfold_cv<T: Scalar>(
    x: &FeatureMatrix<T>,
    kind: &ClassifierKind,
    use_rfe: bool,
    k: usize,
    seed: u64,
) -> Result<EvalResult, EvalError> {
    kind.validate()?;
    let n = x.n_rows();
    if k < 2 || k > n {
        return Err(EvalError::Folds { k, rows: n });
    }
    check_two_classes(x)?;
    let folds = stratified_folds(&x.labels, k, &mut seed::rng(seed::derive(seed, Stream::Fold, 0)));
    let per_rep = folds
        .par_iter()
        .enumerate()
        .map(|(i, test)| {
            let mut in_test = vec![false; n];
            test.iter().for_each(|&t| in_test[t] = true);
            let train: Vec<usize> = (0..n).filter(|&r| !in_test[r]).collect();
            let ones = train.iter().filter(|&&r| x.labels[r] == 1).count();
            if ones == 0 || ones == train.len() {
                return Err(EvalError::FoldSingleClass { fold: i });
            }
            score_split(x, &train, test, kind, use_rfe, seed::derive(seed, Stream::Fit, i as u64))
                .map(|(rep, _)| rep)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvalResult::aggregate(per_rep, Protocol::KFold { k }, *kind, use_rfe, seed))
}

/// Dispatches to the protocol with RFE off. Used to score candidate subsets.
pub fn evaluate_without_rfe<T: Scalar>(
    x: &FeatureMatrix<T>,
    kind: &ClassifierKind,
    protocol: &Protocol,
    seed: u64,
) -> Result<EvalResult, EvalError> {
    match *protocol {
        Protocol::RepeatedSplit { reps, test_frac } => repeated_split_eval(x, kind, false, reps, test_frac, seed),
        Protocol::KFold { k } => kfold_cv(x, kind, false, k, seed),
        Protocol::Resubstitution => {
            check_two_classes(x)?;
            let model = fit(kind, x, seed::derive(seed, Stream::Fit, 0))?;
            let acc = model.accuracy(x)?;
            let rep = RepResult {
                train_accuracy: acc,
                test_accuracy: acc,
                selected: None,
            };
            Ok(EvalResult::aggregate(vec![rep], *protocol, *kind, false, seed))
        }
    }
}

/// Fold count per overhang (cm): 10 for the shortest and longest overhangs,
/// 5 otherwise.
pub fn default_folds_for_overhang(overhang_cm: f64) -> usize {
    let long_or_short = [5.08, 11.43].iter().any(|&c| (overhang_cm - c).abs() < 1e-6);
    if long_or_short {
        10
    } else {
        5
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub source_config: String,
    pub target_config: String,
    pub classifier: ClassifierKind,
    pub use_rfe: bool,
    pub seed: u64,
    /// Accuracy on the source rows the model was fitted on.
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub selected: Option<Vec<usize>>,
}

fn describe_groups<T: Scalar>(x: &FeatureMatrix<T>) -> String {
    let mut g = x.groups();
    g.sort();
    g.dedup();
    g.join("+")
}

/// Fits on every source row and scores every target row. Passing the same
/// matrix twice is allowed and yields the training accuracy.
pub fn transfer_eval<T: Scalar>(
    source: &FeatureMatrix<T>,
    target: &FeatureMatrix<T>,
    kind: &ClassifierKind,
    use_rfe: bool,
    seed: u64,
) -> Result<TransferResult, EvalError> {
    kind.validate()?;
    if source.feature_names != target.feature_names {
        return Err(EvalError::LayoutMismatch);
    }
    check_two_classes(source)?;
    let p = fit_pipeline(source, kind, use_rfe, seed::derive(seed, Stream::Fit, 0))?;
    Ok(TransferResult {
        source_config: describe_groups(source),
        target_config: describe_groups(target),
        classifier: *kind,
        use_rfe,
        seed,
        train_accuracy: p.accuracy(source)?,
        test_accuracy: p.accuracy(target)?,
        selected: p.selected,
    })
}

/// How many repetitions selected each feature index.
pub fn ranking_frequency(result: &EvalResult, n_features: usize) -> Result<Vec<usize>, EvalError> {
    let mut counts = vec![0; n_features];
    let mut any = false;
    for rep in &result.per_rep {
        if let Some(sel) = &rep.selected {
            any = true;
            for &j in sel {
                if j >= n_features {
                    return Err(EvalError::LayoutMismatch);
                }
                counts[j] += 1;
            }
        }
    }
    if !any {
        return Err(EvalError::NoSelections);
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn separable(n: usize, d: usize, s: u64) -> FeatureMatrix<f64> {
        let mut rng = seed::rng(s);
        let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let rows = labels
            .iter()
            .map(|&l| {
                (0..d)
                    .map(|j| {
                        let base = if j == 0 { 3.0 * l as f64 } else { 0.0 };
                        base + rng.random_range(-0.5..0.5)
                    })
                    .collect()
            })
            .collect();
        FeatureMatrix::from_rows(rows, labels, (0..d).map(|j| format!("f{j}")).collect(), "g")
    }

    #[test]
    fn repeated_split_has_n_rep_entries_and_consistent_aggregates() {
        let x = separable(40, 3, 1);
        let r = repeated_split_eval(&x, &ClassifierKind::logistic(), false, 10, 0.33, 4).unwrap();
        assert_eq!(r.per_rep.len(), 10);
        assert!(r.mean_test >= 0.95);
        let te: Vec<f64> = r.per_rep.iter().map(|p| p.test_accuracy).collect();
        let (m, s) = mean_std(&te);
        assert!((m - r.mean_test).abs() <= 1e-12 && (s - r.std_test).abs() <= 1e-12);
        let again = repeated_split_eval(&x, &ClassifierKind::logistic(), false, 10, 0.33, 4).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn leave_one_out_and_fold_errors() {
        let x = separable(12, 2, 2);
        let r = kfold_cv(&x, &ClassifierKind::logistic(), false, 12, 0).unwrap();
        assert_eq!(r.per_rep.len(), 12);
        assert!(matches!(
            kfold_cv(&x, &ClassifierKind::logistic(), false, 13, 0),
            Err(EvalError::Folds { k: 13, rows: 12 })
        ));
        assert!(kfold_cv(&x, &ClassifierKind::logistic(), false, 1, 0).is_err());
    }

    #[test]
    fn self_transfer_equals_training_accuracy() {
        let x = separable(30, 3, 3);
        for k in ClassifierKind::all() {
            let t = transfer_eval(&x, &x, &k, false, 9).unwrap();
            assert_eq!(t.train_accuracy, t.test_accuracy);
        }
    }

    #[test]
    fn transfer_rejects_single_class_source_and_layout_mismatch() {
        let x = separable(20, 3, 4);
        let ones: Vec<usize> = (0..20).filter(|&i| x.labels[i] == 1).collect();
        let single = x.select_rows(&ones);
        assert!(transfer_eval(&single, &x, &ClassifierKind::svm(), false, 0).is_err());
        let narrower = x.select_columns(&[0, 1]);
        assert!(matches!(
            transfer_eval(&x, &narrower, &ClassifierKind::svm(), false, 0),
            Err(EvalError::LayoutMismatch)
        ));
    }

    #[test]
    fn frequency_accounting() {
        let x = separable(30, 4, 5);
        let r = repeated_split_eval(&x, &ClassifierKind::logistic(), true, 10, 0.33, 1).unwrap();
        let c = ranking_frequency(&r, 4).unwrap();
        let total: usize = r.per_rep.iter().map(|p| p.selected.as_ref().unwrap().len()).sum();
        assert_eq!(c.iter().sum::<usize>(), total);
        assert!(c.iter().all(|&v| v <= 10));
        assert_eq!(c[0], 10);
        let plain = repeated_split_eval(&x, &ClassifierKind::logistic(), false, 2, 0.33, 1).unwrap();
        assert!(matches!(ranking_frequency(&plain, 4), Err(EvalError::NoSelections)));
    }

    #[test]
    fn fold_table() {
        assert_eq!(default_folds_for_overhang(5.08), 10);
        assert_eq!(default_folds_for_overhang(11.43), 10);
        assert_eq!(default_folds_for_overhang(6.35), 5);
        assert_eq!(default_folds_for_overhang(8.89), 5);
    }

    #[test]
    fn selection_protocol_caps_folds() {
        assert_eq!(selection_protocol([20, 20]), Protocol::KFold { k: 5 });
        assert_eq!(selection_protocol([3, 20]), Protocol::KFold { k: 3 });
        assert_eq!(selection_protocol([1, 20]), Protocol::Resubstitution);
    }
}
