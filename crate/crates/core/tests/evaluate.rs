// SPDX-License-Identifier: MIT OR Apache-2.0

use chatterkit::evaluate::{
    ranking_frequency, repeated_split_eval, repetition_split, run_repetition, EvalResult, Protocol, RepResult,
};
use chatterkit::features::FeatureMatrix;
use chatterkit::learn::ClassifierKind;
use chatterkit::seed;
use rand::Rng;

fn names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("f{j}")).collect()
}

/// Column 0 separates the classes by a gap of 2; the rest is noise.
fn separable(n: usize, d: usize, s: u64) -> FeatureMatrix<f64> {
    let mut rng = seed::rng(s);
    let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let rows = labels
        .iter()
        .map(|&l| {
            (0..d)
                .map(|j| {
                    if j == 0 {
                        (if l == 1 { 1.0 } else { -1.0 }) * rng.random_range(1.0..2.0)
                    } else {
                        rng.random_range(-1.0..1.0)
                    }
                })
                .collect()
        })
        .collect();
    FeatureMatrix::from_rows(rows, labels, names(d), "g")
}

#[test]
fn separable_data_is_learned_by_every_kind() {
    let x = separable(40, 4, 1);
    for k in ClassifierKind::all() {
        for rfe in [false, true] {
            let r = repeated_split_eval(&x, &k, rfe, 10, 0.33, 5).unwrap();
            assert_eq!(r.per_rep.len(), 10);
            assert!(r.mean_test >= 0.95, "{k} rfe={rfe}: {}", r.mean_test);
            assert_eq!(r, repeated_split_eval(&x, &k, rfe, 10, 0.33, 5).unwrap());
        }
    }
}

#[test]
fn test_rows_never_reach_the_fitted_pipeline() {
    let x = separable(30, 5, 2);
    let (_, test) = repetition_split(&x.labels, 0.33, 8, 3).unwrap();
    let mut poisoned = x.clone();
    for &i in &test {
        poisoned.rows[i].values.iter_mut().for_each(|v| *v = 987_654.321);
    }
    for k in ClassifierKind::all() {
        for rfe in [false, true] {
            let (_, clean) = run_repetition(&x, &k, rfe, 0.33, 8, 3).unwrap();
            let (_, dirty) = run_repetition(&poisoned, &k, rfe, 0.33, 8, 3).unwrap();
            assert_eq!(clean.model.to_json().unwrap(), dirty.model.to_json().unwrap(), "{k} rfe={rfe}");
            assert_eq!(clean.selected, dirty.selected);
        }
    }
}

#[test]
fn planted_feature_is_selected_most_often() {
    let x = separable(40, 6, 3);
    let r = repeated_split_eval(&x, &ClassifierKind::logistic(), true, 10, 0.33, 0).unwrap();
    let counts = ranking_frequency(&r, 6).unwrap();
    assert_eq!(counts[0], 10);
    assert!(counts[1..].iter().all(|&c| c < 10), "{counts:?}");
    let total: usize = r.per_rep.iter().map(|p| p.selected.as_ref().unwrap().len()).sum();
    assert_eq!(counts.iter().sum::<usize>(), total);
}

#[test]
fn aggregates_recompute_from_repetitions() {
    let x = separable(24, 3, 4);
    let r: EvalResult = repeated_split_eval(&x, &ClassifierKind::forest(), false, 7, 0.33, 1).unwrap();
    let test: Vec<f64> = r.per_rep.iter().map(|p: &RepResult| p.test_accuracy).collect();
    let m = test.iter().sum::<f64>() / test.len() as f64;
    let v = test.iter().map(|a| (a - m).powi(2)).sum::<f64>() / test.len() as f64;
    assert!((r.mean_test - m).abs() < 1e-12);
    assert!((r.std_test - v.sqrt()).abs() < 1e-12);
    assert_eq!(r.protocol, Protocol::RepeatedSplit { reps: 7, test_frac: 0.33 });
}
