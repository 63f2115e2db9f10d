// SPDX-License-Identifier: MIT OR Apache-2.0

use chatterkit::features::{FeatureMatrix, Scaler};
use chatterkit::learn::{fit, ClassifierKind, FittedParams};
use chatterkit::seed;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("f{j}")).collect()
}

/// Two 2-D blobs, 50 points each, separated by a gap of at least 2 along the
/// first axis (margin >= 1 around x = 0).
fn blobs<T: chatterkit::Scalar>(s: u64) -> FeatureMatrix<T> {
    let mut rng = seed::rng(s);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..100 {
        let l = (i % 2) as u8;
        let side = if l == 1 { 1.0 } else { -1.0 };
        let a = side * rng.random_range(1.0..3.0);
        let b = rng.random_range(-2.0..2.0);
        rows.push(vec![T::of(a), T::of(b)]);
        labels.push(l);
    }
    FeatureMatrix::from_rows(rows, labels, names(2), "blobs")
}

#[test]
fn separable_blobs_are_fit_exactly_by_every_kind() {
    let x: FeatureMatrix<f64> = blobs(1);
    for k in ClassifierKind::all() {
        let m = fit(&k, &x, 3).unwrap();
        assert_eq!(m.accuracy(&x).unwrap(), 1.0, "{k}");
        assert_eq!(m.predict_matrix(&x).unwrap(), x.labels, "{k}");
    }
}

#[test]
fn single_precision_models_fit_the_same_blobs() {
    let x: FeatureMatrix<f32> = blobs(1);
    for k in ClassifierKind::all() {
        assert_eq!(fit(&k, &x, 3).unwrap().accuracy(&x).unwrap(), 1.0, "{k}");
    }
}

#[test]
fn fixed_seed_gives_bit_identical_models() {
    let x: FeatureMatrix<f64> = blobs(2);
    for k in ClassifierKind::all() {
        let a = fit(&k, &x, 9).unwrap().to_json().unwrap();
        let b = fit(&k, &x, 9).unwrap().to_json().unwrap();
        assert_eq!(a, b, "{k}");
    }
    let rf = ClassifierKind::forest();
    assert_ne!(fit(&rf, &x, 9).unwrap(), fit(&rf, &x, 10).unwrap());
}

#[test]
fn empty_row_list_predicts_nothing() {
    let x: FeatureMatrix<f64> = blobs(3);
    for k in ClassifierKind::all() {
        assert!(fit(&k, &x, 0).unwrap().predict(&[]).unwrap().is_empty());
    }
}

#[test]
fn planted_feature_outranks_noise_for_logistic_regression() {
    let mut rng = seed::rng(4);
    let labels: Vec<u8> = (0..60).map(|i| (i % 2) as u8).collect();
    let rows = labels
        .iter()
        .map(|&l| {
            let tiny: f64 = rng.random_range(-0.01..0.01);
            vec![f64::from(l) + tiny, StandardNormal.sample(&mut rng)]
        })
        .collect();
    let x = FeatureMatrix::from_rows(rows, labels, names(2), "g");
    let imp = fit(&ClassifierKind::logistic(), &x, 0).unwrap().importance();
    assert!(imp[0] > imp[1], "{imp:?}");
}

#[test]
fn importance_shapes() {
    let x: FeatureMatrix<f64> = blobs(5);
    let imp = fit(&ClassifierKind::forest(), &x, 1).unwrap().importance();
    assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let one = x.select_columns(&[0]);
    for k in ClassifierKind::all() {
        let m = fit(&k, &one, 1).unwrap();
        assert_eq!(m.importance().len(), 1, "{k}");
        assert!(m.importance().iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn logistic_scores_are_log_odds_of_an_internal_scaler() {
    let x: FeatureMatrix<f64> = blobs(6);
    let m = fit(&ClassifierKind::logistic(), &x, 0).unwrap();
    let FittedParams::Linear { weights, bias } = &m.params else {
        panic!("linear params expected");
    };
    let scaler: &Scaler<f64> = m.scaler.as_ref().unwrap();
    for r in &x.rows {
        let s = m.score_row(&r.values).unwrap();
        let z: f64 = scaler
            .transform_row(&r.values)
            .iter()
            .zip(weights)
            .map(|(v, w)| v * w)
            .sum::<f64>()
            + bias;
        assert_eq!(s, z);
        let p = 1.0 / (1.0 + (-s).exp());
        assert!(p > 0.0 && p < 1.0);
        assert_eq!(m.predict_row(&r.values).unwrap(), u8::from(p > 0.5));
    }
}

#[test]
fn svm_score_grows_with_distance_from_the_boundary() {
    let x: FeatureMatrix<f64> = blobs(7);
    let m = fit(&ClassifierKind::svm(), &x, 0).unwrap();
    let near = m.score_row(&[1.5, 0.0]).unwrap();
    let far = m.score_row(&[6.0, 0.0]).unwrap();
    assert!(near > 0.0 && far > near, "{near} {far}");
    let near = m.score_row(&[-1.5, 0.0]).unwrap();
    let far = m.score_row(&[-6.0, 0.0]).unwrap();
    assert!(near < 0.0 && far < near, "{near} {far}");
}

fn random_matrix(n: usize, d: usize, s: u64) -> FeatureMatrix<f64> {
    let mut rng = seed::rng(s);
    let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let rows = (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    FeatureMatrix::from_rows(rows, labels, names(d), "g")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tree_models_ignore_monotone_column_transforms(
        s in any::<u64>(),
        n in 8usize..40,
        d in 1usize..5,
        scale in 0.1..10.0f64,
        shift in -5.0..5.0f64,
    ) {
        let x = random_matrix(n, d, s);
        let rows: Vec<Vec<f64>> = x
            .rows
            .iter()
            .map(|r| r.values.iter().enumerate().map(|(j, &v)| if j % 2 == 0 { scale * v + shift } else { v.exp() }).collect())
            .collect();
        let y = FeatureMatrix::from_rows(rows, x.labels.clone(), names(d), "g");
        for k in [ClassifierKind::forest(), ClassifierKind::boosting()] {
            let a = fit(&k, &x, s).unwrap().predict_matrix(&x).unwrap();
            let b = fit(&k, &y, s).unwrap().predict_matrix(&y).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
