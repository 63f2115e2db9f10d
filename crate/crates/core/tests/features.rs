// SPDX-License-Identifier: MIT OR Apache-2.0

use std::f64::consts::PI;

use chatterkit::dataset::{CuttingConfig, RawLabel};
use chatterkit::features::{build_matrix, extract_features, standardize, FeatureConfig, FeatureMatrix};
use chatterkit::{LabeledDataset, TimeSeries};
use proptest::prelude::*;

fn record(samples: Vec<f64>, label: RawLabel, id: &str) -> TimeSeries<f64> {
    TimeSeries {
        samples,
        sample_rate_hz: 10_000.0,
        config: CuttingConfig {
            overhang_cm: 5.08,
            spindle_rpm: 570.0,
            depth_of_cut_cm: 0.0127,
            config_id: id.to_string(),
        },
        label,
    }
}

fn two_tone(n: usize, phase: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64 / 10_000.0;
            (2.0 * PI * 200.0 * t + phase).sin() + 0.8 * (2.0 * PI * 900.0 * t).sin()
        })
        .collect()
}

#[test]
fn two_tones_fill_the_fft_x_features() {
    // 8192 samples at 10 kHz: bins are 1.22 Hz wide, so the 500-bin spacing
    // covers more than half of the 700 Hz gap between the tones
    let ts = record(two_tone(8192, 0.0), RawLabel::Chatter, "tt");
    let v = extract_features(&ts, &FeatureConfig::new(2, 0.1)).unwrap();
    let bin = 10_000.0 / 8192.0;
    assert!((v.values[0] - 200.0).abs() <= bin, "{}", v.values[0]);
    assert!((v.values[2] - 900.0).abs() <= bin, "{}", v.values[2]);
    assert_eq!(v, extract_features(&ts, &FeatureConfig::new(2, 0.1)).unwrap());
}

#[test]
fn shortfall_records_are_reported_not_padded() {
    let mut records: Vec<TimeSeries<f64>> = (0..10)
        .map(|i| {
            let label = if i % 2 == 0 { RawLabel::Stable } else { RawLabel::Chatter };
            record(two_tone(8192, i as f64), label, &format!("r{i}"))
        })
        .collect();
    let cfg = FeatureConfig::new(2, 0.1);
    let ds = LabeledDataset {
        records: records.clone(),
        manifest_path: None,
    };
    let (x, excluded) = build_matrix(&ds, &cfg).unwrap();
    assert_eq!((x.n_rows(), x.n_features()), (10, 12));
    assert!(excluded.is_empty());
    assert_eq!(x.labels, vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);

    // a constant record has a flat spectrum and therefore no peaks
    records[3] = record(vec![2.5; 8192], RawLabel::Chatter, "flat");
    let ds = LabeledDataset {
        records,
        manifest_path: None,
    };
    let (x, excluded) = build_matrix(&ds, &cfg).unwrap();
    assert_eq!(x.n_rows(), 9);
    assert_eq!(excluded.len(), 1);
    assert_eq!(excluded[0].record_id, "flat");
    assert_eq!(x.labels, vec![0, 1, 0, 0, 1, 0, 1, 0, 1]);
}

fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix<f64> {
    let d = rows[0].len();
    let labels = (0..rows.len()).map(|i| (i % 2) as u8).collect();
    FeatureMatrix::from_rows(rows, labels, (0..d).map(|j| format!("f{j}")).collect(), "g")
}

fn rows_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..6).prop_flat_map(|d| prop::collection::vec(prop::collection::vec(-100.0..100.0f64, d), 4..30))
}

/// Nearest class centroid of each test row, in standardized coordinates.
fn nearest_centroid(train: &FeatureMatrix<f64>, test: &FeatureMatrix<f64>) -> Vec<Option<u8>> {
    let s = standardize(train);
    let tr = s.transform(train);
    let te = s.transform(test);
    let centroid = |c: u8| -> Vec<f64> {
        let members: Vec<&[f64]> = tr.rows.iter().zip(&tr.labels).filter(|(_, &l)| l == c).map(|(r, _)| r.values.as_slice()).collect();
        (0..tr.n_features())
            .map(|j| members.iter().map(|r| r[j]).sum::<f64>() / members.len() as f64)
            .collect()
    };
    let (c0, c1) = (centroid(0), centroid(1));
    let dist = |r: &[f64], c: &[f64]| r.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    te.rows
        .iter()
        .map(|r| {
            let (d0, d1) = (dist(&r.values, &c0), dist(&r.values, &c1));
            // near-ties are left undecided rather than compared across rounding
            ((d0 - d1).abs() > 1e-6 * (d0 + d1)).then(|| u8::from(d1 < d0))
        })
        .collect()
}

proptest! {
    #[test]
    fn scaling_round_trips(rows in rows_strategy()) {
        let x = matrix(rows);
        let s = standardize(&x);
        for r in &x.rows {
            let back = s.inverse_row(&s.transform_row(&r.values));
            for (a, b) in back.iter().zip(&r.values) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn nearest_centroid_ignores_positive_affine_maps(
        rows in rows_strategy(),
        test in prop::collection::vec(-100.0..100.0f64, 6),
        scale in prop::collection::vec(0.01..50.0f64, 6),
        shift in prop::collection::vec(-1e3..1e3f64, 6),
    ) {
        let d = rows[0].len();
        let train = matrix(rows);
        let probe = matrix(vec![test[..d].to_vec(), test[..d].iter().map(|v| -v).collect()]);
        let map = |x: &FeatureMatrix<f64>| {
            matrix(x.rows.iter().map(|r| r.values.iter().enumerate().map(|(j, &v)| scale[j] * v + shift[j]).collect()).collect())
        };
        let a = nearest_centroid(&train, &probe);
        let b = nearest_centroid(&map(&train), &map(&probe));
        for (p, q) in a.iter().zip(&b) {
            if let (Some(p), Some(q)) = (p, q) {
                prop_assert_eq!(p, q);
            }
        }
    }
}
