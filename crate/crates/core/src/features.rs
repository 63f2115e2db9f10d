// SPDX-License-Identifier: MIT OR Apache-2.0

//! Peak-coordinate feature vectors and labeled feature matrices.
//!
//! A vector holds `(x, y)` of the first `n_peaks` peaks of each transform, in
//! FFT, PSD, ACF order, interleaved per peak: `fft_p1_x, fft_p1_y, fft_p2_x, …`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{BinaryClass, LabeledDataset, TimeSeries};
use crate::error::FeatureError;
use crate::peaks::{self, find_peaks, PeakConstraints};
use crate::transform::{self, SequenceKind, WelchConfig};
use crate::Scalar;

/// Everything that determines a feature vector besides the signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub n_peaks: usize,
    pub alpha: f64,
    pub mpd_fft: usize,
    pub mpd_psd: usize,
    pub mpd_acf: usize,
    /// ACF lag cap; `None` uses [`transform::default_max_lag`].
    pub max_lag: Option<usize>,
    pub welch: WelchConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig::new(2, peaks::DEFAULT_ALPHA)
    }
}

impl FeatureConfig {
    pub fn new(n_peaks: usize, alpha: f64) -> Self {
        FeatureConfig {
            n_peaks,
            alpha,
            mpd_fft: peaks::DEFAULT_MPD_FFT,
            mpd_psd: peaks::DEFAULT_MPD_PSD,
            mpd_acf: peaks::DEFAULT_MPD_ACF,
            max_lag: None,
            welch: WelchConfig::default(),
        }
    }

    pub fn constraints(&self, kind: SequenceKind) -> PeakConstraints {
        let mpd = match kind {
            SequenceKind::Fft => self.mpd_fft,
            SequenceKind::Psd => self.mpd_psd,
            SequenceKind::Acf => self.mpd_acf,
        };
        PeakConstraints {
            alpha: self.alpha,
            mpd,
            n_peaks: self.n_peaks,
        }
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        self.constraints(SequenceKind::Fft)
            .validate()
            .map_err(FeatureError::Params)
    }

    pub fn width(&self) -> usize {
        6 * self.n_peaks
    }
}

/// Column names for `n_peaks` peaks per transform.
pub fn feature_names(n_peaks: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(6 * n_peaks);
    for kind in SequenceKind::ALL {
        for p in 1..=n_peaks {
            names.push(format!("{}_p{p}_x", kind.tag()));
            names.push(format!("{}_p{p}_y", kind.tag()));
        }
    }
    names
}

/// Where a row came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowSource {
    pub record_id: String,
    /// Overhang group key of the record.
    pub group: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<T> {
    pub values: Vec<T>,
    pub n_peaks: usize,
    pub source: RowSource,
}

pub fn extract_features<T: Scalar>(
    ts: &TimeSeries<T>,
    cfg: &FeatureConfig,
) -> Result<FeatureVector<T>, FeatureError> {
    cfg.validate()?;
    let max_lag = cfg
        .max_lag
        .unwrap_or_else(|| transform::default_max_lag(ts.len()));
    let seqs = [
        transform::amplitude_spectrum(ts)?,
        transform::power_spectral_density(ts, &cfg.welch)?,
        transform::autocorrelation(ts, max_lag)?,
    ];
    let mut values = Vec::with_capacity(cfg.width());
    for seq in &seqs {
        let found = find_peaks(seq, &cfg.constraints(seq.kind));
        if found.len() < cfg.n_peaks {
            return Err(FeatureError::PeakShortfall {
                kind: seq.kind,
                found: found.len(),
                needed: cfg.n_peaks,
            });
        }
        for p in found {
            values.push(p.x);
            values.push(p.y);
        }
    }
    Ok(FeatureVector {
        values,
        n_peaks: cfg.n_peaks,
        source: RowSource {
            record_id: ts.config.config_id.clone(),
            group: ts.config.group_key(),
        },
    })
}

/// Rows, binary labels and column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix<T> {
    pub rows: Vec<FeatureVector<T>>,
    pub labels: Vec<BinaryClass>,
    pub feature_names: Vec<String>,
}

impl<T: Scalar> FeatureMatrix<T> {
    /// Builds a matrix from bare rows; sources are numbered `row{i}` in `group`.
    pub fn from_rows(
        values: Vec<Vec<T>>,
        labels: Vec<BinaryClass>,
        feature_names: Vec<String>,
        group: &str,
    ) -> Self {
        assert_eq!(values.len(), labels.len(), "one label per row");
        assert!(
            values.iter().all(|r| r.len() == feature_names.len()),
            "row width must equal the number of names"
        );
        let rows = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| FeatureVector {
                n_peaks: v.len() / 6,
                values: v,
                source: RowSource {
                    record_id: format!("row{i}"),
                    group: group.to_string(),
                },
            })
            .collect();
        FeatureMatrix {
            rows,
            labels,
            feature_names,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i].values
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.rows.iter().map(|r| r.values[j]).collect()
    }

    /// `[stable, chatter]` counts.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }

    /// Keeps the listed columns in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        FeatureMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| FeatureVector {
                    values: cols.iter().map(|&c| r.values[c]).collect(),
                    n_peaks: r.n_peaks,
                    source: r.source.clone(),
                })
                .collect(),
            labels: self.labels.clone(),
            feature_names: cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        FeatureMatrix {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Distinct group keys in first-appearance order.
    pub fn groups(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.source.group) {
                out.push(r.source.group.clone());
            }
        }
        out
    }

    /// CSV with the feature names, then `label` and `config_id`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut s = self.feature_names.join(",");
        s.push_str(",label,config_id\n");
        for (r, l) in self.rows.iter().zip(&self.labels) {
            for v in &r.values {
                let _ = write!(s, "{},", v.as_f64());
            }
            let _ = writeln!(s, "{l},{}", r.source.record_id);
        }
        s
    }
}

/// A record left out of a matrix, and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub record_id: String,
    pub reason: String,
}

/// One row per learnable record in dataset order. Records tagged `Unknown`
/// and records whose transforms yield too few peaks are reported instead.
pub fn build_matrix<T: Scalar>(
    ds: &LabeledDataset<T>,
    cfg: &FeatureConfig,
) -> Result<(FeatureMatrix<T>, Vec<Exclusion>), FeatureError> {
    cfg.validate()?;
    let outcomes: Vec<Result<(FeatureVector<T>, BinaryClass), Exclusion>> = ds
        .records
        .par_iter()
        .map(|rec| {
            let id = rec.config.config_id.clone();
            let Some(label) = rec.binary_label() else {
                return Ok(Err(Exclusion {
                    record_id: id,
                    reason: "unknown label".into(),
                }));
            };
            match extract_features(rec, cfg) {
                Ok(v) => Ok(Ok((v, label))),
                Err(e @ FeatureError::PeakShortfall { .. }) => Ok(Err(Exclusion {
                    record_id: id,
                    reason: e.to_string(),
                })),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, FeatureError>>()?;

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut excluded = Vec::new();
    for o in outcomes {
        match o {
            Ok((v, l)) => {
                rows.push(v);
                labels.push(l);
            }
            Err(x) => excluded.push(x),
        }
    }
    if rows.is_empty() {
        return Err(FeatureError::NoRows {
            excluded: excluded.len(),
        });
    }
    Ok((
        FeatureMatrix {
            rows,
            labels,
            feature_names: feature_names(cfg.n_peaks),
        },
        excluded,
    ))
}

/// Per-column standardization fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler<T> {
    pub mean: Vec<T>,
    /// Population standard deviation; 1 for constant columns.
    pub scale: Vec<T>,
}

/// Fits a [`Scaler`] on the rows of `train`.
pub fn standardize<T: Scalar>(train: &FeatureMatrix<T>) -> Scaler<T> {
    Scaler::fit((0..train.n_rows()).map(|i| train.row(i)), train.n_features())
}

impl<T: Scalar> Scaler<T> {
    pub fn fit<'a>(rows: impl Iterator<Item = &'a [T]> + Clone, width: usize) -> Self {
        let n = rows.clone().count();
        assert!(n > 0, "cannot fit a scaler on zero rows");
        let mut mean = vec![T::zero(); width];
        let mut scale = vec![T::one(); width];
        let n_t = T::of_usize(n);
        for j in 0..width {
            let (lo, hi) = rows
                .clone()
                .map(|r| r[j])
                .fold((T::infinity(), T::neg_infinity()), |(a, b), v| (a.min(v), b.max(v)));
            if lo == hi {
                mean[j] = lo;
                continue;
            }
            let m = rows.clone().map(|r| r[j]).sum::<T>() / n_t;
            let var = rows.clone().map(|r| (r[j] - m) * (r[j] - m)).sum::<T>() / n_t;
            mean[j] = m;
            if var > T::zero() {
                scale[j] = var.sqrt();
            }
        }
        Scaler { mean, scale }
    }

    pub fn transform_row(&self, row: &[T]) -> Vec<T> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }

    pub fn inverse_row(&self, row: &[T]) -> Vec<T> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(&v, (&m, &s))| v * s + m)
            .collect()
    }

    pub fn transform(&self, x: &FeatureMatrix<T>) -> FeatureMatrix<T> {
        let mut out = x.clone();
        for r in &mut out.rows {
            r.values = self.transform_row(&r.values);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_for_two_peaks() {
        let expected = [
            "fft_p1_x", "fft_p1_y", "fft_p2_x", "fft_p2_y", "psd_p1_x", "psd_p1_y", "psd_p2_x",
            "psd_p2_y", "acf_p1_x", "acf_p1_y", "acf_p2_x", "acf_p2_y",
        ];
        assert_eq!(feature_names(2), expected);
        assert_eq!(feature_names(5).len(), 30);
    }

    fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix<f64> {
        let w = rows[0].len();
        let n = rows.len();
        FeatureMatrix::from_rows(
            rows,
            (0..n).map(|i| (i % 2) as u8).collect(),
            (0..w).map(|j| format!("f{j}")).collect(),
            "g",
        )
    }

    #[test]
    fn scaler_moments_and_constant_column() {
        let x = matrix(vec![
            vec![1.0, 7.0, 100.0],
            vec![2.0, 7.0, -3.0],
            vec![4.0, 7.0, 0.5],
            vec![8.0, 7.0, 2.0],
        ]);
        let s = standardize(&x);
        let z = s.transform(&x);
        for j in 0..3 {
            let c = z.column(j);
            let m = c.iter().sum::<f64>() / 4.0;
            assert!(m.abs() < 1e-9);
            if j == 1 {
                assert!(c.iter().all(|&v| v == 0.0));
            } else {
                let sd = (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 4.0).sqrt();
                assert!((sd - 1.0).abs() < 1e-9);
            }
        }
        for i in 0..4 {
            let back = s.inverse_row(z.row(i));
            for (a, b) in back.iter().zip(x.row(i)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scaler_uses_train_statistics() {
        let train = matrix(vec![vec![0.0], vec![2.0]]);
        let test = matrix(vec![vec![10.0], vec![20.0]]);
        let s = standardize(&train);
        assert_eq!(s.transform(&test).row(0), &[9.0]);
        assert_eq!(s.transform(&test).row(1), &[19.0]);
    }

    #[test]
    fn select_columns_and_rows() {
        let x = matrix(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]]);
        let c = x.select_columns(&[2, 0]);
        assert_eq!(c.feature_names, vec!["f2", "f0"]);
        assert_eq!(c.row(1), &[6.0, 4.0]);
        let r = x.select_rows(&[2, 0]);
        assert_eq!(r.labels, vec![0, 0]);
        assert_eq!(r.row(0), &[7.0, 8.0, 9.0]);
        assert_eq!(x.class_counts(), [2, 1]);
    }
}
