// SPDX-License-Identifier: MIT OR Apache-2.0

//! Chatter detection for turning operations from accelerometer signals.
//!
//! The pipeline decimates each record, computes its amplitude spectrum, power
//! spectral density and autocorrelation, keeps the coordinates of the most
//! prominent peaks of each as features, ranks those features by recursive
//! elimination and trains one of four classifiers. [`evaluate`] runs the
//! repeated-split, k-fold and cross-configuration protocols on top.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*F64` and
//! `*F32` aliases below name the common instantiations.

pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod features;
pub mod learn;
pub mod peaks;
pub mod preprocess;
pub mod rfe;
mod scalar;
pub mod seed;
pub mod synth;
pub mod transform;

pub use dataset::{load_manifest, split_by_config, BinaryClass, CuttingConfig, LabeledDataset, RawLabel, TimeSeries};
pub use error::{Error, Result};
pub use evaluate::{kfold_cv, repeated_split_eval, transfer_eval, EvalResult, Protocol, TransferResult};
pub use features::{build_matrix, extract_features, FeatureConfig, FeatureMatrix, FeatureVector, Scaler};
pub use learn::{fit, ClassifierKind, Model};
pub use peaks::{find_peaks, Peak, PeakConstraints};
pub use preprocess::{decimate, design_butterworth_lowpass, DecimationConfig, FilterSpec};
pub use rfe::{rank_features, select_best_k, Ranking};
pub use scalar::Scalar;
pub use synth::SynthSpec;
pub use transform::{IndexedSequence, SequenceKind};

pub type TimeSeriesF64 = TimeSeries<f64>;
pub type TimeSeriesF32 = TimeSeries<f32>;
pub type LabeledDatasetF64 = LabeledDataset<f64>;
pub type LabeledDatasetF32 = LabeledDataset<f32>;
pub type IndexedSequenceF64 = IndexedSequence<f64>;
pub type FilterSpecF64 = FilterSpec<f64>;
pub type FeatureMatrixF64 = FeatureMatrix<f64>;
pub type FeatureMatrixF32 = FeatureMatrix<f32>;
pub type ModelF64 = Model<f64>;
pub type ModelF32 = Model<f32>;

/// Decimates every record to `target_rate_hz`, in parallel, keeping order.
pub fn decimate_dataset<T: Scalar>(
    ds: &LabeledDataset<T>,
    target_rate_hz: f64,
    cfg: &DecimationConfig,
) -> std::result::Result<LabeledDataset<T>, error::PreprocessError> {
    use rayon::prelude::*;
    let records = ds
        .records
        .par_iter()
        .map(|r| decimate(r, target_rate_hz, cfg))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(LabeledDataset {
        records,
        manifest_path: ds.manifest_path.clone(),
    })
}
