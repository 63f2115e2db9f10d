// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

use crate::transform::SequenceKind;

/// Failures while reading a manifest or the signal files it references.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },
    #[error("entry {entry} ({id}): {reason}")]
    Entry {
        entry: usize,
        id: String,
        reason: String,
    },
    #[error("entry {entry}: signal file {file} does not exist")]
    MissingSignal { entry: usize, file: PathBuf },
    #[error("entry {entry}: duplicate config_id {id:?}")]
    DuplicateId { entry: usize, id: String },
    #[error("entry {entry} ({id}): {file} line {line}: {reason}")]
    Sample {
        entry: usize,
        id: String,
        file: PathBuf,
        line: usize,
        reason: String,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("cutoff {cutoff_hz} Hz must lie strictly between 0 and Nyquist ({nyquist_hz} Hz)")]
    Cutoff { cutoff_hz: f64, nyquist_hz: f64 },
    #[error("filter order must be even and at least 2, got {0}")]
    Order(usize),
    #[error("stage {stage} is unstable (pole radius {radius})")]
    UnstableStage { stage: usize, radius: f64 },
    #[error("non-finite value produced by stage {stage} at sample {sample}")]
    NonFinite { stage: usize, sample: usize },
    #[error("source rate {source_hz} Hz is not an integer multiple of target rate {target_hz} Hz")]
    DecimationFactor { source_hz: f64, target_hz: f64 },
    #[error("empty signal")]
    Empty,
}

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("{kind} needs at least {needed} samples, got {got}")]
    TooShort {
        kind: SequenceKind,
        needed: usize,
        got: usize,
    },
    #[error("max_lag {max_lag} out of range for {len} samples")]
    MaxLag { max_lag: usize, len: usize },
    #[error("invalid Welch configuration: {0}")]
    Welch(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("{kind} produced {found} peaks, {needed} required")]
    PeakShortfall {
        kind: SequenceKind,
        found: usize,
        needed: usize,
    },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error("no usable rows ({excluded} excluded)")]
    NoRows { excluded: usize },
    #[error("invalid peak parameters: {0}")]
    Params(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("training data needs both classes (got only class {0})")]
    SingleClass(u8),
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("non-finite feature at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("row width {got} does not match model width {expected}")]
    Width { expected: usize, got: usize },
    #[error("invalid hyperparameter: {0}")]
    Hyper(String),
    #[error("model file: {0}")]
    Format(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("could not draw a split with both classes in the training part after {0} attempts")]
    DegenerateSplit(usize),
    #[error("{k} folds requested for {rows} rows")]
    Folds { k: usize, rows: usize },
    #[error("fold {fold}: training part is single-class")]
    FoldSingleClass { fold: usize },
    #[error("feature layouts differ between source and target")]
    LayoutMismatch,
    #[error("invalid protocol: {0}")]
    Protocol(String),
    #[error("no repetition carried a feature selection")]
    NoSelections,
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid spec: {0}")]
    Spec(String),
}

/// Crate-level error; the display form is prefixed with the owning module.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset: {0}")]
    Load(#[from] LoadError),
    #[error("preprocess: {0}")]
    Preprocess(#[from] PreprocessError),
    #[error("transform: {0}")]
    Transform(#[from] TransformError),
    #[error("featurize: {0}")]
    Feature(#[from] FeatureError),
    #[error("learn: {0}")]
    Learn(#[from] LearnError),
    #[error("evaluate: {0}")]
    Eval(#[from] EvalError),
    #[error("synthgen: {0}")]
    Synth(#[from] SynthError),
    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
