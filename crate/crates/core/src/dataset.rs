// SPDX-License-Identifier: MIT OR Apache-2.0

//! Labeled accelerometer recordings and their cutting-configuration metadata.
//!
//! A manifest is a JSON array; each entry names a single-column CSV signal
//! file (resolved relative to the manifest) plus the sample rate, overhang
//! length, spindle speed, depth of cut and a raw label:
//!
//! ```json
//! [{"file": "s01.csv", "sample_rate_hz": 10000, "overhang_cm": 5.08,
//!   "rpm": 570, "depth_cm": 0.0127, "label": "chatter"}]
//! ```
//!
//! An optional `config_id` key names the entry; it defaults to the file path
//! as written in the manifest and must be unique.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::LoadError;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuttingConfig {
    pub overhang_cm: f64,
    pub spindle_rpm: f64,
    pub depth_of_cut_cm: f64,
    pub config_id: String,
}

impl CuttingConfig {
    /// Key of the overhang group this record belongs to, e.g. `"5.08"`.
    pub fn group_key(&self) -> String {
        overhang_key(self.overhang_cm)
    }
}

/// Canonical text form of an overhang length in cm.
pub fn overhang_key(overhang_cm: f64) -> String {
    format!("{overhang_cm}")
}

/// The four-way tag assigned to each recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RawLabel {
    Stable,
    Intermediate,
    Chatter,
    Unknown,
}

impl RawLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RawLabel::Stable => "stable",
            RawLabel::Intermediate => "intermediate",
            RawLabel::Chatter => "chatter",
            RawLabel::Unknown => "unknown",
        }
    }
}

impl fmt::Display for RawLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RawLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stable" => Ok(RawLabel::Stable),
            "intermediate" => Ok(RawLabel::Intermediate),
            "chatter" => Ok(RawLabel::Chatter),
            "unknown" => Ok(RawLabel::Unknown),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Binary class: 0 = stable, 1 = chatter.
pub type BinaryClass = u8;

pub const STABLE: BinaryClass = 0;
pub const CHATTER: BinaryClass = 1;

/// Collapses the four-way tag to the binary task. Mild (intermediate) chatter
/// counts as chatter; `None` marks a record excluded from learning.
pub fn to_binary(label: RawLabel) -> Option<BinaryClass> {
    match label {
        RawLabel::Stable => Some(STABLE),
        RawLabel::Intermediate | RawLabel::Chatter => Some(CHATTER),
        RawLabel::Unknown => None,
    }
}

/// Uniformly sampled acceleration record (m/s²).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    pub samples: Vec<T>,
    pub sample_rate_hz: f64,
    pub config: CuttingConfig,
    pub label: RawLabel,
}

impl<T: Scalar> TimeSeries<T> {
    /// A record with placeholder metadata, for transforms on bare signals.
    pub fn from_samples(samples: Vec<T>, sample_rate_hz: f64) -> Self {
        TimeSeries {
            samples,
            sample_rate_hz,
            config: CuttingConfig {
                overhang_cm: 1.0,
                spindle_rpm: 1.0,
                depth_of_cut_cm: 1.0,
                config_id: String::from("anonymous"),
            },
            label: RawLabel::Unknown,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn binary_label(&self) -> Option<BinaryClass> {
        to_binary(self.label)
    }

    /// Same metadata, new samples and rate.
    pub fn with_samples(&self, samples: Vec<T>, sample_rate_hz: f64) -> Self {
        TimeSeries {
            samples,
            sample_rate_hz,
            config: self.config.clone(),
            label: self.label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T> {
    pub records: Vec<TimeSeries<T>>,
    pub manifest_path: Option<PathBuf>,
}

impl<T: Scalar> LabeledDataset<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records whose label maps to a binary class.
    pub fn learnable(&self) -> impl Iterator<Item = &TimeSeries<T>> {
        self.records.iter().filter(|r| r.binary_label().is_some())
    }

    pub fn learnable_len(&self) -> usize {
        self.learnable().count()
    }

    /// Records tagged `Unknown`, retained for auditing only.
    pub fn excluded_ids(&self) -> Vec<&str> {
        self.records
            .iter()
            .filter(|r| r.binary_label().is_none())
            .map(|r| r.config.config_id.as_str())
            .collect()
    }
}

/// Partitions by overhang length. Groups left with no learnable record are
/// still returned; check [`LabeledDataset::learnable_len`].
pub fn split_by_config<T: Scalar>(ds: &LabeledDataset<T>) -> BTreeMap<String, LabeledDataset<T>> {
    let mut groups: BTreeMap<String, LabeledDataset<T>> = BTreeMap::new();
    for rec in &ds.records {
        groups
            .entry(rec.config.group_key())
            .or_insert_with(|| LabeledDataset {
                records: Vec::new(),
                manifest_path: ds.manifest_path.clone(),
            })
            .records
            .push(rec.clone());
    }
    groups
}

/// One manifest entry as it appears on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub file: String,
    pub sample_rate_hz: f64,
    pub overhang_cm: f64,
    pub rpm: f64,
    pub depth_cm: f64,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_id: Option<String>,
}

pub fn load_manifest<T: Scalar>(path: impl AsRef<Path>) -> Result<LabeledDataset<T>, LoadError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let entries: Vec<ManifestEntry> =
        serde_json::from_slice(&bytes).map_err(|e| LoadError::Manifest {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));

    let mut seen = HashSet::new();
    let mut validated = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        let id = e.config_id.clone().unwrap_or_else(|| e.file.clone());
        if !seen.insert(id.clone()) {
            return Err(LoadError::DuplicateId { entry: i, id });
        }
        let bad = |reason: String| LoadError::Entry {
            entry: i,
            id: id.clone(),
            reason,
        };
        for (name, v) in [
            ("sample_rate_hz", e.sample_rate_hz),
            ("overhang_cm", e.overhang_cm),
            ("rpm", e.rpm),
            ("depth_cm", e.depth_cm),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let label: RawLabel = e.label.parse().map_err(bad)?;
        let file = base.join(&e.file);
        if !file.is_file() {
            return Err(LoadError::MissingSignal { entry: i, file });
        }
        let config = CuttingConfig {
            overhang_cm: e.overhang_cm,
            spindle_rpm: e.rpm,
            depth_of_cut_cm: e.depth_cm,
            config_id: id,
        };
        validated.push((i, file, config, label, e.sample_rate_hz));
    }

    let records = validated
        .into_par_iter()
        .map(|(i, file, config, label, rate)| {
            let samples = read_signal_csv(&file).map_err(|(line, reason)| match line {
                0 => LoadError::Entry {
                    entry: i,
                    id: config.config_id.clone(),
                    reason: format!("{}: {reason}", file.display()),
                },
                _ => LoadError::Sample {
                    entry: i,
                    id: config.config_id.clone(),
                    file: file.clone(),
                    line,
                    reason,
                },
            })?;
            Ok(TimeSeries {
                samples,
                sample_rate_hz: rate,
                config,
                label,
            })
        })
        .collect::<Result<Vec<_>, LoadError>>()?;

    Ok(LabeledDataset {
        records,
        manifest_path: Some(path.to_path_buf()),
    })
}

/// Parses a one-value-per-line signal file. A non-numeric first line is taken
/// as a header. Errors carry the 1-based line number (0 for whole-file errors).
fn read_signal_csv<T: Scalar>(path: &Path) -> Result<Vec<T>, (usize, String)> {
    let text = fs::read_to_string(path).map_err(|e| (0, e.to_string()))?;
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(T::of(v)),
            Ok(v) => return Err((n + 1, format!("non-finite sample {v}"))),
            Err(_) if n == 0 => continue,
            Err(_) => return Err((n + 1, format!("not a number: {line:?}"))),
        }
    }
    if out.is_empty() {
        return Err((0, "no samples".into()));
    }
    Ok(out)
}

/// Writes samples one per line with a `acceleration` header.
pub fn write_signal_csv<T: Scalar>(path: &Path, samples: &[T]) -> std::io::Result<()> {
    use std::fmt::Write as _;
    let mut s = String::with_capacity(samples.len() * 24 + 16);
    s.push_str("acceleration\n");
    for v in samples {
        let _ = writeln!(s, "{}", v.as_f64());
    }
    fs::write(path, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_manifest(dir: &Path, entries: &str) -> PathBuf {
        let p = dir.join("manifest.json");
        fs::write(&p, entries).unwrap();
        p
    }

    fn entry(file: &str, label: &str, overhang: f64) -> String {
        format!(
            r#"{{"file":"{file}","sample_rate_hz":10000,"overhang_cm":{overhang},"rpm":570,"depth_cm":0.0127,"label":"{label}"}}"#
        )
    }

    #[test]
    fn loads_three_records_with_rate() {
        let dir = tempfile::tempdir().unwrap();
        for f in ["a.csv", "b.csv", "c.csv"] {
            fs::write(dir.path().join(f), "acc\n0.1\n-0.2\n0.3\n").unwrap();
        }
        let m = write_manifest(
            dir.path(),
            &format!(
                "[{},{},{}]",
                entry("a.csv", "chatter", 5.08),
                entry("b.csv", "Chatter", 5.08),
                entry("c.csv", "STABLE", 11.43)
            ),
        );
        let ds: LabeledDataset<f64> = load_manifest(&m).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.records[0].sample_rate_hz, 10_000.0);
        assert_eq!(ds.records[0].samples, vec![0.1, -0.2, 0.3]);
        assert_eq!(ds.records[2].label, RawLabel::Stable);
        assert_eq!(ds.records[1].config.config_id, "b.csv");
    }

    #[test]
    fn missing_file_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let m = write_manifest(dir.path(), &format!("[{}]", entry("absent.csv", "stable", 5.08)));
        let err = load_manifest::<f64>(&m).unwrap_err();
        assert!(matches!(err, LoadError::MissingSignal { entry: 0, .. }));
        assert!(err.to_string().contains("absent.csv"));
    }

    #[test]
    fn rejects_duplicates_nonfinite_and_bad_labels() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.csv"), "1\n2\n").unwrap();
        fs::write(dir.path().join("nan.csv"), "1\nNaN\n").unwrap();

        let m = write_manifest(
            dir.path(),
            &format!("[{},{}]", entry("a.csv", "stable", 5.08), entry("a.csv", "stable", 5.08)),
        );
        assert!(matches!(
            load_manifest::<f64>(&m).unwrap_err(),
            LoadError::DuplicateId { entry: 1, .. }
        ));

        let m = write_manifest(dir.path(), &format!("[{}]", entry("nan.csv", "stable", 5.08)));
        let err = load_manifest::<f64>(&m).unwrap_err();
        assert!(matches!(err, LoadError::Sample { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("nan.csv"));

        let m = write_manifest(dir.path(), &format!("[{}]", entry("a.csv", "wobbly", 5.08)));
        assert!(matches!(load_manifest::<f64>(&m).unwrap_err(), LoadError::Entry { .. }));

        let m = write_manifest(dir.path(), &format!("[{}]", entry("a.csv", "stable", -1.0)));
        assert!(matches!(load_manifest::<f64>(&m).unwrap_err(), LoadError::Entry { .. }));

        let m = write_manifest(dir.path(), "{not json");
        assert!(matches!(load_manifest::<f64>(&m).unwrap_err(), LoadError::Manifest { .. }));
    }

    #[test]
    fn binary_mapping() {
        assert_eq!(to_binary(RawLabel::Stable), Some(0));
        assert_eq!(to_binary(RawLabel::Intermediate), Some(1));
        assert_eq!(to_binary(RawLabel::Chatter), Some(1));
        assert_eq!(to_binary(RawLabel::Unknown), None);
        for l in [RawLabel::Stable, RawLabel::Intermediate, RawLabel::Chatter] {
            let b = to_binary(l).unwrap();
            let back = if b == 1 { RawLabel::Chatter } else { RawLabel::Stable };
            assert_eq!(to_binary(back), Some(b));
        }
    }

    fn rec(overhang: f64, label: RawLabel, id: &str) -> TimeSeries<f64> {
        TimeSeries {
            samples: vec![0.0; 4],
            sample_rate_hz: 10_000.0,
            config: CuttingConfig {
                overhang_cm: overhang,
                spindle_rpm: 570.0,
                depth_of_cut_cm: 0.01,
                config_id: id.into(),
            },
            label,
        }
    }

    #[test]
    fn partition_by_overhang() {
        let ds = LabeledDataset {
            records: vec![
                rec(5.08, RawLabel::Chatter, "a"),
                rec(5.08, RawLabel::Stable, "b"),
                rec(11.43, RawLabel::Unknown, "c"),
            ],
            manifest_path: None,
        };
        let g = split_by_config(&ds);
        assert_eq!(g.len(), 2);
        assert_eq!(g["5.08"].len(), 2);
        assert_eq!(g["11.43"].len(), 1);
        assert_eq!(g["11.43"].learnable_len(), 0);
        assert_eq!(g.values().map(|d| d.len()).sum::<usize>(), ds.len());

        let four = LabeledDataset {
            records: [5.08, 6.35, 8.89, 11.43]
                .iter()
                .enumerate()
                .map(|(i, &o)| rec(o, RawLabel::Stable, &i.to_string()))
                .collect(),
            manifest_path: None,
        };
        assert_eq!(split_by_config(&four).len(), 4);
    }
}
