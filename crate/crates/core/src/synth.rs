// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic accelerometer-like records.
//!
//! Stable records are white Gaussian noise. Chatter records add a tone at the
//! configured chatter frequency (random phase, amplitude jittered by ±10%) and
//! a second harmonic at 30% of that amplitude. Every record is a pure function
//! of `(seed, chatter frequency, class, index)`.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    overhang_key, write_signal_csv, BinaryClass, CuttingConfig, LabeledDataset, ManifestEntry, RawLabel, TimeSeries,
};
use crate::error::{Error, SynthError};
use crate::seed::{self, Stream};
use crate::Scalar;

const HARMONIC_RATIO: f64 = 0.3;
const AMP_JITTER: f64 = 0.1;
const SPINDLE_RPM: f64 = 570.0;
const DEPTH_CM: f64 = 0.0127;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_per_class: usize,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub chatter_freq_hz: f64,
    pub chatter_amp: f64,
    pub noise_std: f64,
    pub seed: u64,
    /// Overhang metadata stamped on every record; it is also the group key.
    pub overhang_cm: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_per_class: 30,
            sample_rate_hz: 10_000.0,
            duration_s: 1.0,
            chatter_freq_hz: 800.0,
            chatter_amp: 1.0,
            noise_std: 0.25,
            seed: 0,
            overhang_cm: 5.08,
        }
    }
}

impl SynthSpec {
    /// The second default configuration: 1600 Hz chatter on an 11.43 cm
    /// overhang.
    pub fn config_b() -> Self {
        SynthSpec {
            chatter_freq_hz: 1600.0,
            overhang_cm: 11.43,
            ..Self::default()
        }
    }

    pub fn n_samples(&self) -> usize {
        (self.sample_rate_hz * self.duration_s).round() as usize
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Spec(m));
        if self.n_per_class == 0 {
            return bad("n_per_class must be positive".into());
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return bad(format!("sample rate {}", self.sample_rate_hz));
        }
        if self.n_samples() < 16 {
            return bad(format!("duration {} s gives fewer than 16 samples", self.duration_s));
        }
        if !(self.chatter_freq_hz > 0.0 && self.chatter_freq_hz < self.sample_rate_hz / 2.0) {
            return bad(format!(
                "chatter frequency {} Hz must lie in (0, {}) Hz",
                self.chatter_freq_hz,
                self.sample_rate_hz / 2.0
            ));
        }
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            return bad(format!("noise std {}", self.noise_std));
        }
        if !(self.chatter_amp > 3.0 * self.noise_std && self.chatter_amp.is_finite()) {
            return bad(format!(
                "chatter amplitude {} must exceed 3 x noise std {}",
                self.chatter_amp, self.noise_std
            ));
        }
        if !(self.overhang_cm > 0.0 && self.overhang_cm.is_finite()) {
            return bad(format!("overhang {} cm", self.overhang_cm));
        }
        Ok(())
    }

    fn record_id(&self, class: BinaryClass, index: usize) -> String {
        let tag = if class == 1 { "chatter" } else { "stable" };
        format!("synth-{}-{tag}-{index:03}", overhang_key(self.overhang_cm))
    }
}

/// One record. Callers are expected to pass a validated spec.
pub fn make_signal<T: Scalar>(class: BinaryClass, spec: &SynthSpec, index: usize) -> TimeSeries<T> {
    // the chatter frequency keys the configuration, so two configurations
    // sharing a seed still draw independent noise
    let config = seed::derive(spec.seed, Stream::Synth, spec.chatter_freq_hz.to_bits());
    let s = seed::derive(seed::derive(config, Stream::Synth, u64::from(class)), Stream::Synth, index as u64);
    let mut rng = seed::rng(s);
    let n = spec.n_samples();
    let noise = Normal::new(0.0, spec.noise_std).expect("noise std validated");
    let mut x: Vec<f64> = (0..n).map(|_| noise.sample(&mut rng)).collect();
    if class == 1 {
        let amp = spec.chatter_amp * rng.random_range(1.0 - AMP_JITTER..=1.0 + AMP_JITTER);
        let phase = rng.random_range(0.0..TAU);
        let phase2 = rng.random_range(0.0..TAU);
        let w = TAU * spec.chatter_freq_hz / spec.sample_rate_hz;
        for (i, v) in x.iter_mut().enumerate() {
            let t = i as f64;
            *v += amp * (w * t + phase).sin() + HARMONIC_RATIO * amp * (2.0 * w * t + phase2).sin();
        }
    }
    TimeSeries {
        samples: x.into_iter().map(T::of).collect(),
        sample_rate_hz: spec.sample_rate_hz,
        config: CuttingConfig {
            overhang_cm: spec.overhang_cm,
            spindle_rpm: SPINDLE_RPM,
            depth_of_cut_cm: DEPTH_CM,
            config_id: spec.record_id(class, index),
        },
        label: if class == 1 { RawLabel::Chatter } else { RawLabel::Stable },
    }
}

/// `n_per_class` stable then `n_per_class` chatter records of one spec.
pub fn make_config<T: Scalar>(spec: &SynthSpec) -> Result<Vec<TimeSeries<T>>, SynthError> {
    spec.validate()?;
    let jobs: Vec<(BinaryClass, usize)> =
        [0u8, 1].iter().flat_map(|&c| (0..spec.n_per_class).map(move |i| (c, i))).collect();
    Ok(jobs.par_iter().map(|&(c, i)| make_signal(c, spec, i)).collect())
}

/// Two configurations in one dataset, A's records first.
pub fn make_dataset<T: Scalar>(a: &SynthSpec, b: &SynthSpec) -> Result<LabeledDataset<T>, SynthError> {
    if a.chatter_freq_hz == b.chatter_freq_hz {
        return Err(SynthError::Spec(format!(
            "both configurations use chatter frequency {} Hz",
            a.chatter_freq_hz
        )));
    }
    if overhang_key(a.overhang_cm) == overhang_key(b.overhang_cm) {
        return Err(SynthError::Spec(format!("both configurations use overhang {} cm", a.overhang_cm)));
    }
    let mut records = make_config(a)?;
    records.extend(make_config(b)?);
    Ok(LabeledDataset {
        records,
        manifest_path: None,
    })
}

/// Writes one CSV per record and `manifest.json` into `dir`; returns the
/// manifest path.
pub fn write_dataset<T: Scalar>(ds: &LabeledDataset<T>, dir: &Path) -> Result<PathBuf, Error> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    ds.records.par_iter().try_for_each(|r| {
        let p = dir.join(format!("{}.csv", r.config.config_id));
        write_signal_csv(&p, &r.samples).map_err(io(&p))
    })?;
    let entries: Vec<ManifestEntry> = ds
        .records
        .iter()
        .map(|r| ManifestEntry {
            file: format!("{}.csv", r.config.config_id),
            sample_rate_hz: r.sample_rate_hz,
            overhang_cm: r.config.overhang_cm,
            rpm: r.config.spindle_rpm,
            depth_cm: r.config.depth_of_cut_cm,
            label: r.label.as_str().to_string(),
            config_id: Some(r.config.config_id.clone()),
        })
        .collect();
    let manifest = dir.join("manifest.json");
    let mut body = serde_json::to_string_pretty(&entries)?;
    body.push('\n');
    crate::evaluate::write_atomic(&manifest, body.as_bytes())?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{load_manifest, split_by_config};

    #[test]
    fn deterministic_per_key() {
        let spec = SynthSpec::default();
        let a: TimeSeries<f64> = make_signal(1, &spec, 4);
        let b: TimeSeries<f64> = make_signal(1, &spec, 4);
        assert_eq!(a, b);
        let c: TimeSeries<f64> = make_signal(1, &spec, 5);
        assert_ne!(a.samples, c.samples);
        let d: TimeSeries<f64> = make_signal(0, &spec, 4);
        assert_ne!(a.samples, d.samples);
    }

    #[test]
    fn default_pair_has_120_balanced_records() {
        let ds: LabeledDataset<f64> = make_dataset(&SynthSpec::default(), &SynthSpec::config_b()).unwrap();
        assert_eq!(ds.len(), 120);
        let groups = split_by_config(&ds);
        assert_eq!(groups.len(), 2);
        for g in groups.values() {
            let ones = g.records.iter().filter(|r| r.binary_label() == Some(1)).count();
            assert_eq!(ones * 2, g.len());
        }
    }

    #[test]
    fn spec_validation() {
        let mut s = SynthSpec::default();
        s.chatter_freq_hz = 5000.0;
        assert!(s.validate().is_err());
        let mut s = SynthSpec::default();
        s.chatter_amp = 0.75;
        assert!(s.validate().is_err());
        assert!(make_dataset::<f64>(&SynthSpec::default(), &SynthSpec::default()).is_err());
    }

    #[test]
    fn written_dataset_loads_back_identically() {
        let dir = tempfile::tempdir().unwrap();
        let a = SynthSpec {
            n_per_class: 2,
            duration_s: 0.05,
            ..SynthSpec::default()
        };
        let b = SynthSpec {
            n_per_class: 2,
            duration_s: 0.05,
            ..SynthSpec::config_b()
        };
        let ds: LabeledDataset<f64> = make_dataset(&a, &b).unwrap();
        let m = write_dataset(&ds, dir.path()).unwrap();
        let back: LabeledDataset<f64> = load_manifest(&m).unwrap();
        assert_eq!(back.records, ds.records);
    }
}
