// SPDX-License-Identifier: MIT OR Apache-2.0

//! Constrained peak picking: a minimum peak height derived from the 5th and
//! 95th percentiles, and a minimum index distance between accepted peaks.

use serde::{Deserialize, Serialize};

use crate::transform::{IndexedSequence, SequenceKind};
use crate::Scalar;

/// Default α in `MPH = p5 + α·(p95 − p5)`.
pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_MPD_FFT: usize = 500;
pub const DEFAULT_MPD_PSD: usize = 0;
pub const DEFAULT_MPD_ACF: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakConstraints {
    pub alpha: f64,
    /// Minimum index distance between two accepted peaks.
    pub mpd: usize,
    pub n_peaks: usize,
}

impl PeakConstraints {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if self.n_peaks == 0 {
            return Err("n_peaks must be at least 1".into());
        }
        Ok(())
    }
}

/// Per-transform distance constraints, with `alpha` and `n_peaks` filled in
/// from the defaults.
pub fn kind_defaults(kind: SequenceKind) -> PeakConstraints {
    let mpd = match kind {
        SequenceKind::Fft => DEFAULT_MPD_FFT,
        SequenceKind::Psd => DEFAULT_MPD_PSD,
        SequenceKind::Acf => DEFAULT_MPD_ACF,
    };
    PeakConstraints {
        alpha: DEFAULT_ALPHA,
        mpd,
        n_peaks: 2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak<T> {
    pub x: T,
    pub y: T,
    pub index: usize,
}

/// Percentile `q ∈ [0, 100]` with linear interpolation between closest ranks:
/// position `h = (n − 1)·q/100` in the sorted values.
pub fn percentile<T: Scalar>(values: &[T], q: f64) -> T {
    assert!(!values.is_empty(), "percentile of an empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in percentile input"));
    let h = (sorted.len() - 1) as f64 * q / 100.0;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = T::of(h - lo as f64);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// `p5 + alpha·(p95 − p5)` over the sequence values, evaluated as
/// `(1 − alpha)·p5 + alpha·p95` so both endpoints are exact.
pub fn min_peak_height<T: Scalar>(seq: &IndexedSequence<T>, alpha: f64) -> T {
    mph_of(&seq.ys, alpha)
}

pub(crate) fn mph_of<T: Scalar>(ys: &[T], alpha: f64) -> T {
    let p5 = percentile(ys, 5.0);
    let p95 = percentile(ys, 95.0);
    T::of(1.0 - alpha) * p5 + T::of(alpha) * p95
}

/// Strict interior local maxima: `ys[i−1] < ys[i] > ys[i+1]`.
pub fn local_maxima<T: Scalar>(ys: &[T]) -> Vec<usize> {
    if ys.len() < 3 {
        return Vec::new();
    }
    (1..ys.len() - 1)
        .filter(|&i| ys[i] > ys[i - 1] && ys[i] > ys[i + 1])
        .collect()
}

/// Selects peaks under the constraints.
///
/// Candidates are strict interior local maxima at or above the minimum peak
/// height. They are accepted greedily from the tallest down (equal heights:
/// lower index first), each acceptance suppressing every candidate closer
/// than `mpd` indices. The accepted peaks are then ordered by ascending x and
/// the first `n_peaks` returned; fewer is a valid outcome.
pub fn find_peaks<T: Scalar>(seq: &IndexedSequence<T>, c: &PeakConstraints) -> Vec<Peak<T>> {
    let ys = &seq.ys;
    if ys.len() < 3 {
        return Vec::new();
    }
    let mph = mph_of(ys, c.alpha);
    let mut cand: Vec<usize> = local_maxima(ys).into_iter().filter(|&i| ys[i] >= mph).collect();
    cand.sort_by(|&a, &b| {
        ys[b]
            .partial_cmp(&ys[a])
            .expect("NaN in peak input")
            .then(a.cmp(&b))
    });

    let mut accepted: Vec<usize> = Vec::new();
    // `taken[i]` is true when index i lies within mpd of an accepted peak.
    let mut taken = vec![false; ys.len()];
    for i in cand {
        if taken[i] {
            continue;
        }
        accepted.push(i);
        if c.mpd > 0 {
            let lo = i.saturating_sub(c.mpd - 1);
            let hi = (i + c.mpd - 1).min(ys.len() - 1);
            taken[lo..=hi].iter_mut().for_each(|t| *t = true);
        }
    }
    accepted.sort_unstable();
    accepted
        .into_iter()
        .take(c.n_peaks)
        .map(|i| Peak {
            x: seq.xs[i],
            y: ys[i],
            index: i,
        })
        .collect()
}
