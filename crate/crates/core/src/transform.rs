// SPDX-License-Identifier: MIT OR Apache-2.0

//! The three base representations peaks are picked from: one-sided amplitude
//! spectrum, Welch power spectral density and normalized autocorrelation.

use std::fmt;

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dataset::TimeSeries;
use crate::error::TransformError;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Fft,
    Psd,
    Acf,
}

impl SequenceKind {
    pub const ALL: [SequenceKind; 3] = [SequenceKind::Fft, SequenceKind::Psd, SequenceKind::Acf];

    /// Lower-case tag used in feature names and file formats.
    pub fn tag(self) -> &'static str {
        match self {
            SequenceKind::Fft => "fft",
            SequenceKind::Psd => "psd",
            SequenceKind::Acf => "acf",
        }
    }
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SequenceKind::Fft => "FFT",
            SequenceKind::Psd => "PSD",
            SequenceKind::Acf => "ACF",
        })
    }
}

impl std::str::FromStr for SequenceKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "fft" => Ok(SequenceKind::Fft),
            "psd" => Ok(SequenceKind::Psd),
            "acf" => Ok(SequenceKind::Acf),
            _ => Err(format!("unknown transform {s:?} (expected fft, psd or acf)")),
        }
    }
}

/// How a sequence was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceMeta {
    /// Length of the source signal.
    pub n_samples: usize,
    /// Transform length: the zero-padded FFT size, the Welch segment length,
    /// or the correlation FFT size.
    pub fft_len: usize,
    pub sample_rate_hz: f64,
    /// Welch segments averaged (1 otherwise).
    pub segments: usize,
}

/// `(x, y)` pairs on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedSequence<T> {
    pub xs: Vec<T>,
    pub ys: Vec<T>,
    pub kind: SequenceKind,
    pub meta: SequenceMeta,
}

impl<T: Scalar> IndexedSequence<T> {
    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    /// Spacing of the x grid (Hz per bin, or 1 lag).
    pub fn resolution(&self) -> T {
        self.xs[1] - self.xs[0]
    }

    /// Renders as `x,y` lines with a header.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::from(match self.kind {
            SequenceKind::Fft => "frequency_hz,amplitude\n",
            SequenceKind::Psd => "frequency_hz,power_density\n",
            SequenceKind::Acf => "lag,correlation\n",
        });
        for (x, y) in self.xs.iter().zip(&self.ys) {
            let _ = writeln!(s, "{},{}", x.as_f64(), y.as_f64());
        }
        s
    }
}

fn demeaned<T: Scalar>(x: &[T]) -> Vec<T> {
    let mean = x.iter().copied().sum::<T>() / T::of_usize(x.len());
    x.iter().map(|&v| v - mean).collect()
}

fn forward_fft<T: Scalar>(x: &[T], len: usize) -> Vec<Complex<T>> {
    let mut buf: Vec<Complex<T>> = x
        .iter()
        .map(|&v| Complex::new(v, T::zero()))
        .chain(std::iter::repeat(Complex::new(T::zero(), T::zero())))
        .take(len)
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    buf
}

/// One-sided magnitude spectrum of the mean-removed signal, zero-padded to the
/// next power of two.
///
/// Bin `k` holds `c_k·|X_k|/N` with `c_k = 1` at DC and Nyquist and 2
/// elsewhere, so a unit-amplitude sinusoid on a bin centre reads 1.
pub fn amplitude_spectrum<T: Scalar>(ts: &TimeSeries<T>) -> Result<IndexedSequence<T>, TransformError> {
    let n = ts.len();
    if n < 4 {
        return Err(TransformError::TooShort {
            kind: SequenceKind::Fft,
            needed: 4,
            got: n,
        });
    }
    let nfft = n.next_power_of_two();
    let spec = forward_fft(&demeaned(&ts.samples), nfft);
    let half = nfft / 2;
    let n_t = T::of_usize(n);
    let two = T::of(2.0);
    let df = ts.sample_rate_hz / nfft as f64;
    let xs = (0..=half).map(|k| T::of(k as f64 * df)).collect();
    let ys = spec[..=half]
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let m = c.norm() / n_t;
            if k == 0 || k == half {
                m
            } else {
                two * m
            }
        })
        .collect();
    Ok(IndexedSequence {
        xs,
        ys,
        kind: SequenceKind::Fft,
        meta: SequenceMeta {
            n_samples: n,
            fft_len: nfft,
            sample_rate_hz: ts.sample_rate_hz,
            segments: 1,
        },
    })
}

/// Welch estimator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    /// Segments the signal is divided into when `segment_len` is derived.
    pub segments: usize,
    /// Fractional overlap between consecutive segments, in `[0, 1)`.
    pub overlap: f64,
    /// Explicit segment length; `None` derives it from `segments`.
    pub segment_len: Option<usize>,
}

impl Default for WelchConfig {
    fn default() -> Self {
        WelchConfig {
            segments: 8,
            overlap: 0.5,
            segment_len: None,
        }
    }
}

const MIN_SEGMENT: usize = 8;

impl WelchConfig {
    /// Segment length and hop for a signal of `n` samples.
    pub fn layout(&self, n: usize) -> Result<(usize, usize), TransformError> {
        if !(0.0..1.0).contains(&self.overlap) || self.segments == 0 {
            return Err(TransformError::Welch(format!(
                "segments {} / overlap {}",
                self.segments, self.overlap
            )));
        }
        let seg = match self.segment_len {
            Some(s) => s,
            None => {
                let span = 1.0 + (self.segments - 1) as f64 * (1.0 - self.overlap);
                (n as f64 / span).floor() as usize
            }
        };
        let needed = (2 * seg).max(2 * MIN_SEGMENT);
        if seg < MIN_SEGMENT || n < needed {
            return Err(TransformError::TooShort {
                kind: SequenceKind::Psd,
                needed,
                got: n,
            });
        }
        let hop = seg - (self.overlap * seg as f64).round() as usize;
        Ok((seg, hop.max(1)))
    }
}

/// One-sided power spectral density by Welch's method: periodic-Hann windowed,
/// mean-detrended segments, density scaling (units²/Hz). The sum of the
/// density times the bin width approximates the signal variance.
pub fn power_spectral_density<T: Scalar>(
    ts: &TimeSeries<T>,
    cfg: &WelchConfig,
) -> Result<IndexedSequence<T>, TransformError> {
    let n = ts.len();
    let (seg, hop) = cfg.layout(n)?;
    let tau = T::of(2.0 * std::f64::consts::PI);
    let half_t = T::of(0.5);
    let window: Vec<T> = (0..seg)
        .map(|i| half_t - half_t * (tau * T::of_usize(i) / T::of_usize(seg)).cos())
        .collect();
    let w_energy: T = window.iter().map(|&w| w * w).sum();
    let fs = T::of(ts.sample_rate_hz);
    let scale = T::one() / (fs * w_energy);

    let planner_fft = FftPlanner::new().plan_fft_forward(seg);
    let half = seg / 2;
    let mut acc = vec![T::zero(); half + 1];
    let mut count = 0usize;
    let mut start = 0usize;
    let mut buf = vec![Complex::new(T::zero(), T::zero()); seg];
    while start + seg <= n {
        let chunk = demeaned(&ts.samples[start..start + seg]);
        for ((b, &x), &w) in buf.iter_mut().zip(&chunk).zip(&window) {
            *b = Complex::new(x * w, T::zero());
        }
        planner_fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
        count += 1;
        start += hop;
    }

    let two = T::of(2.0);
    let inv_count = T::one() / T::of_usize(count);
    let even = seg % 2 == 0;
    let ys = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let v = p * scale * inv_count;
            if k == 0 || (even && k == half) {
                v
            } else {
                two * v
            }
        })
        .collect();
    let df = ts.sample_rate_hz / seg as f64;
    let xs = (0..=half).map(|k| T::of(k as f64 * df)).collect();
    Ok(IndexedSequence {
        xs,
        ys,
        kind: SequenceKind::Psd,
        meta: SequenceMeta {
            n_samples: n,
            fft_len: seg,
            sample_rate_hz: ts.sample_rate_hz,
            segments: count,
        },
    })
}

/// Lag cap used when none is given: `min(N − 1, 5000)`.
pub fn default_max_lag(n: usize) -> usize {
    n.saturating_sub(1).min(5000)
}

/// Biased, lag-0-normalized autocorrelation of the mean-removed signal,
/// `r_k = Σ_t x_t x_{t+k} / Σ_t x_t²` for `k = 0..=max_lag`, computed through a
/// zero-padded FFT. A constant signal yields `[1, 0, 0, …]`.
pub fn autocorrelation<T: Scalar>(
    ts: &TimeSeries<T>,
    max_lag: usize,
) -> Result<IndexedSequence<T>, TransformError> {
    let n = ts.len();
    if max_lag == 0 || max_lag >= n {
        return Err(TransformError::MaxLag { max_lag, len: n });
    }
    let x = demeaned(&ts.samples);
    let len = (2 * n).next_power_of_two();
    let mut spec = forward_fft(&x, len);
    for c in spec.iter_mut() {
        *c = Complex::new(c.norm_sqr(), T::zero());
    }
    FftPlanner::new().plan_fft_inverse(len).process(&mut spec);

    let r0 = spec[0].re;
    let ys: Vec<T> = if r0 > T::zero() {
        spec[..=max_lag]
            .iter()
            .map(|c| (c.re / r0).max(-T::one()).min(T::one()))
            .collect()
    } else {
        std::iter::once(T::one())
            .chain(std::iter::repeat(T::zero()).take(max_lag))
            .collect()
    };
    let mut ys = ys;
    ys[0] = T::one();
    Ok(IndexedSequence {
        xs: (0..=max_lag).map(T::of_usize).collect(),
        ys,
        kind: SequenceKind::Acf,
        meta: SequenceMeta {
            n_samples: n,
            fft_len: len,
            sample_rate_hz: ts.sample_rate_hz,
            segments: 1,
        },
    })
}
