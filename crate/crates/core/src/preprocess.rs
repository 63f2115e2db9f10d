// SPDX-License-Identifier: MIT OR Apache-2.0

//! Anti-alias low-pass filtering and integer-factor decimation.
//!
//! High-order Butterworth designs are realized as a cascade of second-order
//! sections; a direct-form polynomial of order 100 does not survive double
//! precision.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dataset::TimeSeries;
use crate::error::PreprocessError;
use crate::Scalar;

/// Working rate of the feature pipeline.
pub const DEFAULT_TARGET_RATE_HZ: f64 = 10_000.0;
/// Anti-alias filter order.
pub const DEFAULT_FILTER_ORDER: usize = 100;
/// Default cutoff as a fraction of the target Nyquist frequency.
pub const DEFAULT_CUTOFF_FRACTION: f64 = 0.9;

/// One second-order section, `H(z) = (b0 + b1 z⁻¹ + b2 z⁻²) / (1 + a1 z⁻¹ + a2 z⁻²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad<T> {
    pub b0: T,
    pub b1: T,
    pub b2: T,
    pub a1: T,
    pub a2: T,
}

impl<T: Scalar> Biquad<T> {
    /// Largest pole magnitude.
    pub fn pole_radius(&self) -> f64 {
        let (a1, a2) = (self.a1.as_f64(), self.a2.as_f64());
        let disc = a1 * a1 - 4.0 * a2;
        if disc < 0.0 {
            a2.sqrt()
        } else {
            let s = disc.sqrt();
            ((-a1 + s) / 2.0).abs().max(((-a1 - s) / 2.0).abs())
        }
    }

    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b0.as_f64() + z_inv * self.b1.as_f64() + z2 * self.b2.as_f64();
        let den = 1.0 + z_inv * self.a1.as_f64() + z2 * self.a2.as_f64();
        num / den
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec<T> {
    pub cutoff_hz: f64,
    pub sample_rate_hz: f64,
    pub order: usize,
    pub stages: Vec<Biquad<T>>,
}

impl<T: Scalar> FilterSpec<T> {
    /// Magnitude response at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * freq_hz / self.sample_rate_hz;
        let z_inv = Complex64::from_polar(1.0, -w);
        self.stages
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
            .norm()
    }

    pub fn is_stable(&self) -> bool {
        self.stages.iter().all(|s| s.pole_radius() < 1.0)
    }
}

/// Digital Butterworth low-pass via the bilinear transform with frequency
/// prewarping; each conjugate pole pair of the analog prototype becomes one
/// section with unit DC gain.
pub fn design_butterworth_lowpass<T: Scalar>(
    cutoff_hz: f64,
    sample_rate_hz: f64,
    order: usize,
) -> Result<FilterSpec<T>, PreprocessError> {
    let nyquist_hz = sample_rate_hz / 2.0;
    if !(cutoff_hz > 0.0 && cutoff_hz < nyquist_hz) {
        return Err(PreprocessError::Cutoff {
            cutoff_hz,
            nyquist_hz,
        });
    }
    if order < 2 || order % 2 != 0 {
        return Err(PreprocessError::Order(order));
    }

    let k = (std::f64::consts::PI * cutoff_hz / sample_rate_hz).tan();
    let k2 = k * k;
    let n_stages = order / 2;
    let mut stages = Vec::with_capacity(n_stages);
    for i in 0..n_stages {
        // analog poles at Ωc·(−sin φ ± j cos φ)
        let phi = std::f64::consts::PI * (2 * i + 1) as f64 / (2 * order) as f64;
        let damp = 2.0 * k * phi.sin();
        let a0 = 1.0 + damp + k2;
        let b = k2 / a0;
        let stage = Biquad {
            b0: T::of(b),
            b1: T::of(2.0 * b),
            b2: T::of(b),
            a1: T::of(2.0 * (k2 - 1.0) / a0),
            a2: T::of((1.0 - damp + k2) / a0),
        };
        let radius = stage.pole_radius();
        if radius >= 1.0 {
            return Err(PreprocessError::UnstableStage { stage: i, radius });
        }
        stages.push(stage);
    }
    Ok(FilterSpec {
        cutoff_hz,
        sample_rate_hz,
        order,
        stages,
    })
}

/// Causal single-pass filtering (transposed direct form II per section).
pub fn apply_filter<T: Scalar>(
    spec: &FilterSpec<T>,
    ts: &TimeSeries<T>,
) -> Result<TimeSeries<T>, PreprocessError> {
    if ts.is_empty() {
        return Err(PreprocessError::Empty);
    }
    let mut buf = ts.samples.clone();
    filter_in_place(spec, &mut buf)?;
    Ok(ts.with_samples(buf, ts.sample_rate_hz))
}

pub(crate) fn filter_in_place<T: Scalar>(
    spec: &FilterSpec<T>,
    buf: &mut [T],
) -> Result<(), PreprocessError> {
    for (si, s) in spec.stages.iter().enumerate() {
        let (mut z1, mut z2) = (T::zero(), T::zero());
        for (n, x) in buf.iter_mut().enumerate() {
            let input = *x;
            let y = s.b0 * input + z1;
            z1 = s.b1 * input - s.a1 * y + z2;
            z2 = s.b2 * input - s.a2 * y;
            if !y.is_finite() {
                return Err(PreprocessError::NonFinite {
                    stage: si,
                    sample: n,
                });
            }
            *x = y;
        }
    }
    Ok(())
}

/// Anti-alias settings used by [`decimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecimationConfig {
    /// `None` selects 0.9 × the target Nyquist frequency.
    pub cutoff_hz: Option<f64>,
    pub order: usize,
}

impl Default for DecimationConfig {
    fn default() -> Self {
        DecimationConfig {
            cutoff_hz: None,
            order: DEFAULT_FILTER_ORDER,
        }
    }
}

impl DecimationConfig {
    pub fn cutoff_for(&self, target_rate_hz: f64) -> f64 {
        self.cutoff_hz
            .unwrap_or(DEFAULT_CUTOFF_FRACTION * target_rate_hz / 2.0)
    }
}

/// Integer decimation factor between two rates, if there is one.
pub fn decimation_factor(source_hz: f64, target_hz: f64) -> Result<usize, PreprocessError> {
    let err = PreprocessError::DecimationFactor {
        source_hz,
        target_hz,
    };
    if !(source_hz > 0.0 && target_hz > 0.0) {
        return Err(err);
    }
    let ratio = source_hz / target_hz;
    let factor = ratio.round();
    if factor < 1.0 || (ratio - factor).abs() > 1e-9 * ratio {
        return Err(err);
    }
    Ok(factor as usize)
}

/// Low-pass filters, then keeps every `factor`-th sample starting at the first.
/// Equal rates return the input untouched.
pub fn decimate<T: Scalar>(
    ts: &TimeSeries<T>,
    target_rate_hz: f64,
    cfg: &DecimationConfig,
) -> Result<TimeSeries<T>, PreprocessError> {
    if ts.is_empty() {
        return Err(PreprocessError::Empty);
    }
    let factor = decimation_factor(ts.sample_rate_hz, target_rate_hz)?;
    if factor == 1 {
        return Ok(ts.clone());
    }
    let spec = design_butterworth_lowpass::<T>(
        cfg.cutoff_for(target_rate_hz),
        ts.sample_rate_hz,
        cfg.order,
    )?;
    let filtered = apply_filter(&spec, ts)?;
    let out: Vec<T> = filtered.samples.iter().step_by(factor).copied().collect();
    Ok(ts.with_samples(out, target_rate_hz))
}
