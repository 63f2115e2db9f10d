// SPDX-License-Identifier: MIT OR Apache-2.0

//! Linear SVM and logistic regression on standardized rows.
//!
//! Both take labels as signs `s_i ∈ {−1, +1}` and score `z = w·x + b`. The bias
//! is never regularized.

use serde::{Deserialize, Serialize};

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 1.0, epochs: 500 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub lambda: f64,
    /// Stop once the gradient norm falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            lambda: 1e-4,
            tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

/// Weights, bias and the objective after every iteration.
#[derive(Debug, Clone)]
pub struct LinearFit<T> {
    pub weights: Vec<T>,
    pub bias: T,
    pub trace: Vec<f64>,
}

fn dot<T: Scalar>(w: &[T], x: &[T]) -> T {
    w.iter().zip(x).map(|(&a, &b)| a * b).sum()
}

fn norm_sq<T: Scalar>(w: &[T]) -> T {
    w.iter().map(|&v| v * v).sum()
}

/// `ln(1 + e^u)` without overflow.
fn softplus<T: Scalar>(u: T) -> T {
    u.max(T::zero()) + (-u.abs()).exp().ln_1p()
}

fn sigmoid<T: Scalar>(u: T) -> T {
    if u >= T::zero() {
        T::one() / (T::one() + (-u).exp())
    } else {
        let e = u.exp();
        e / (T::one() + e)
    }
}

/// Regularized mean log-loss `(1/n) Σ ln(1 + e^{−s z}) + (λ/2)‖w‖²`.
pub fn logistic_loss<T: Scalar>(x: &[&[T]], s: &[T], w: &[T], b: T, lambda: f64) -> T {
    let n = T::of_usize(x.len());
    let data: T = x
        .iter()
        .zip(s)
        .map(|(row, &si)| softplus(-si * (dot(w, row) + b)))
        .sum();
    data / n + T::of(lambda / 2.0) * norm_sq(w)
}

/// Gradient of [`logistic_loss`]; the last entry is `∂/∂b`.
pub fn logistic_gradient<T: Scalar>(x: &[&[T]], s: &[T], w: &[T], b: T, lambda: f64) -> Vec<T> {
    let n = T::of_usize(x.len());
    let mut g = vec![T::zero(); w.len() + 1];
    for (row, &si) in x.iter().zip(s) {
        let z = dot(w, row) + b;
        let coef = -si * sigmoid(-si * z);
        for (gj, &xj) in g.iter_mut().zip(row.iter()) {
            *gj += coef * xj;
        }
        g[w.len()] += coef;
    }
    let lam = T::of(lambda);
    for (j, gj) in g.iter_mut().enumerate() {
        *gj /= n;
        if j < w.len() {
            *gj += lam * w[j];
        }
    }
    g
}

/// Full-batch gradient descent with Armijo backtracking. The step grows by 2×
/// after each accepted iteration and halves on every rejected trial, so the
/// objective never increases.
pub fn train_logistic<T: Scalar>(x: &[&[T]], s: &[T], p: &LogisticParams) -> LinearFit<T> {
    let d = x.first().map_or(0, |r| r.len());
    let mut w = vec![T::zero(); d];
    let mut b = T::zero();
    let mut loss = logistic_loss(x, s, &w, b, p.lambda);
    let mut trace = vec![loss.as_f64()];
    let mut step = T::one();
    let armijo = T::of(1e-4);
    let tol = T::of(p.tol);

    for _ in 0..p.max_iter {
        let g = logistic_gradient(x, s, &w, b, p.lambda);
        let gsq = norm_sq(&g);
        if gsq.sqrt() < tol {
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let w_try: Vec<T> = w.iter().zip(&g).map(|(&wj, &gj)| wj - step * gj).collect();
            let b_try = b - step * g[d];
            let l_try = logistic_loss(x, s, &w_try, b_try, p.lambda);
            if l_try <= loss - armijo * step * gsq {
                w = w_try;
                b = b_try;
                loss = l_try;
                accepted = true;
                break;
            }
            step /= T::of(2.0);
        }
        if !accepted {
            break;
        }
        trace.push(loss.as_f64());
        step *= T::of(2.0);
    }
    LinearFit {
        weights: w,
        bias: b,
        trace,
    }
}

/// `(λ/2)‖w‖² + (1/n) Σ max(0, 1 − s(w·x + b))`.
pub fn hinge_objective<T: Scalar>(x: &[&[T]], s: &[T], w: &[T], b: T, lambda: f64) -> T {
    let n = T::of_usize(x.len());
    let data: T = x
        .iter()
        .zip(s)
        .map(|(row, &si)| (T::one() - si * (dot(w, row) + b)).max(T::zero()))
        .sum();
    data / n + T::of(lambda / 2.0) * norm_sq(w)
}

/// A subgradient of [`hinge_objective`]; the last entry is `∂/∂b`. Points
/// exactly on the hinge contribute nothing.
pub fn hinge_subgradient<T: Scalar>(x: &[&[T]], s: &[T], w: &[T], b: T, lambda: f64) -> Vec<T> {
    let n = T::of_usize(x.len());
    let d = w.len();
    let mut g = vec![T::zero(); d + 1];
    for (row, &si) in x.iter().zip(s) {
        if si * (dot(w, row) + b) < T::one() {
            for (gj, &xj) in g.iter_mut().zip(row.iter()) {
                *gj -= si * xj;
            }
            g[d] -= si;
        }
    }
    let lam = T::of(lambda);
    for (j, gj) in g.iter_mut().enumerate() {
        *gj /= n;
        if j < d {
            *gj += lam * w[j];
        }
    }
    g
}

/// Full-batch subgradient descent on the hinge objective with
/// `λ = 1/(C·n)` and step `1/(λ·t)`, projecting `w` onto the ball of radius
/// `1/√λ`. Subgradient steps are not monotone, so the iterate with the lowest
/// objective seen is returned and `trace` records that running minimum.
pub fn train_svm<T: Scalar>(x: &[&[T]], s: &[T], p: &SvmParams) -> LinearFit<T> {
    let n = x.len();
    let d = x.first().map_or(0, |r| r.len());
    let lambda = 1.0 / (p.c * n as f64);
    let radius = T::of(1.0 / lambda.sqrt());
    let mut w = vec![T::zero(); d];
    let mut b = T::zero();
    let mut best = (w.clone(), b, hinge_objective(x, s, &w, b, lambda));
    let mut trace = vec![best.2.as_f64()];

    for t in 1..=p.epochs {
        let g = hinge_subgradient(x, s, &w, b, lambda);
        let eta = T::of(1.0 / (lambda * t as f64));
        for (wj, &gj) in w.iter_mut().zip(&g) {
            *wj -= eta * gj;
        }
        b -= eta * g[d];
        let norm = norm_sq(&w).sqrt();
        if norm > radius {
            let shrink = radius / norm;
            w.iter_mut().for_each(|v| *v *= shrink);
        }
        let obj = hinge_objective(x, s, &w, b, lambda);
        if obj < best.2 {
            best = (w.clone(), b, obj);
        }
        trace.push(best.2.as_f64());
    }
    LinearFit {
        weights: best.0,
        bias: best.1,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    fn problem(n: usize, d: usize, seed_: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = seed::rng(seed_);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let s = rows
            .iter()
            .map(|r| if r[0] + 0.3 * r[1] + rng.random_range(-0.5..0.5) > 0.0 { 1.0 } else { -1.0 })
            .collect();
        (rows, s)
    }

    fn central_diff(f: impl Fn(&[f64], f64) -> f64, w: &[f64], b: f64) -> Vec<f64> {
        let h = 1e-6;
        let mut out = Vec::new();
        for j in 0..=w.len() {
            let (mut wp, mut wm) = (w.to_vec(), w.to_vec());
            let (mut bp, mut bm) = (b, b);
            if j < w.len() {
                wp[j] += h;
                wm[j] -= h;
            } else {
                bp += h;
                bm -= h;
            }
            out.push((f(&wp, bp) - f(&wm, bm)) / (2.0 * h));
        }
        out
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1e-8);
        diff / scale
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let (rows, s) = problem(30, 4, 11);
        let x: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let mut rng = seed::rng(12);
        for _ in 0..20 {
            let w: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let b = rng.random_range(-1.0..1.0);
            let lam = 0.01;
            let g = logistic_gradient(&x, &s, &w, b, lam);
            let fd = central_diff(|w, b| logistic_loss(&x, &s, w, b, lam), &w, b);
            assert!(rel_err(&g, &fd) < 1e-5, "{g:?} vs {fd:?}");
        }
    }

    #[test]
    fn hinge_subgradient_matches_away_from_kink() {
        let (rows, s) = problem(30, 4, 21);
        let x: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let mut rng = seed::rng(22);
        let mut checked = 0;
        while checked < 20 {
            let w: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let b = rng.random_range(-1.0..1.0);
            let near_kink = x
                .iter()
                .zip(&s)
                .any(|(r, &si)| (si * (dot(&w, r) + b) - 1.0).abs() <= 1e-3);
            if near_kink {
                continue;
            }
            let lam = 0.05;
            let g = hinge_subgradient(&x, &s, &w, b, lam);
            let fd = central_diff(|w, b| hinge_objective(&x, &s, w, b, lam), &w, b);
            assert!(rel_err(&g, &fd) < 1e-5);
            checked += 1;
        }
    }

    #[test]
    fn logistic_loss_is_monotone() {
        let (rows, s) = problem(50, 3, 5);
        let x: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let fit = train_logistic(&x, &s, &LogisticParams::default());
        assert!(fit.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(fit.trace.last().unwrap() < &fit.trace[0]);
    }

    #[test]
    fn svm_best_objective_is_monotone() {
        let (rows, s) = problem(50, 3, 6);
        let x: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let fit = train_svm(&x, &s, &SvmParams::default());
        assert_eq!(fit.trace.len(), 501);
        assert!(fit.trace.windows(2).all(|w| w[1] <= w[0]));
        let final_obj = hinge_objective(&x, &s, &fit.weights, fit.bias, 1.0 / 50.0);
        assert_eq!(final_obj, *fit.trace.last().unwrap());
    }
}
