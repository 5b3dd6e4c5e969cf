//! Brute-force references, shared by test targets via `#[path]`.
#![allow(dead_code)]

use std::f64::consts::PI;

use ctspec_core::{Complex64, Kernel};

/// The defining O(n²) double sum over sample times `t1, t2 = 1..n`.
pub fn direct_double_sum(
    x1: &[f64],
    x2: &[f64],
    kernel: &Kernel,
    b_n: f64,
    rho_n: f64,
    lambda: f64,
) -> Complex64 {
    if lambda.abs() > PI * rho_n {
        return Complex64::new(0.0, 0.0);
    }
    let n = x1.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for t1 in 1..=n {
        for t2 in 1..=n {
            let d = t1 as f64 - t2 as f64;
            let w = kernel.evaluate(b_n * d) * x1[t1 - 1] * x2[t2 - 1];
            acc += Complex64::from_polar(w, -d * lambda / rho_n);
        }
    }
    acc / (2.0 * PI * n as f64 * rho_n)
}

/// Separate cosine and sine double sums for the real and imaginary parts,
/// written with `t2 - t1` as the lag.
pub fn cosine_sine_sums(
    x1: &[f64],
    x2: &[f64],
    kernel: &Kernel,
    b_n: f64,
    rho_n: f64,
    lambda: f64,
) -> (f64, f64) {
    if lambda.abs() > PI * rho_n {
        return (0.0, 0.0);
    }
    let n = x1.len();
    let (mut re, mut im) = (0.0, 0.0);
    for t1 in 1..=n {
        for t2 in 1..=n {
            let d = t2 as f64 - t1 as f64;
            let w = kernel.evaluate(b_n * d) * x1[t1 - 1] * x2[t2 - 1];
            re += w * (d * lambda / rho_n).cos();
            im += w * (d * lambda / rho_n).sin();
        }
    }
    let scale = 2.0 * PI * n as f64 * rho_n;
    (re / scale, im / scale)
}

/// Floating-point magnitude of the double sum: the same sum with every
/// term replaced by its absolute value. Relative errors are measured
/// against this so cancellation near zero does not inflate them.
pub fn absolute_scale(x1: &[f64], x2: &[f64], kernel: &Kernel, b_n: f64, rho_n: f64) -> f64 {
    let n = x1.len();
    let mut acc = 0.0;
    for t1 in 1..=n {
        for t2 in 1..=n {
            let d = t1 as f64 - t2 as f64;
            acc += (kernel.evaluate(b_n * d) * x1[t1 - 1] * x2[t2 - 1]).abs();
        }
    }
    acc / (2.0 * PI * n as f64 * rho_n)
}

/// Sample lag covariance `(1/n) Σ_t x(t+lag) y(t)` and the standard error of
/// that mean estimated from batch means (batches much longer than the
/// correlation time).
pub fn lag_covariance_with_se(x: &[f64], y: &[f64], lag: usize, batches: usize) -> (f64, f64) {
    let products: Vec<f64> = x[lag..]
        .iter()
        .zip(&y[..y.len() - lag])
        .map(|(a, b)| a * b)
        .collect();
    let mean = products.iter().sum::<f64>() / products.len() as f64;
    let size = products.len() / batches;
    let batch_means: Vec<f64> = products
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let k = batch_means.len() as f64;
    let bm = batch_means.iter().sum::<f64>() / k;
    let var = batch_means.iter().map(|v| (v - bm).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Exact mean and variance of `Re φ̂_{aa}(λ)` for a zero-mean Gaussian process
/// with autocovariance `cov`, by Isserlis' theorem over all sample pairs.
pub fn exact_gaussian_moments(
    cov: &dyn Fn(f64) -> f64,
    kernel: &Kernel,
    b_n: f64,
    rho_n: f64,
    n: usize,
    lambda: f64,
) -> (f64, f64) {
    let n_i = n as i64;
    let radius = kernel.support_radius().expect("compactly supported kernel");
    let lag_max = (radius / b_n).ceil() as i64;
    let lags: Vec<i64> = (-lag_max.min(n_i - 1)..=lag_max.min(n_i - 1)).collect();
    let w: Vec<f64> = lags
        .iter()
        .map(|&u| {
            kernel.evaluate(b_n * u as f64) * (u as f64 * lambda / rho_n).cos() / (2.0 * PI * rho_n)
        })
        .collect();
    let c = |k: i64| cov(k as f64 / rho_n);
    let mean = lags
        .iter()
        .zip(&w)
        .map(|(&u, w)| w * (1.0 - u.abs() as f64 / n as f64) * c(u))
        .sum();
    // ĉ(u) averages x(t+u)x(t) over t in [max(0,-u), n - max(0,u)).
    let span = |u: i64| (0.max(-u), n_i - 0.max(u));
    let mut var = 0.0;
    for (&u, wu) in lags.iter().zip(&w) {
        let (tu0, tu1) = span(u);
        for (&v, wv) in lags.iter().zip(&w) {
            let (tv0, tv1) = span(v);
            let mut acc = 0.0;
            for k in (tu0 - tv1 + 1)..(tu1 - tv0) {
                // Pairs (t, s) with t - s = k.
                let count = (tu1.min(tv1 + k) - tu0.max(tv0 + k)).max(0) as f64;
                acc += count * (c(k + u - v) * c(k) + c(k + u) * c(k - v));
            }
            var += wu * wv * acc;
        }
    }
    (mean, var / (n as f64 * n as f64))
}
