//! Lag-window estimator of spectra and cross-spectra.
//!
//! For channels `a1, a2`, samples `X_a(t/ρ_n)`, `t = 1..n`, the estimate is
//!
//! ```text
//! φ̂_{a1a2}(λ) = 1/(2π n ρ_n) Σ_{t1} Σ_{t2} K(b_n(t1-t2)) X_{a1}(t1/ρ_n) X_{a2}(t2/ρ_n) e^{-i(t1-t2)λ/ρ_n}
//! ```
//!
//! for `|λ| ≤ πρ_n`, and zero beyond. Grouping by lag `u = t1 - t2`:
//!
//! ```text
//! φ̂_{a1a2}(λ) = 1/(2πρ_n) Σ_{|u| ≤ U} K(b_n u) ĉ_{a1a2}(u) e^{-iuλ/ρ_n},
//! ĉ_{a1a2}(u) = 1/n Σ_t X_{a1}((t+u)/ρ_n) X_{a2}(t/ρ_n),
//! ```
//!
//! with `U = min(n-1, ⌈R/b_n⌉)` for kernel support radius `R`. Negative lags
//! come from `ĉ_{a1a2}(-u) = ĉ_{a2a1}(u)`. Frequencies are in radians per
//! unit time of the underlying continuous process.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::kernels::{kernel_b, Kernel};
use crate::spectral::SpectralMatrix;

/// `r` channels of `n` samples taken `1/ρ_n` time units apart.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelSamples {
    channels: Vec<Vec<f64>>,
    rho_n: f64,
}

impl MultichannelSamples {
    pub fn new(channels: Vec<Vec<f64>>, rho_n: f64) -> Result<Self> {
        if channels.is_empty() {
            return Err(invalid("at least one channel is required"));
        }
        let n = channels[0].len();
        if n == 0 {
            return Err(invalid("at least one sample is required"));
        }
        if channels.iter().any(|c| c.len() != n) {
            return Err(invalid("all channels must have the same length"));
        }
        if !(rho_n > 0.0 && rho_n.is_finite()) {
            return Err(invalid(format!(
                "sampling rate must be positive, got {rho_n}"
            )));
        }
        for (channel, values) in channels.iter().enumerate() {
            if let Some(index) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteSample { channel, index });
            }
        }
        Ok(Self { channels, rho_n })
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rho_n(&self) -> f64 {
        self.rho_n
    }

    pub fn channel(&self, a: usize) -> Result<&[f64]> {
        self.channels
            .get(a)
            .map(Vec::as_slice)
            .ok_or(Error::ChannelOutOfRange {
                index: a,
                channels: self.channels.len(),
            })
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    /// Copy with each channel's sample mean removed.
    pub fn demeaned(&self) -> Self {
        let channels = self
            .channels
            .iter()
            .map(|c| {
                let mean = c.iter().sum::<f64>() / c.len() as f64;
                c.iter().map(|v| v - mean).collect()
            })
            .collect();
        Self {
            channels,
            rho_n: self.rho_n,
        }
    }
}

/// Strictly ascending, finite frequencies (radians per unit time).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrequencyGrid {
    values: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("frequency grid entries must be finite"));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("frequency grid must be strictly ascending"));
        }
        Ok(Self { values })
    }

    /// `count` points `start, start + step, …`. Points are computed as
    /// `start + i·step` so they land exactly on multiples of the step.
    pub fn uniform(start: f64, step: f64, count: usize) -> Result<Self> {
        if count > 1 && !(step > 0.0) {
            return Err(invalid("grid step must be positive"));
        }
        Self::new((0..count).map(|i| start + i as f64 * step).collect())
    }

    /// Points from `min` to `max` inclusive (within half a step) at `step`.
    pub fn range(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid("grid step must be positive"));
        }
        if !(max >= min) {
            return Err(invalid("freq-max must not be below freq-min"));
        }
        let count = libm::floor((max - min) / step + 0.5) as usize + 1;
        Self::uniform(min, step, count)
    }

    /// `[0, 3π]` at spacing `3π / (points - 1)`; 301 points gives `0.01π`.
    pub fn zero_to_three_pi(points: usize) -> Result<Self> {
        if points < 2 {
            return Err(invalid("need at least two grid points"));
        }
        let intervals = (points - 1) as f64;
        Self::new(
            (0..points)
                .map(|i| 3.0 * PI * i as f64 / intervals)
                .collect(),
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of `lambda` by exact match.
    pub fn index_of(&self, lambda: f64) -> Result<usize> {
        self.values
            .binary_search_by(|v| v.partial_cmp(&lambda).unwrap_or(core::cmp::Ordering::Less))
            .map_err(|_| Error::FrequencyNotOnGrid(lambda))
    }
}

/// Metadata recorded with an estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateMeta {
    pub n: usize,
    pub b_n: f64,
    pub rho_n: f64,
    pub kernel: String,
    /// `½ ∫ K²` of the kernel used.
    pub b_constant: f64,
    /// Largest lag included.
    pub max_lag: usize,
}

/// Cross-spectral matrices over a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEstimate {
    grid: FrequencyGrid,
    matrices: Vec<SpectralMatrix>,
    meta: EstimateMeta,
}

impl SpectralEstimate {
    /// Assembles an estimate from precomputed matrices (one per grid point).
    pub fn from_parts(
        grid: FrequencyGrid,
        matrices: Vec<SpectralMatrix>,
        meta: EstimateMeta,
    ) -> Result<Self> {
        if grid.len() != matrices.len() {
            return Err(invalid("one spectral matrix per grid point is required"));
        }
        Ok(Self {
            grid,
            matrices,
            meta,
        })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn meta(&self) -> &EstimateMeta {
        &self.meta
    }

    pub fn matrices(&self) -> &[SpectralMatrix] {
        &self.matrices
    }

    pub fn channel_count(&self) -> usize {
        self.matrices.first().map_or(0, SpectralMatrix::channels)
    }

    /// Matrix at a grid frequency (exact match).
    pub fn at(&self, lambda: f64) -> Result<&SpectralMatrix> {
        Ok(&self.matrices[self.grid.index_of(lambda)?])
    }

    pub fn value(&self, a1: usize, a2: usize, lambda: f64) -> Result<Complex64> {
        self.at(lambda)?.get(a1, a2)
    }
}

/// Real and imaginary parts of `φ̂_{a1a2}(λ)`; `λ` must be a grid point.
pub fn real_imag_parts(
    est: &SpectralEstimate,
    a1: usize,
    a2: usize,
    lambda: f64,
) -> Result<(f64, f64)> {
    let v = est.value(a1, a2, lambda)?;
    Ok((v.re, v.im))
}

/// Options for [`estimate_cross_spectrum_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EstimatorOptions {
    /// Remove each channel's sample mean first. The estimator assumes a
    /// zero-mean process, so this is off by default.
    pub subtract_mean: bool,
}

/// Estimates all `r²` spectra and cross-spectra on `grid`.
pub fn estimate_cross_spectrum(
    samples: &MultichannelSamples,
    kernel: &Kernel,
    b_n: f64,
    grid: &FrequencyGrid,
) -> Result<SpectralEstimate> {
    estimate_cross_spectrum_with(samples, kernel, b_n, grid, EstimatorOptions::default())
}

pub fn estimate_cross_spectrum_with(
    samples: &MultichannelSamples,
    kernel: &Kernel,
    b_n: f64,
    grid: &FrequencyGrid,
    options: EstimatorOptions,
) -> Result<SpectralEstimate> {
    let prepared = LagWindowEstimator::new(samples, kernel, b_n, options)?;
    let matrices = grid
        .values()
        .iter()
        .map(|&lambda| prepared.matrix_at(lambda))
        .collect();
    Ok(SpectralEstimate {
        grid: grid.clone(),
        matrices,
        meta: prepared.meta,
    })
}

/// Weighted lag covariances of a record, ready to be evaluated at any
/// frequency. Evaluation at one frequency is independent of every other,
/// so a grid may be split across threads without changing any bit.
#[derive(Debug, Clone)]
pub struct LagWindowEstimator {
    channels: usize,
    weights: Vec<f64>,
    covariances: LagCovariances,
    meta: EstimateMeta,
}

impl LagWindowEstimator {
    pub fn new(
        samples: &MultichannelSamples,
        kernel: &Kernel,
        b_n: f64,
        options: EstimatorOptions,
    ) -> Result<Self> {
        if !(b_n > 0.0 && b_n.is_finite()) {
            return Err(invalid(format!("bandwidth must be positive, got {b_n}")));
        }
        let demeaned;
        let samples = if options.subtract_mean {
            demeaned = samples.demeaned();
            &demeaned
        } else {
            samples
        };
        let n = samples.len();
        let max_lag = max_lag(kernel, b_n, n);
        let weights = (0..=max_lag)
            .map(|u| kernel.evaluate(b_n * u as f64))
            .collect();
        let meta = EstimateMeta {
            n,
            b_n,
            rho_n: samples.rho_n(),
            kernel: String::from(kernel.name()),
            b_constant: kernel_b(kernel)?,
            max_lag,
        };
        Ok(Self {
            channels: samples.channel_count(),
            weights,
            covariances: lag_covariances(samples, max_lag),
            meta,
        })
    }

    pub fn meta(&self) -> &EstimateMeta {
        &self.meta
    }

    /// The full `r × r` matrix at `lambda`.
    pub fn matrix_at(&self, lambda: f64) -> SpectralMatrix {
        let r = self.channels;
        let rho = self.meta.rho_n;
        let max_lag = self.meta.max_lag;
        let weights = &self.weights;
        let mut m = SpectralMatrix::zeros(r);
        if !(libm::fabs(lambda) <= PI * rho) {
            return m;
        }
        let scale = 1.0 / (2.0 * PI * rho);
        // Tabulate at |λ| and flip the sine so φ̂(-λ) = conj φ̂(λ) exactly.
        let omega = libm::fabs(lambda) / rho;
        let sign = if lambda < 0.0 { -1.0 } else { 1.0 };
        let (sin_table, cos_table): (Vec<f64>, Vec<f64>) = (0..=max_lag)
            .map(|u| {
                let (s, c) = libm::sincos(u as f64 * omega);
                (sign * s, c)
            })
            .unzip();
        for a1 in 0..r {
            for a2 in a1..r {
                let fwd = self.covariances.get(a1, a2);
                let value = if a1 == a2 {
                    let mut acc = weights[0] * fwd[0];
                    for u in 1..=max_lag {
                        acc += weights[u] * fwd[u] * 2.0 * cos_table[u];
                    }
                    Complex64::new(acc * scale, 0.0)
                } else {
                    let bwd = self.covariances.get(a2, a1);
                    // ĉ(u) e^{-iuω} + ĉ(-u) e^{iuω}, u ≥ 1
                    let (mut re, mut im) = (weights[0] * fwd[0], 0.0);
                    for u in 1..=max_lag {
                        let w = weights[u];
                        re += w * (fwd[u] + bwd[u]) * cos_table[u];
                        im += w * (bwd[u] - fwd[u]) * sin_table[u];
                    }
                    Complex64::new(re * scale, im * scale)
                };
                m.set_unchecked(a1, a2, value);
                if a1 != a2 {
                    m.set_unchecked(a2, a1, value.conj());
                }
            }
        }
        m
    }
}

/// `U = min(n - 1, ⌈R / b_n⌉)`, or `n - 1` for unbounded support.
pub fn max_lag(kernel: &Kernel, b_n: f64, n: usize) -> usize {
    let full = n.saturating_sub(1);
    match kernel.support_radius() {
        Some(r) => {
            let span = libm::ceil(r / b_n);
            if span >= full as f64 {
                full
            } else {
                span as usize
            }
        }
        None => full,
    }
}

/// `ĉ_{a1a2}(u)` for every ordered pair and `0 ≤ u ≤ U`.
#[derive(Debug, Clone)]
struct LagCovariances {
    channels: usize,
    values: Vec<Vec<f64>>,
}

impl LagCovariances {
    fn get(&self, a1: usize, a2: usize) -> &[f64] {
        &self.values[a1 * self.channels + a2]
    }
}

fn lag_covariances(samples: &MultichannelSamples, max_lag: usize) -> LagCovariances {
    let r = samples.channel_count();
    let n = samples.len();
    let inv_n = 1.0 / n as f64;
    let data = samples.channels();
    let mut values = Vec::with_capacity(r * r);
    for a1 in 0..r {
        for a2 in 0..r {
            let (x1, x2) = (&data[a1], &data[a2]);
            let c: Vec<f64> = (0..=max_lag)
                .map(|u| {
                    let lead = &x1[u..];
                    let lag = &x2[..n - u];
                    lead.iter().zip(lag).map(|(p, q)| p * q).sum::<f64>() * inv_n
                })
                .collect();
            values.push(c);
        }
    }
    LagCovariances {
        channels: r,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_sample_at_zero_frequency() {
        let s = MultichannelSamples::new(vec![vec![1.0]], 1.0).unwrap();
        let grid = FrequencyGrid::new(vec![0.0]).unwrap();
        let est = estimate_cross_spectrum(&s, &Kernel::tukey_hanning(), 0.5, &grid).unwrap();
        let (re, im) = real_imag_parts(&est, 0, 0, 0.0).unwrap();
        assert!((re - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(im, 0.0);
    }

    #[test]
    fn zero_beyond_folding_frequency() {
        let s = MultichannelSamples::new(vec![vec![1.0, -0.5, 2.0], vec![0.3, 0.1, -1.0]], 2.0)
            .unwrap();
        let grid = FrequencyGrid::new(vec![-8.0 * PI, 4.0 * PI * 2.0]).unwrap();
        let est = estimate_cross_spectrum(&s, &Kernel::bartlett(), 0.3, &grid).unwrap();
        for m in est.matrices() {
            assert!(m.entries().iter().all(|z| z.re == 0.0 && z.im == 0.0));
        }
    }

    #[test]
    fn empty_grid_gives_empty_estimate() {
        let s = MultichannelSamples::new(vec![vec![1.0, 2.0]], 1.0).unwrap();
        let est =
            estimate_cross_spectrum(&s, &Kernel::tukey_hanning(), 0.5, &FrequencyGrid::default())
                .unwrap();
        assert!(est.grid().is_empty());
        assert!(est.matrices().is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            MultichannelSamples::new(vec![vec![1.0, f64::NAN]], 1.0),
            Err(Error::NonFiniteSample {
                channel: 0,
                index: 1
            })
        ));
        assert!(MultichannelSamples::new(vec![vec![1.0], vec![1.0, 2.0]], 1.0).is_err());
        assert!(MultichannelSamples::new(vec![], 1.0).is_err());
        assert!(MultichannelSamples::new(vec![vec![1.0]], 0.0).is_err());
        let s = MultichannelSamples::new(vec![vec![1.0]], 1.0).unwrap();
        let grid = FrequencyGrid::new(vec![0.0]).unwrap();
        assert!(estimate_cross_spectrum(&s, &Kernel::bartlett(), 0.0, &grid).is_err());
        assert!(FrequencyGrid::new(vec![1.0, 1.0]).is_err());
        assert!(FrequencyGrid::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn lookup_off_grid_fails() {
        let s = MultichannelSamples::new(vec![vec![1.0, 2.0]], 1.0).unwrap();
        let grid = FrequencyGrid::new(vec![0.0, 0.5]).unwrap();
        let est = estimate_cross_spectrum(&s, &Kernel::bartlett(), 0.5, &grid).unwrap();
        assert!(matches!(
            real_imag_parts(&est, 0, 0, 0.25),
            Err(Error::FrequencyNotOnGrid(_))
        ));
        assert!(matches!(
            real_imag_parts(&est, 0, 1, 0.5),
            Err(Error::ChannelOutOfRange { .. })
        ));
    }

    #[test]
    fn lag_truncation() {
        let k = Kernel::tukey_hanning();
        assert_eq!(max_lag(&k, 0.025, 10_000), 40);
        assert_eq!(max_lag(&k, 0.3, 10_000), 4);
        assert_eq!(max_lag(&k, 0.001, 100), 99);
        assert_eq!(max_lag(&k, 0.5, 1), 0);
    }

    #[test]
    fn grid_constructors() {
        let g = FrequencyGrid::zero_to_three_pi(301).unwrap();
        assert_eq!(g.len(), 301);
        assert_eq!(g.values()[0], 0.0);
        assert_eq!(g.values()[300], 3.0 * PI);
        let g = FrequencyGrid::range(0.0, 1.0, 0.25).unwrap();
        assert_eq!(g.values(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.index_of(0.75).unwrap(), 3);
    }

    #[test]
    fn mean_subtraction_removes_constant_offset() {
        let base = vec![0.5, -1.0, 0.25, 0.75, -0.5];
        let shifted: Vec<f64> = base.iter().map(|v| v + 3.0).collect();
        let grid = FrequencyGrid::new(vec![0.0, 0.7]).unwrap();
        let k = Kernel::tukey_hanning();
        let opts = EstimatorOptions {
            subtract_mean: true,
        };
        let a = estimate_cross_spectrum_with(
            &MultichannelSamples::new(vec![base], 1.0).unwrap(),
            &k,
            0.3,
            &grid,
            opts,
        )
        .unwrap();
        let b = estimate_cross_spectrum_with(
            &MultichannelSamples::new(vec![shifted], 1.0).unwrap(),
            &k,
            0.3,
            &grid,
            opts,
        )
        .unwrap();
        for (x, y) in a.matrices().iter().zip(b.matrices()) {
            assert!((x.get(0, 0).unwrap() - y.get(0, 0).unwrap()).norm() < 1e-12);
        }
    }
}
