//! Bivariate continuous-time OU-mixture process and its exact sampling.
//!
//! With independent white noises `Z1, Z2, Z3` and filters
//! `h_j(u) = β_j e^{-α_j u}`:
//!
//! ```text
//! X1 = h1 * Z1 + h2 * Z2
//! X2 = h3 * Z1 + h4 * Z3
//! ```
//!
//! Each filtered component is an OU process; `h1 * Z1` and `h3 * Z1` share a
//! driver and are sampled jointly as a bivariate Gaussian AR(1), so sampled
//! values have exactly the stationary law at any spacing.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)` on stream
//! `stream`; Monte-Carlo replicates use the replicate index as the stream.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::estimator::MultichannelSamples;
use crate::spectral::SpectralMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuMixtureModel {
    pub beta: [f64; 4],
    pub alpha: [f64; 4],
}

impl Default for OuMixtureModel {
    /// `β = (1, 1, 2, 2/5)`, `α_1 = β_1 √1.5` and `α_j = β_j √3` otherwise.
    fn default() -> Self {
        let beta = [1.0, 1.0, 2.0, 0.4];
        let root3 = libm::sqrt(3.0);
        Self {
            beta,
            alpha: [
                beta[0] * libm::sqrt(1.5),
                beta[1] * root3,
                beta[2] * root3,
                beta[3] * root3,
            ],
        }
    }
}

impl OuMixtureModel {
    pub fn new(beta: [f64; 4], alpha: [f64; 4]) -> Result<Self> {
        if alpha.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(invalid("all alpha must be positive"));
        }
        if beta.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
            return Err(invalid("all beta must be positive"));
        }
        Ok(Self { beta, alpha })
    }

    /// Closed-form spectral matrix at `λ`.
    pub fn true_spectrum(&self, lambda: f64) -> SpectralMatrix {
        let [b1, b2, b3, b4] = self.beta;
        let [a1, a2, a3, a4] = self.alpha;
        let l2 = lambda * lambda;
        let c = 1.0 / (2.0 * PI);
        let phi11 = c * (b1 * b1 / (a1 * a1 + l2) + b2 * b2 / (a2 * a2 + l2));
        let phi22 = c * (b3 * b3 / (a3 * a3 + l2) + b4 * b4 / (a4 * a4 + l2));
        let den = (a1 * a1 + l2) * (a3 * a3 + l2);
        let phi12 = Complex64::new(
            c * b1 * b3 * (a1 * a3 + l2) / den,
            c * b1 * b3 * (a1 - a3) * lambda / den,
        );
        let mut m = SpectralMatrix::zeros(2);
        // Indices are in range for a 2×2 matrix.
        let _ = m.set(0, 0, Complex64::new(phi11, 0.0));
        let _ = m.set(1, 1, Complex64::new(phi22, 0.0));
        let _ = m.set(0, 1, phi12);
        let _ = m.set(1, 0, phi12.conj());
        m
    }

    /// `C_{a1a2}(τ) = E[X_{a1}(t+τ) X_{a2}(t)]` for 0-based channels.
    pub fn true_covariance(&self, a1: usize, a2: usize, tau: f64) -> Result<f64> {
        let [b1, b2, b3, b4] = self.beta;
        let [al1, al2, al3, al4] = self.alpha;
        let ou = |b: f64, a: f64| b * b / (2.0 * a) * libm::exp(-a * libm::fabs(tau));
        let cross = |tau: f64| {
            let k = b1 * b3 / (al1 + al3);
            if tau >= 0.0 {
                k * libm::exp(-al1 * tau)
            } else {
                k * libm::exp(al3 * tau)
            }
        };
        match (a1, a2) {
            (0, 0) => Ok(ou(b1, al1) + ou(b2, al2)),
            (1, 1) => Ok(ou(b3, al3) + ou(b4, al4)),
            (0, 1) => Ok(cross(tau)),
            (1, 0) => Ok(cross(-tau)),
            (a, _) if a > 1 => Err(Error::ChannelOutOfRange {
                index: a,
                channels: 2,
            }),
            (_, b) => Err(Error::ChannelOutOfRange {
                index: b,
                channels: 2,
            }),
        }
    }

    /// `A_{a1a2} = lim_{λ→∞} |λ² φ_{a1a2}(λ)|`.
    pub fn tail_constant(&self, a1: usize, a2: usize) -> Result<f64> {
        let [b1, b2, b3, b4] = self.beta;
        let c = 1.0 / (2.0 * PI);
        match (a1, a2) {
            (0, 0) => Ok(c * (b1 * b1 + b2 * b2)),
            (1, 1) => Ok(c * (b3 * b3 + b4 * b4)),
            (0, 1) | (1, 0) => Ok(c * b1 * b3),
            (a, b) => Err(Error::ChannelOutOfRange {
                index: a.max(b),
                channels: 2,
            }),
        }
    }

    /// Samples `X(t/ρ_n)`, `t = 1..n`, starting from the stationary law.
    pub fn simulate(&self, n: usize, rho_n: f64, seed: u64) -> Result<SimOutput> {
        self.simulate_stream(n, rho_n, seed, 0)
    }

    pub fn simulate_stream(
        &self,
        n: usize,
        rho_n: f64,
        seed: u64,
        stream: u64,
    ) -> Result<SimOutput> {
        if n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if !(rho_n > 0.0 && rho_n.is_finite()) {
            return Err(invalid("sampling rate must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

        let dt = 1.0 / rho_n;
        let [b1, b2, b3, b4] = self.beta;
        let [a1, a2, a3, a4] = self.alpha;

        // Shared-driver pair (U1, V1).
        let decay_u1 = libm::exp(-a1 * dt);
        let decay_v1 = libm::exp(-a3 * dt);
        let stationary = Cholesky2::new(
            b1 * b1 / (2.0 * a1),
            b1 * b3 / (a1 + a3),
            b3 * b3 / (2.0 * a3),
        )?;
        let innovation = Cholesky2::new(
            b1 * b1 * -libm::expm1(-2.0 * a1 * dt) / (2.0 * a1),
            b1 * b3 * -libm::expm1(-(a1 + a3) * dt) / (a1 + a3),
            b3 * b3 * -libm::expm1(-2.0 * a3 * dt) / (2.0 * a3),
        )?;
        // Independent scalar components U2, V2.
        let decay_u2 = libm::exp(-a2 * dt);
        let decay_v2 = libm::exp(-a4 * dt);
        let sd_u2 = libm::sqrt(b2 * b2 / (2.0 * a2));
        let sd_v2 = libm::sqrt(b4 * b4 / (2.0 * a4));
        let step_u2 = libm::sqrt(b2 * b2 * -libm::expm1(-2.0 * a2 * dt) / (2.0 * a2));
        let step_v2 = libm::sqrt(b4 * b4 * -libm::expm1(-2.0 * a4 * dt) / (2.0 * a4));

        let (mut u1, mut v1) = stationary.apply(normal(), normal());
        let mut u2 = sd_u2 * normal();
        let mut v2 = sd_v2 * normal();

        let mut x1 = Vec::with_capacity(n);
        let mut x2 = Vec::with_capacity(n);
        x1.push(u1 + u2);
        x2.push(v1 + v2);
        for _ in 1..n {
            let (e1, e3) = innovation.apply(normal(), normal());
            u1 = decay_u1 * u1 + e1;
            v1 = decay_v1 * v1 + e3;
            u2 = decay_u2 * u2 + step_u2 * normal();
            v2 = decay_v2 * v2 + step_v2 * normal();
            x1.push(u1 + u2);
            x2.push(v1 + v2);
        }
        Ok(SimOutput {
            samples: MultichannelSamples::new(alloc::vec![x1, x2], rho_n)?,
            seed,
            stream,
            model: *self,
        })
    }
}

/// Lower Cholesky factor of `[[a, b], [b, c]]`.
struct Cholesky2 {
    l11: f64,
    l21: f64,
    l22: f64,
}

impl Cholesky2 {
    fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let l11 = libm::sqrt(a);
        let l21 = b / l11;
        let rest = c - l21 * l21;
        if !(a > 0.0 && rest > 0.0) {
            return Err(invalid("covariance is not positive definite"));
        }
        Ok(Self {
            l11,
            l21,
            l22: libm::sqrt(rest),
        })
    }

    fn apply(&self, z1: f64, z2: f64) -> (f64, f64) {
        (self.l11 * z1, self.l21 * z1 + self.l22 * z2)
    }
}

/// Simulated record with the provenance needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub samples: MultichannelSamples,
    pub seed: u64,
    pub stream: u64,
    pub model: OuMixtureModel,
}
