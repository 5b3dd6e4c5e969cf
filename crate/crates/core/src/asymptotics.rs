//! Limiting covariance of the estimator, normalized statistics, pointwise
//! confidence intervals and the leading-order bias expansion.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::estimator::SpectralEstimate;
use crate::numeric::{integrate_to_infinity, normal_quantile};
use crate::spectral::SpectralMatrix;

/// Which of the four frequency-pair sets `(λ1, λ2)` falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyRelation {
    /// `λ1 ≠ ±λ2`: asymptotically uncorrelated.
    Distinct,
    /// `λ1 = λ2 ≠ 0`.
    Equal,
    /// `λ1 = -λ2 ≠ 0`.
    Opposite,
    /// `λ1 = λ2 = 0`.
    BothZero,
}

impl FrequencyRelation {
    /// Classifies by exact comparison; callers pass grid values verbatim.
    #[allow(clippy::float_cmp)]
    pub fn classify(lambda1: f64, lambda2: f64) -> Self {
        if lambda1 == 0.0 && lambda2 == 0.0 {
            FrequencyRelation::BothZero
        } else if lambda1 - lambda2 == 0.0 {
            FrequencyRelation::Equal
        } else if lambda1 + lambda2 == 0.0 {
            FrequencyRelation::Opposite
        } else {
            FrequencyRelation::Distinct
        }
    }

    fn indicators(self) -> (f64, f64, f64) {
        match self {
            FrequencyRelation::Distinct => (0.0, 0.0, 0.0),
            FrequencyRelation::Equal => (1.0, 0.0, 0.0),
            FrequencyRelation::Opposite => (0.0, 1.0, 0.0),
            FrequencyRelation::BothZero => (0.0, 0.0, 1.0),
        }
    }
}

/// `lim n b_n Cov[(Re φ̂_{a1a2}(λ1), Im φ̂_{a1a2}(λ1)), (Re φ̂_{a3a4}(λ2), Im φ̂_{a3a4}(λ2))]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SigmaBlock {
    pub s11: f64,
    pub s12: f64,
    pub s21: f64,
    pub s22: f64,
}

/// Channel quadruple `(a1, a2, a3, a4)` pairing `φ̂_{a1a2}` with `φ̂_{a3a4}`.
pub type ChannelQuad = (usize, usize, usize, usize);

/// Limiting covariance block evaluated with the spectral matrix `phi` taken
/// at `λ2` (true or plug-in).
pub fn sigma_block(
    phi: &SpectralMatrix,
    (a1, a2, a3, a4): ChannelQuad,
    lambda1: f64,
    lambda2: f64,
    b: f64,
) -> Result<SigmaBlock> {
    let f13 = phi.get(a1, a3)?;
    let f24 = phi.get(a2, a4)?;
    let f14 = phi.get(a1, a4)?;
    let f23 = phi.get(a2, a3)?;
    let (e2, e3, e4) = FrequencyRelation::classify(lambda1, lambda2).indicators();

    let s11 = b * (f13.conj() * f24 + f14.conj() * f23).re * (e2 + e3 + 2.0 * e4);
    let s12 = b * (f13 * f24.conj() + f14.conj() * f23).im * (e2 + e3);
    let s21 = b * (f13.conj() * f24 + f14.conj() * f23).im * (e2 - e3);
    let s22 = b * (f13 * f24.conj() - f14 * f23.conj()).re * (e2 - e3);
    Ok(SigmaBlock { s11, s12, s21, s22 })
}

/// The four bivariate normalized statistics at one frequency; `None` marks
/// a statistic that is undefined (nonpositive variance radicand, or the
/// imaginary part at `λ = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormalizedStats {
    /// `φ11`
    pub t1: Option<f64>,
    /// `φ22`
    pub t2: Option<f64>,
    /// `Re φ12`
    pub t3: Option<f64>,
    /// `Im φ12`
    pub t4: Option<f64>,
}

impl NormalizedStats {
    pub fn as_array(&self) -> [Option<f64>; 4] {
        [self.t1, self.t2, self.t3, self.t4]
    }
}

fn studentize(diff: f64, radicand: f64, root_nb: f64) -> Option<f64> {
    if radicand > 0.0 && radicand.is_finite() {
        let t = root_nb * diff / libm::sqrt(radicand);
        t.is_finite().then_some(t)
    } else {
        None
    }
}

/// `T1..T4` for a bivariate estimate: true spectra in the numerators,
/// plug-in estimated spectra in the variance denominators.
pub fn normalized_stats(
    plug_in: &SpectralMatrix,
    truth: &SpectralMatrix,
    lambda: f64,
    n: usize,
    b_n: f64,
    b: f64,
) -> Result<NormalizedStats> {
    if plug_in.channels() != 2 || truth.channels() != 2 {
        return Err(invalid(
            "normalized statistics are defined for two channels",
        ));
    }
    let root_nb = libm::sqrt(n as f64 * b_n);
    let at_zero = lambda == 0.0;
    let zero_factor = if at_zero { 2.0 } else { 1.0 };

    let p11 = plug_in.get(0, 0)?.re;
    let p22 = plug_in.get(1, 1)?.re;
    let p12 = plug_in.get(0, 1)?;
    let (re2, im2) = (p12.re * p12.re, p12.im * p12.im);
    let t12 = truth.get(0, 1)?;

    let t1 = studentize(
        p11 - truth.get(0, 0)?.re,
        2.0 * zero_factor * b * p11 * p11,
        root_nb,
    );
    let t2 = studentize(
        p22 - truth.get(1, 1)?.re,
        2.0 * zero_factor * b * p22 * p22,
        root_nb,
    );
    let t3 = studentize(
        p12.re - t12.re,
        zero_factor * b * (p11 * p22 + re2 - im2),
        root_nb,
    );
    let t4 = if at_zero {
        None
    } else {
        studentize(p12.im - t12.im, b * (p11 * p22 - re2 + im2), root_nb)
    };
    Ok(NormalizedStats { t1, t2, t3, t4 })
}

/// [`normalized_stats`] at a grid frequency of `est`, using its metadata.
pub fn normalized_stats_at(
    est: &SpectralEstimate,
    truth: &SpectralMatrix,
    lambda: f64,
) -> Result<NormalizedStats> {
    let meta = est.meta();
    normalized_stats(
        est.at(lambda)?,
        truth,
        lambda,
        meta.n,
        meta.b_n,
        meta.b_constant,
    )
}

/// Two-sided normal critical value `z_{(1+level)/2}`.
pub fn critical_value(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid("confidence level must lie in (0, 1)"));
    }
    normal_quantile(0.5 * (1.0 + level))
}

/// `estimate ± z √(sigma_diag / (n b_n))`.
pub fn confidence_interval(
    estimate: f64,
    sigma_diag: f64,
    n: usize,
    b_n: f64,
    level: f64,
) -> Result<(f64, f64)> {
    if !(sigma_diag >= 0.0) {
        return Err(invalid("variance must be non-negative"));
    }
    let z = critical_value(level)?;
    let half = z * libm::sqrt(sigma_diag / (n as f64 * b_n));
    Ok((estimate - half, estimate + half))
}

/// Real or imaginary component of a complex spectral value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Re,
    Im,
}

impl Component {
    fn of(self, z: Complex64) -> f64 {
        match self {
            Component::Re => z.re,
            Component::Im => z.im,
        }
    }
}

/// Leading bias terms of one component of `φ̂_{a1a2}(λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasTerms {
    /// Kernel smoothing, order `(ρ_n b_n)^q`.
    pub kernel_term: f64,
    /// Finite record, order `ρ_n / n`.
    pub edge_term: f64,
    /// Aliasing, order `ρ_n^{-p}`.
    pub alias_term: f64,
    pub total: f64,
}

/// Inputs to [`bias_terms`].
#[derive(Clone, Copy)]
pub struct BiasInputs<'a> {
    /// Cross-covariance `τ ↦ C_{a1a2}(τ)`.
    pub covariance: &'a dyn Fn(f64) -> f64,
    pub lambda: f64,
    /// Kernel characteristic exponent and its constant `k_q`.
    pub q: f64,
    pub k_q: f64,
    /// Spectral decay order and `A = lim |λ^p φ_{a1a2}(λ)|`.
    pub p: f64,
    pub a: f64,
    pub b_n: f64,
    pub rho_n: f64,
    pub n: usize,
}

/// Three-term bias expansion:
///
/// ```text
/// -(k_q/2π) ∫|t|^q C(t) e^{-itλ} dt · (ρ_n b_n)^q
/// -(1/2π) ∫|t| C(t) e^{-itλ} dt · ρ_n/n
/// + A/(2π)^p Σ_{l≠0} |l|^{-p} · ρ_n^{-p}
/// ```
///
/// The aliasing term has no frequency dependence at this order and is
/// applied to whichever component is requested.
pub fn bias_terms(inputs: &BiasInputs<'_>, component: Component) -> Result<BiasTerms> {
    let two_pi = 2.0 * PI;
    let moment_q = weighted_fourier(inputs.covariance, inputs.q, inputs.lambda)?;
    let moment_1 = weighted_fourier(inputs.covariance, 1.0, inputs.lambda)?;
    let kernel_term = -inputs.k_q / two_pi
        * component.of(moment_q)
        * libm::pow(inputs.rho_n * inputs.b_n, inputs.q);
    let edge_term = -component.of(moment_1) / two_pi * inputs.rho_n / inputs.n as f64;
    let alias_term = inputs.a / libm::pow(two_pi, inputs.p)
        * lattice_zeta(inputs.p)?
        * libm::pow(inputs.rho_n, -inputs.p);
    Ok(BiasTerms {
        kernel_term,
        edge_term,
        alias_term,
        total: kernel_term + edge_term + alias_term,
    })
}

/// `∫ |t|^power C(t) e^{-itλ} dt` by quadrature on each half line.
pub fn weighted_fourier(
    covariance: &dyn Fn(f64) -> f64,
    power: f64,
    lambda: f64,
) -> Result<Complex64> {
    const TOL: f64 = 1e-11;
    let re = integrate_to_infinity(
        |t| libm::pow(t, power) * (covariance(t) + covariance(-t)) * libm::cos(t * lambda),
        0.0,
        TOL,
    )?;
    let im = if lambda == 0.0 {
        0.0
    } else {
        -integrate_to_infinity(
            |t| libm::pow(t, power) * (covariance(t) - covariance(-t)) * libm::sin(t * lambda),
            0.0,
            TOL,
        )?
    };
    Ok(Complex64::new(re, im))
}

/// `Σ_{l ≠ 0} |l|^{-p} = 2ζ(p)` for `p > 1`: direct sum to 100 terms plus an
/// Euler–Maclaurin tail whose truncation error is far below 1e-12.
pub fn lattice_zeta(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("lattice sum needs p > 1"));
    }
    const HEAD: u32 = 100;
    let head: f64 = (1..HEAD).map(|l| libm::pow(f64::from(l), -p)).sum();
    let n = f64::from(HEAD);
    let f = |k: f64| libm::pow(n, -p - k);
    // Σ_{l ≥ N} l^{-p} = N^{1-p}/(p-1) + N^{-p}/2 + Σ_k B_{2k}/(2k)! · (p)_{2k-1} N^{-p-2k+1}
    let tail = libm::pow(n, 1.0 - p) / (p - 1.0) + 0.5 * f(0.0) + p / 12.0 * f(1.0)
        - p * (p + 1.0) * (p + 2.0) / 720.0 * f(3.0)
        + p * (p + 1.0) * (p + 2.0) * (p + 3.0) * (p + 4.0) / 30240.0 * f(5.0);
    Ok(2.0 * (head + tail))
}
