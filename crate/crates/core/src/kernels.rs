//! Covariance-averaging kernels (lag windows).
//!
//! A kernel `K` weights the lag-`u` sample covariance by `K(b_n u)`. Every
//! kernel must be continuous, even, square integrable, dominated by an even
//! integrable envelope peaking at zero, and satisfy `K(0) = 1`. Only the
//! pointwise parts of that contract (evenness, normalization, `|K| ≤ 1`)
//! are probed when a kernel is registered; continuity, integrability and
//! the envelope condition remain the caller's responsibility.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};
use crate::numeric::{integrate, integrate_to_infinity};

/// Number of probe points on each side of zero used by registration checks.
const PROBE_POINTS: usize = 1000;

/// Half-width of the probe grid for kernels with unbounded support.
const UNBOUNDED_PROBE_RADIUS: f64 = 10.0;

/// Default candidate set for [`characteristic_exponent`].
pub const DEFAULT_EXPONENT_CANDIDATES: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A covariance-averaging kernel with its support bound.
#[derive(Clone)]
pub struct Kernel {
    name: String,
    eval: KernelFn,
    support_radius: Option<f64>,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

impl Kernel {
    /// Registers a user kernel. `support_radius` is the smallest `R` with
    /// `K(x) = 0` for `|x| > R`, or `None` when the support is unbounded.
    ///
    /// The kernel is probed on a symmetric grid of 2·10³ points: it must be
    /// exactly even there, bounded by one in magnitude, and equal one at zero.
    pub fn new<F>(name: impl Into<String>, support_radius: Option<f64>, eval: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        let reject = |reason: String| Error::KernelRejected {
            name: name.clone(),
            reason,
        };
        if let Some(r) = support_radius {
            if !(r.is_finite() && r >= 0.0) {
                return Err(reject(format!(
                    "support radius {r} must be finite and non-negative"
                )));
            }
        }
        let k0 = eval(0.0);
        if k0 != 1.0 {
            return Err(reject(format!("K(0) = {k0}, expected 1")));
        }
        let radius = support_radius.unwrap_or(UNBOUNDED_PROBE_RADIUS) * 1.25;
        for i in 1..=PROBE_POINTS {
            let x = radius * i as f64 / PROBE_POINTS as f64;
            let (right, left) = (eval(x), eval(-x));
            if !right.is_finite() {
                return Err(reject(format!("K({x}) is not finite")));
            }
            if right != left {
                return Err(reject(format!("not even at x = {x}: {right} vs {left}")));
            }
            if libm::fabs(right) > 1.0 {
                return Err(reject(format!(
                    "|K({x})| = {} exceeds 1",
                    libm::fabs(right)
                )));
            }
        }
        Ok(Self {
            name,
            eval: Arc::new(eval),
            support_radius,
        })
    }

    /// `K(x) = ½{1 + cos(πx)}` on `[-1, 1]`, zero outside.
    pub fn tukey_hanning() -> Self {
        Self::builtin("tukey-hanning", |x| {
            let x = libm::fabs(x);
            if x <= 1.0 {
                0.5 * (1.0 + libm::cos(PI * x))
            } else {
                0.0
            }
        })
    }

    /// `K(x) = 1 - |x|` on `[-1, 1]`.
    pub fn bartlett() -> Self {
        Self::builtin("bartlett", |x| {
            let x = libm::fabs(x);
            if x <= 1.0 {
                1.0 - x
            } else {
                0.0
            }
        })
    }

    /// Indicator of `[-1, 1]`.
    pub fn rectangular() -> Self {
        Self::builtin(
            "rectangular",
            |x| if libm::fabs(x) <= 1.0 { 1.0 } else { 0.0 },
        )
    }

    /// Looks up a built-in kernel by its CLI name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "tukey-hanning" => Ok(Self::tukey_hanning()),
            "bartlett" => Ok(Self::bartlett()),
            "rectangular" => Ok(Self::rectangular()),
            other => Err(crate::error::invalid(format!(
                "unknown kernel `{other}` (expected tukey-hanning, bartlett or rectangular)"
            ))),
        }
    }

    fn builtin(name: &str, eval: fn(f64) -> f64) -> Self {
        Self {
            name: name.to_string(),
            eval: Arc::new(eval),
            support_radius: Some(1.0),
        }
    }

    #[inline]
    pub fn evaluate(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }
}

/// `B = ½ ∫ K²(x) dx`, by adaptive quadrature over the support.
pub fn kernel_b(kernel: &Kernel) -> Result<f64> {
    const TOL: f64 = 1e-12;
    let square = |x: f64| {
        let k = kernel.evaluate(x);
        k * k
    };
    // K is even, so integrate the right half; splitting at zero also keeps
    // kinks such as Bartlett's on a panel boundary.
    let half = match kernel.support_radius {
        Some(0.0) => {
            return Err(Error::KernelRejected {
                name: kernel.name.clone(),
                reason: "support has zero width, so ∫K² = 0".to_string(),
            })
        }
        Some(r) => integrate(square, 0.0, r, TOL)?,
        None => integrate_to_infinity(square, 0.0, TOL)?,
    };
    Ok(half)
}

/// Constants of a kernel that enter the asymptotic formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    pub b: f64,
    pub char_exponent: f64,
    pub k_s: f64,
}

impl KernelConstants {
    pub fn of(kernel: &Kernel) -> Result<Self> {
        let b = kernel_b(kernel)?;
        let (char_exponent, k_s) = characteristic_exponent(kernel, &DEFAULT_EXPONENT_CANDIDATES)?;
        Ok(Self {
            b,
            char_exponent,
            k_s,
        })
    }
}

/// Finds the characteristic exponent: the largest candidate `s` for which
/// `(1 - K(x)) / |x|^s` settles to a finite nonzero limit along `x = 2^-j`.
///
/// A candidate has settled once two successive relative changes (three
/// consecutive `j`) are both below 1e-4. Returns `(s, k_s)`.
pub fn characteristic_exponent(kernel: &Kernel, candidates: &[f64]) -> Result<(f64, f64)> {
    if candidates.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(crate::error::invalid(
            "exponent candidates must be positive",
        ));
    }
    if candidates.windows(2).any(|w| w[0] >= w[1]) {
        return Err(crate::error::invalid(
            "exponent candidates must be strictly ascending",
        ));
    }
    candidates
        .iter()
        .rev()
        .find_map(|&s| settled_limit(kernel, s).map(|k| (s, k)))
        .ok_or_else(|| Error::NoCharacteristicExponent(kernel.name.clone()))
}

fn settled_limit(kernel: &Kernel, s: f64) -> Option<f64> {
    const REL_TOL: f64 = 1e-4;
    const MAX_HALVINGS: i32 = 40;
    let mut history: Vec<f64> = Vec::with_capacity(MAX_HALVINGS as usize);
    for j in 1..=MAX_HALVINGS {
        let x = libm::exp2(-(j as f64));
        let deficit = 1.0 - kernel.evaluate(x);
        if deficit == 0.0 {
            // Either the kernel is flat at zero or 1 - K has underflowed;
            // in both cases no nonzero limit is visible.
            return None;
        }
        let ratio = deficit / libm::pow(x, s);
        if !ratio.is_finite() {
            return None;
        }
        history.push(ratio);
        if let [.., a, b, c] = history[..] {
            let settled =
                |prev: f64, next: f64| libm::fabs(next - prev) < REL_TOL * libm::fabs(next);
            if settled(a, b) && settled(b, c) {
                return Some(c);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tukey_hanning_values() {
        let k = Kernel::tukey_hanning();
        assert_eq!(k.evaluate(0.0), 1.0);
        assert_eq!(k.evaluate(1.5), 0.0);
        assert!((k.evaluate(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(k.support_radius(), Some(1.0));
    }

    #[test]
    fn shipped_kernels_pass_registration_checks() {
        for k in [
            Kernel::tukey_hanning(),
            Kernel::bartlett(),
            Kernel::rectangular(),
        ] {
            let name = k.name().to_string();
            let eval = k.clone();
            Kernel::new(name, k.support_radius(), move |x| eval.evaluate(x)).unwrap();
        }
    }

    #[test]
    fn registration_rejects_misuse() {
        assert!(matches!(
            Kernel::new("half", Some(1.0), |x: f64| 0.5 * (1.0 - x.abs()).max(0.0)),
            Err(Error::KernelRejected { .. })
        ));
        assert!(Kernel::new("odd", Some(1.0), |x: f64| if x.abs() <= 1.0 {
            1.0 - x
        } else {
            0.0
        })
        .is_err());
        assert!(Kernel::new("big", None, |x: f64| 1.0 + x * x).is_err());
        assert!(Kernel::new("negative-support", Some(-1.0), |_| 1.0).is_err());
    }

    #[test]
    fn b_constants() {
        assert!((kernel_b(&Kernel::tukey_hanning()).unwrap() - 0.375).abs() < 1e-10);
        assert!((kernel_b(&Kernel::rectangular()).unwrap() - 1.0).abs() < 1e-10);
        assert!((kernel_b(&Kernel::bartlett()).unwrap() - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn b_of_unbounded_gaussian_kernel() {
        let k = Kernel::new("gauss", None, |x: f64| libm::exp(-0.5 * x * x)).unwrap();
        // ½ ∫ e^{-x²} dx = √π / 2
        let expected = 0.5 * libm::sqrt(PI);
        assert!((kernel_b(&k).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn b_rejects_degenerate_and_non_integrable() {
        let point = Kernel::new(
            "point",
            Some(0.0),
            |x: f64| if x == 0.0 { 1.0 } else { 0.0 },
        )
        .unwrap();
        assert!(kernel_b(&point).is_err());
        let flat = Kernel::new("flat", None, |_| 1.0).unwrap();
        assert!(matches!(
            kernel_b(&flat),
            Err(Error::QuadratureNotConverged { .. })
        ));
    }

    #[test]
    fn characteristic_exponents() {
        let (s, ks) = characteristic_exponent(&Kernel::tukey_hanning(), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s, 2.0);
        assert!((ks - PI * PI / 4.0).abs() < 1e-3, "k_s = {ks}");

        let (s, ks) =
            characteristic_exponent(&Kernel::bartlett(), &DEFAULT_EXPONENT_CANDIDATES).unwrap();
        assert_eq!(s, 1.0);
        assert!((ks - 1.0).abs() < 1e-12);

        assert!(matches!(
            characteristic_exponent(&Kernel::rectangular(), &DEFAULT_EXPONENT_CANDIDATES),
            Err(Error::NoCharacteristicExponent(_))
        ));
    }

    #[test]
    fn exponent_outside_candidates_is_an_error() {
        assert!(characteristic_exponent(&Kernel::tukey_hanning(), &[3.0, 4.0]).is_err());
        assert!(characteristic_exponent(&Kernel::tukey_hanning(), &[2.0, 1.0]).is_err());
    }

    #[test]
    fn kernel_by_name() {
        assert_eq!(Kernel::by_name("bartlett").unwrap().name(), "bartlett");
        assert!(Kernel::by_name("parzen").is_err());
    }
}
