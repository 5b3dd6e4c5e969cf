//! Bandwidth and sampling-rate schedules.
//!
//! A [`RatePlan`] maps the record length `n` to the kernel bandwidth
//! `b_n = c_b n^{e_b}` and the sampling rate `ρ_n = c_ρ n^{e_ρ}`. Whether a
//! plan meets the asymptotic conditions is decided from the exponents alone:
//!
//! - `n b_n → ∞`
//! - `ρ_n → ∞` and `ρ_n b_n → 0`
//! - `√(n b_n)(ρ_n b_n)^q → 0` and `√(n b_n) / ρ_n^p → 0` (bias-free CLT)

use alloc::format;
use core::fmt;
use core::str::FromStr;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, ToPrimitive};

use crate::error::{Error, Result};

/// A real exponent, kept as an exact rational whenever its inputs were.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Exact(Rational64),
    Approx(f64),
}

impl Exponent {
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Exponent::Exact(Rational64::new(numer, denom))
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Exponent::Approx(x) => x,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Exponent::Exact(_))
    }

    fn combine(
        self,
        other: Self,
        exact: impl Fn(&Rational64, &Rational64) -> Option<Rational64>,
        approx: impl Fn(f64, f64) -> f64,
    ) -> Self {
        match (self, other) {
            (Exponent::Exact(a), Exponent::Exact(b)) => match exact(&a, &b) {
                Some(r) => Exponent::Exact(r),
                None => Exponent::Approx(approx(self.value(), other.value())),
            },
            _ => Exponent::Approx(approx(self.value(), other.value())),
        }
    }

    fn is_negative(self) -> bool {
        match self {
            Exponent::Exact(r) => r < Rational64::from_integer(0),
            Exponent::Approx(x) => x < 0.0,
        }
    }

    fn is_positive(self) -> bool {
        match self {
            Exponent::Exact(r) => r > Rational64::from_integer(0),
            Exponent::Approx(x) => x > 0.0,
        }
    }
}

macro_rules! exponent_op {
    ($trait:ident, $method:ident, $checked:ident, $op:tt) => {
        impl core::ops::$trait for Exponent {
            type Output = Exponent;

            fn $method(self, other: Self) -> Self {
                self.combine(other, |a, b| a.$checked(b), |a, b| a $op b)
            }
        }
    };
}

exponent_op!(Add, add, checked_add, +);
exponent_op!(Sub, sub, checked_sub, -);
exponent_op!(Mul, mul, checked_mul, *);
exponent_op!(Div, div, checked_div, /);

impl core::ops::Neg for Exponent {
    type Output = Exponent;

    fn neg(self) -> Self {
        match self {
            Exponent::Exact(r) => Exponent::Exact(-r),
            Exponent::Approx(x) => Exponent::Approx(-x),
        }
    }
}

impl From<i64> for Exponent {
    fn from(v: i64) -> Self {
        Exponent::Exact(Rational64::from_integer(v))
    }
}

impl From<f64> for Exponent {
    fn from(v: f64) -> Self {
        Exponent::Approx(v)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Exact(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Exponent::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Exponent::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Accepts `a/b`, integers and plain decimals (all exact), falling back
    /// to a float for anything else `f64` can parse (e.g. `1e-3`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || crate::error::invalid(format!("cannot parse exponent `{s}`"));
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| bad())?;
            let den: i64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            return Ok(Exponent::ratio(num, den));
        }
        if let Some(r) = parse_decimal(s) {
            return Ok(Exponent::Exact(r));
        }
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Exponent::Approx)
            .ok_or_else(bad)
    }
}

fn parse_decimal(s: &str) -> Option<Rational64> {
    let (negative, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let mut numer: i64 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        numer = numer.checked_mul(10)?.checked_add(i64::from(b - b'0'))?;
    }
    let denom = 10i64.checked_pow(u32::try_from(frac_part.len()).ok()?)?;
    let r = Rational64::new(numer, denom);
    Some(if negative { -r } else { r })
}

/// Rate-optimal exponents for given spectral decay `p` and smoothness `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalExponents {
    pub bn_exponent: Exponent,
    pub rho_exponent: Exponent,
    /// `1/√(n b_n)` decays like `n^{-rate_exponent}`.
    pub rate_exponent: Exponent,
}

/// Exponents giving the fastest CLT scale under the bias-free rate
/// conditions: with `D = p + q + 2pq`, `b_n ~ n^{-(p+q)/D}`,
/// `ρ_n ~ n^{q/D}` and `1/√(n b_n) ~ n^{-pq/D}`.
pub fn optimal_exponents(p: Exponent, q: Exponent) -> Result<OptimalExponents> {
    let one = Exponent::from(1);
    for (name, v) in [("p", p), ("q", q)] {
        if !(v - one).is_positive() {
            return Err(Error::ExponentOutOfRange(format!(
                "{name} = {v} must exceed 1"
            )));
        }
    }
    let sum = p + q;
    let denom = sum + Exponent::from(2) * p * q;
    Ok(OptimalExponents {
        bn_exponent: -(sum / denom),
        rho_exponent: q / denom,
        rate_exponent: p * q / denom,
    })
}

/// Bandwidth and sampling-rate schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePlan {
    pub bn_constant: f64,
    pub bn_exponent: Exponent,
    pub rho_constant: f64,
    pub rho_exponent: Exponent,
    /// Spectral decay order assumed for the process.
    pub p: Exponent,
    /// Smoothness order assumed for the spectrum.
    pub q: Exponent,
}

/// Rates at a particular `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateValues {
    pub b_n: f64,
    pub rho_n: f64,
    /// `b_n` was capped at 1.
    pub bn_clamped: bool,
    /// `ρ_n` was raised to 1.
    pub rho_clamped: bool,
}

impl RateValues {
    pub fn clamped(&self) -> bool {
        self.bn_clamped || self.rho_clamped
    }
}

impl RatePlan {
    /// `b_n = ¼ n^{-1/4}`, `ρ_n = 4 n^{1/6}` with `p = q = 2`.
    pub fn study_default() -> Self {
        Self {
            bn_constant: 0.25,
            bn_exponent: Exponent::ratio(-1, 4),
            rho_constant: 4.0,
            rho_exponent: Exponent::ratio(1, 6),
            p: Exponent::from(2),
            q: Exponent::from(2),
        }
    }

    /// Optimal exponents for `(p, q)` with the constants `(¼, 4)`.
    pub fn optimal(p: Exponent, q: Exponent) -> Result<Self> {
        let opt = optimal_exponents(p, q)?;
        Ok(Self {
            bn_constant: 0.25,
            bn_exponent: opt.bn_exponent,
            rho_constant: 4.0,
            rho_exponent: opt.rho_exponent,
            p,
            q,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, c) in [
            ("bn constant", self.bn_constant),
            ("rho constant", self.rho_constant),
        ] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(crate::error::invalid(format!(
                    "{name} must be positive, got {c}"
                )));
            }
        }
        for (name, e) in [
            ("bn exponent", self.bn_exponent),
            ("rho exponent", self.rho_exponent),
        ] {
            if !e.value().is_finite() {
                return Err(crate::error::invalid(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Evaluates the plan at `n ≥ 1`, clamping `b_n ≤ 1` and `ρ_n ≥ 1`.
    pub fn evaluate(&self, n: usize) -> RateValues {
        let n = n.max(1) as f64;
        let b = self.bn_constant * libm::pow(n, self.bn_exponent.value());
        let rho = self.rho_constant * libm::pow(n, self.rho_exponent.value());
        RateValues {
            b_n: b.min(1.0),
            rho_n: rho.max(1.0),
            bn_clamped: b > 1.0,
            rho_clamped: rho < 1.0,
        }
    }

    /// `n b_n → ∞`.
    pub fn assumption3_holds(&self) -> bool {
        (Exponent::from(1) + self.bn_exponent).is_positive()
    }

    /// `ρ_n → ∞` and `ρ_n b_n → 0`.
    pub fn assumption4_holds(&self) -> bool {
        self.rho_exponent.is_positive() && (self.rho_exponent + self.bn_exponent).is_negative()
    }

    /// `√(n b_n)(ρ_n b_n)^q → 0` and `√(n b_n)/ρ_n^p → 0`.
    pub fn assumption4a_holds(&self) -> bool {
        let half_scale = (Exponent::from(1) + self.bn_exponent) / Exponent::from(2);
        let smoothing = half_scale + self.q * (self.rho_exponent + self.bn_exponent);
        let aliasing = half_scale - self.p * self.rho_exponent;
        smoothing.is_negative() && aliasing.is_negative()
    }
}
