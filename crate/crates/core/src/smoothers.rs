//! Smooth approximations `d_k` of the indicator `I(x = 0)`.
//!
//! Every family peaks at `d_k(0) = 1`, is even in `x`, and decays to zero away
//! from the origin as the sharpness `k` grows. Derivatives of any order are
//! available in closed form as polynomials multiplying the original function.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmootherError {
    #[error("sharpness k must be positive and finite, got {0}")]
    InvalidSharpness(f64),
    #[error("smoother evaluated at non-finite argument {0}")]
    NonFiniteArgument(f64),
    #[error("unknown smoother family `{0}` (expected sech, gaussian or rational)")]
    UnknownFamily(String),
}

/// Shape of the delta approximant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmootherFamily {
    /// `sech(k x)`
    Sech,
    /// `exp(-k x^2 / 2)`
    Gaussian,
    /// `1 / (1 + (k x)^2)`
    Rational,
}

impl SmootherFamily {
    pub const ALL: [SmootherFamily; 3] = [Self::Sech, Self::Gaussian, Self::Rational];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sech => "sech",
            Self::Gaussian => "gaussian",
            Self::Rational => "rational",
        }
    }
}

impl fmt::Display for SmootherFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SmootherFamily {
    type Err = SmootherError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sech" => Ok(Self::Sech),
            "gaussian" => Ok(Self::Gaussian),
            "rational" => Ok(Self::Rational),
            other => Err(SmootherError::UnknownFamily(other.to_string())),
        }
    }
}

/// A delta approximant of a given family at sharpness `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoother {
    family: SmootherFamily,
    k: f64,
}

impl Smoother {
    pub fn new(family: SmootherFamily, k: f64) -> Result<Self, SmootherError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(SmootherError::InvalidSharpness(k));
        }
        Ok(Self { family, k })
    }

    pub fn family(&self) -> SmootherFamily {
        self.family
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Length scale of the bump: `1/k`, or `1/sqrt(k)` for the Gaussian.
    pub fn width(&self) -> f64 {
        match self.family {
            SmootherFamily::Gaussian => 1.0 / self.k.sqrt(),
            SmootherFamily::Sech | SmootherFamily::Rational => 1.0 / self.k,
        }
    }

    pub fn value(&self, x: f64) -> Result<f64, SmootherError> {
        check(x)?;
        Ok(self.value_unchecked(x))
    }

    pub fn deriv1(&self, x: f64) -> Result<f64, SmootherError> {
        check(x)?;
        Ok(self.deriv1_unchecked(x))
    }

    pub fn deriv2(&self, x: f64) -> Result<f64, SmootherError> {
        check(x)?;
        Ok(self.deriv2_unchecked(x))
    }

    /// Derivative of arbitrary order (`order = 0` is the value itself).
    pub fn derivative(&self, x: f64, order: usize) -> Result<f64, SmootherError> {
        check(x)?;
        Ok(self.derivative_unchecked(x, order))
    }

    pub(crate) fn value_unchecked(&self, x: f64) -> f64 {
        let k = self.k;
        match self.family {
            SmootherFamily::Sech => sech((k * x).abs()),
            SmootherFamily::Gaussian => (-0.5 * k * x * x).exp(),
            SmootherFamily::Rational => {
                let u = k * x;
                1.0 / (1.0 + u * u)
            }
        }
    }

    pub(crate) fn deriv1_unchecked(&self, x: f64) -> f64 {
        let k = self.k;
        match self.family {
            SmootherFamily::Sech => {
                let u = k * x;
                -k * sech(u.abs()) * u.tanh()
            }
            SmootherFamily::Gaussian => match self.value_unchecked(x) {
                v if v == 0.0 => 0.0,
                v => -k * x * v,
            },
            SmootherFamily::Rational => match self.value_unchecked(x) {
                v if v == 0.0 => 0.0,
                v => -2.0 * k * k * x * v * v,
            },
        }
    }

    pub(crate) fn deriv2_unchecked(&self, x: f64) -> f64 {
        let k = self.k;
        match self.family {
            SmootherFamily::Sech => {
                let u = k * x;
                let s = sech(u.abs());
                let t = u.tanh();
                k * k * s * (t * t - s * s)
            }
            SmootherFamily::Gaussian => match self.value_unchecked(x) {
                v if v == 0.0 => 0.0,
                v => (k * k * x * x - k) * v,
            },
            SmootherFamily::Rational => match self.value_unchecked(x) {
                v if v == 0.0 => 0.0,
                v => (6.0 * k.powi(4) * x * x - 2.0 * k * k) * v * v * v,
            },
        }
    }

    pub(crate) fn derivative_unchecked(&self, x: f64, order: usize) -> f64 {
        match order {
            0 => return self.value_unchecked(x),
            1 => return self.deriv1_unchecked(x),
            2 => return self.deriv2_unchecked(x),
            _ => {}
        }
        let k = self.k;
        match self.family {
            SmootherFamily::Sech => {
                // d^n/du^n sech(u) = sech(u) * P_n(tanh u),
                // P_{n+1}(t) = -t P_n(t) + (1 - t^2) P_n'(t).
                let u = k * x;
                let s = sech(u.abs());
                if s == 0.0 {
                    return 0.0;
                }
                let poly = sech_poly(order);
                k.powi(order as i32) * s * horner(&poly, u.tanh())
            }
            SmootherFamily::Gaussian => {
                // d^n/du^n exp(-u^2/2) = (-1)^n He_n(u) exp(-u^2/2), u = sqrt(k) x.
                let root_k = k.sqrt();
                let u = root_k * x;
                let v = (-0.5 * u * u).exp();
                if v == 0.0 {
                    return 0.0;
                }
                let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                sign * root_k.powi(order as i32) * hermite_he(order, u) * v
            }
            SmootherFamily::Rational => {
                // d^n/du^n (1 + u^2)^-1 = Q_n(u) (1 + u^2)^-(n+1),
                // Q_{n+1} = (1 + u^2) Q_n' - 2 (n + 1) u Q_n.
                let u = k * x;
                if u.abs() > 1e30 {
                    return 0.0;
                }
                let r = 1.0 / (1.0 + u * u);
                let poly = rational_poly(order);
                k.powi(order as i32) * horner(&poly, u) * r.powi(order as i32 + 1)
            }
        }
    }
}

fn check(x: f64) -> Result<(), SmootherError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(SmootherError::NonFiniteArgument(x))
    }
}

/// `sech(u)` for `u >= 0`, written to avoid overflow of `cosh`.
fn sech(u: f64) -> f64 {
    let e = u.exp();
    2.0 / (e * (1.0 + (-2.0 * u).exp()))
}

/// Polynomial coefficients (ascending powers) evaluated at `x`.
fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn poly_derivative(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect()
}

fn add_into(acc: &mut Vec<f64>, p: &[f64], shift: usize, scale: f64) {
    if acc.len() < p.len() + shift {
        acc.resize(p.len() + shift, 0.0);
    }
    for (i, &c) in p.iter().enumerate() {
        acc[i + shift] += scale * c;
    }
}

fn sech_poly(order: usize) -> Vec<f64> {
    let mut p = vec![1.0];
    for _ in 0..order {
        let dp = poly_derivative(&p);
        let mut next = Vec::new();
        add_into(&mut next, &p, 1, -1.0);
        add_into(&mut next, &dp, 0, 1.0);
        add_into(&mut next, &dp, 2, -1.0);
        p = next;
    }
    p
}

fn rational_poly(order: usize) -> Vec<f64> {
    let mut p = vec![1.0];
    for n in 0..order {
        let dp = poly_derivative(&p);
        let mut next = Vec::new();
        add_into(&mut next, &dp, 0, 1.0);
        add_into(&mut next, &dp, 2, 1.0);
        add_into(&mut next, &p, 1, -2.0 * (n as f64 + 1.0));
        p = next;
    }
    p
}

/// Probabilists' Hermite polynomial `He_n(u)`.
fn hermite_he(n: usize, u: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, u);
    if n == 0 {
        return prev;
    }
    for m in 1..n {
        let next = u * cur - m as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}
