//! Smooth surrogates of `-2ℓ(θ) + c_n p(θ)`.
//!
//! In zero-penalty mode `p` counts coefficients different from zero and the
//! surrogate count is `q - Σ d_k(θ_j)`. In fusion mode `p` counts distinct
//! parameter values; sorting the parameters, the surrogate count is
//! `q - Σ d_k(θ_(j) - θ_(j-1))` over adjacent sorted gaps. Only coordinates
//! flagged as penalized take part in either count.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::models::{LikelihoodModel, ModelError};
use crate::smoothers::{Smoother, SmootherError, SmootherFamily};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Smoother(#[from] SmootherError),
    #[error("expected {expected} parameters, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter index {index} out of range for {q} parameters")]
    IndexOutOfRange { index: usize, q: usize },
    #[error("information-criterion weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("unrecognized objective `{0}` (expected aic, bic or gic:<weight>)")]
    UnknownObjective(String),
    #[error("parameter vector contains non-finite values")]
    NonFiniteParameter,
    #[error("log-likelihood evaluated to a non-finite value")]
    NonFiniteLikelihood,
    #[error("model does not provide likelihood derivatives of order {0}")]
    DerivativeUnavailable(usize),
}

/// Weight `c_n` on the free-parameter count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IcWeight {
    /// `c_n = 2`
    Aic,
    /// `c_n = ln n`
    Bic,
    /// User-chosen constant.
    Gic(f64),
}

impl IcWeight {
    pub fn value(&self, n: usize) -> Result<f64, ObjectiveError> {
        let c = match *self {
            IcWeight::Aic => 2.0,
            IcWeight::Bic => (n as f64).ln(),
            IcWeight::Gic(c) => c,
        };
        if c.is_finite() && c > 0.0 {
            Ok(c)
        } else {
            Err(ObjectiveError::InvalidWeight(c))
        }
    }
}

impl fmt::Display for IcWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IcWeight::Aic => f.write_str("aic"),
            IcWeight::Bic => f.write_str("bic"),
            IcWeight::Gic(c) => write!(f, "gic:{c}"),
        }
    }
}

impl FromStr for IcWeight {
    type Err = ObjectiveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "aic" => Ok(IcWeight::Aic),
            "bic" => Ok(IcWeight::Bic),
            other => {
                let c = other
                    .strip_prefix("gic:")
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .ok_or_else(|| ObjectiveError::UnknownObjective(s.to_string()))?;
                if c.is_finite() && c > 0.0 {
                    Ok(IcWeight::Gic(c))
                } else {
                    Err(ObjectiveError::InvalidWeight(c))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyMode {
    /// Count parameters that differ from zero.
    ZeroPenalty,
    /// Count distinct parameter values.
    FusionPenalty,
}

impl fmt::Display for PenaltyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PenaltyMode::ZeroPenalty => "zero",
            PenaltyMode::FusionPenalty => "fusion",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec {
    pub mode: PenaltyMode,
    pub family: SmootherFamily,
    pub weight: IcWeight,
    /// Coordinates subject to the penalty; `None` defers to the model.
    pub penalized: Option<Vec<bool>>,
}

impl PenaltySpec {
    pub fn new(mode: PenaltyMode, family: SmootherFamily, weight: IcWeight) -> Self {
        Self {
            mode,
            family,
            weight,
            penalized: None,
        }
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Self {
        self.penalized = Some(mask);
        self
    }

    pub(crate) fn resolve_mask<M: LikelihoodModel + ?Sized>(&self, model: &M) -> Result<Vec<bool>, ObjectiveError> {
        match &self.penalized {
            Some(mask) if mask.len() != model.q() => Err(ObjectiveError::DimensionMismatch {
                expected: model.q(),
                got: mask.len(),
            }),
            Some(mask) => Ok(mask.clone()),
            None => Ok(model.default_penalized()),
        }
    }
}

/// `q - Σ d_k(θ_(j) - θ_(j-1))` over the ascending order of `theta`.
pub fn fusion_pk(theta: &[f64], smoother: &Smoother) -> Result<f64, ObjectiveError> {
    check_finite(theta)?;
    Ok(fusion_count(theta.iter().copied(), smoother))
}

/// `∂ p_k / ∂θ_j` for [`fusion_pk`].
pub fn fusion_pk_grad(theta: &[f64], j: usize, smoother: &Smoother) -> Result<f64, ObjectiveError> {
    check_finite(theta)?;
    check_index(j, theta.len())?;
    let mask = vec![true; theta.len()];
    Ok(fusion_derivative(theta, &mask, j, theta[j], smoother, 1))
}

fn fusion_count(values: impl Iterator<Item = f64>, smoother: &Smoother) -> f64 {
    let mut sorted: Vec<f64> = values.collect();
    if sorted.is_empty() {
        return 0.0;
    }
    sorted.sort_by(f64::total_cmp);
    let close: f64 = sorted.windows(2).map(|w| smoother.value_unchecked(w[1] - w[0])).sum();
    sorted.len() as f64 - close
}

/// Nearest penalized neighbours of coordinate `j` (placed at `v`) in the
/// order by (value, index).
fn neighbours(theta: &[f64], mask: &[bool], j: usize, v: f64) -> (Option<f64>, Option<f64>) {
    let mut lower: Option<(f64, usize)> = None;
    let mut upper: Option<(f64, usize)> = None;
    for (i, (&t, &pen)) in theta.iter().zip(mask).enumerate() {
        if i == j || !pen {
            continue;
        }
        let below = t < v || (t == v && i < j);
        if below {
            if lower.is_none_or(|(lt, li)| t > lt || (t == lt && i > li)) {
                lower = Some((t, i));
            }
        } else if upper.is_none_or(|(ut, ui)| t < ut || (t == ut && i < ui)) {
            upper = Some((t, i));
        }
    }
    (lower.map(|l| l.0), upper.map(|u| u.0))
}

/// `order`-th derivative of the fusion count in coordinate `j` at `θ_j = v`.
fn fusion_derivative(theta: &[f64], mask: &[bool], j: usize, v: f64, smoother: &Smoother, order: usize) -> f64 {
    if !mask[j] {
        return 0.0;
    }
    let (lo, up) = neighbours(theta, mask, j, v);
    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
    let below = lo.map_or(0.0, |l| smoother.derivative_unchecked(v - l, order));
    let above = up.map_or(0.0, |u| sign * smoother.derivative_unchecked(u - v, order));
    -(below + above)
}

fn check_finite(theta: &[f64]) -> Result<(), ObjectiveError> {
    if theta.iter().all(|t| t.is_finite()) {
        Ok(())
    } else {
        Err(ObjectiveError::NonFiniteParameter)
    }
}

fn check_index(j: usize, q: usize) -> Result<(), ObjectiveError> {
    if j < q {
        Ok(())
    } else {
        Err(ObjectiveError::IndexOutOfRange { index: j, q })
    }
}

/// Surrogate information criterion at a fixed sharpness.
#[derive(Debug, Clone)]
pub struct SurrogateObjective<'a, M: ?Sized> {
    model: &'a M,
    mode: PenaltyMode,
    smoother: Smoother,
    c_n: f64,
    penalized: Vec<bool>,
}

impl<'a, M: LikelihoodModel + ?Sized> SurrogateObjective<'a, M> {
    pub fn new(model: &'a M, penalty: &PenaltySpec, k: f64) -> Result<Self, ObjectiveError> {
        let smoother = Smoother::new(penalty.family, k)?;
        let c_n = penalty.weight.value(model.n())?;
        let penalized = penalty.resolve_mask(model)?;
        Ok(Self {
            model,
            mode: penalty.mode,
            smoother,
            c_n,
            penalized,
        })
    }

    pub fn model(&self) -> &'a M {
        self.model
    }

    pub fn smoother(&self) -> &Smoother {
        &self.smoother
    }

    pub fn k(&self) -> f64 {
        self.smoother.k()
    }

    pub fn ic_weight(&self) -> f64 {
        self.c_n
    }

    pub fn mode(&self) -> PenaltyMode {
        self.mode
    }

    pub fn penalized(&self) -> &[bool] {
        &self.penalized
    }

    fn check(&self, theta: &[f64]) -> Result<(), ObjectiveError> {
        let q = self.model.q();
        if theta.len() != q {
            return Err(ObjectiveError::DimensionMismatch {
                expected: q,
                got: theta.len(),
            });
        }
        check_finite(theta)
    }

    fn minus_two_loglik(&self, theta: &[f64]) -> Result<f64, ObjectiveError> {
        let ll = self.model.loglik(theta)?;
        if ll.is_finite() {
            Ok(-2.0 * ll)
        } else {
            Err(ObjectiveError::NonFiniteLikelihood)
        }
    }

    /// Smooth free-parameter count in `[0, q]` (zero mode) or `[1, q]` (fusion).
    pub fn penalty_count(&self, theta: &[f64]) -> Result<f64, ObjectiveError> {
        self.check(theta)?;
        let q = theta.len() as f64;
        Ok(match self.mode {
            PenaltyMode::ZeroPenalty => {
                let close: f64 = theta
                    .iter()
                    .zip(&self.penalized)
                    .filter(|(_, &p)| p)
                    .map(|(&t, _)| self.smoother.value_unchecked(t))
                    .sum();
                q - close
            }
            PenaltyMode::FusionPenalty => {
                let free = self.penalized.iter().filter(|p| !**p).count() as f64;
                let fused = theta.iter().zip(&self.penalized).filter(|(_, &p)| p).map(|(&t, _)| t);
                free + fusion_count(fused, &self.smoother)
            }
        })
    }

    /// `-2ℓ(θ) + c_n p_k(θ)`.
    pub fn value(&self, theta: &[f64]) -> Result<f64, ObjectiveError> {
        let count = self.penalty_count(theta)?;
        Ok(self.minus_two_loglik(theta)? + self.c_n * count)
    }

    /// Integer free-parameter count with exact indicators.
    pub fn exact_count(&self, theta: &[f64]) -> Result<usize, ObjectiveError> {
        self.check(theta)?;
        let unpenalized = self.penalized.iter().filter(|p| !**p).count();
        let mut values: Vec<f64> = theta
            .iter()
            .zip(&self.penalized)
            .filter(|(_, &p)| p)
            .map(|(&t, _)| t)
            .collect();
        Ok(match self.mode {
            PenaltyMode::ZeroPenalty => unpenalized + values.iter().filter(|&&t| t != 0.0).count(),
            PenaltyMode::FusionPenalty => {
                values.sort_by(f64::total_cmp);
                values.dedup();
                unpenalized + values.len()
            }
        })
    }

    /// The limiting criterion `-2ℓ(θ) + c_n p(θ)` with exact indicators.
    pub fn exact_ic(&self, theta: &[f64]) -> Result<f64, ObjectiveError> {
        let p = self.exact_count(theta)?;
        Ok(self.minus_two_loglik(theta)? + self.c_n * p as f64)
    }

    pub fn grad(&self, theta: &[f64], j: usize) -> Result<f64, ObjectiveError> {
        self.coordinate_derivative(theta, j, theta.get(j).copied().unwrap_or(0.0), 1)
    }

    pub fn hess_diag(&self, theta: &[f64], j: usize) -> Result<f64, ObjectiveError> {
        self.coordinate_derivative(theta, j, theta.get(j).copied().unwrap_or(0.0), 2)
    }

    /// Highest coordinate derivative order available in closed form.
    pub fn analytic_order(&self, theta: &[f64], j: usize) -> usize {
        let mut order = 2;
        while order < 16 && self.model.info_derivative(theta, j, order - 1).is_some() {
            order += 1;
        }
        order
    }

    /// Fills `out[i]` with the `(i + 1)`-th partial derivative in `θ_j` at
    /// `θ_j = v`; equivalent to repeated [`coordinate_derivative`] calls
    /// but locates the fusion neighbours once.
    ///
    /// [`coordinate_derivative`]: Self::coordinate_derivative
    pub fn coordinate_derivatives(
        &self,
        theta: &[f64],
        j: usize,
        v: f64,
        out: &mut [f64],
    ) -> Result<(), ObjectiveError> {
        let q = self.model.q();
        if theta.len() != q {
            return Err(ObjectiveError::DimensionMismatch {
                expected: q,
                got: theta.len(),
            });
        }
        check_index(j, q)?;
        if !v.is_finite() {
            return Err(ObjectiveError::NonFiniteParameter);
        }
        let mut moved = theta.to_vec();
        moved[j] = v;
        let (lo, up) = match self.mode {
            PenaltyMode::FusionPenalty if self.penalized[j] => neighbours(theta, &self.penalized, j, v),
            _ => (None, None),
        };
        for (i, slot) in out.iter_mut().enumerate() {
            let order = i + 1;
            let likelihood = match order {
                1 => -2.0 * self.model.score(&moved, j)?,
                2 => 2.0 * self.model.info(&moved, j)?,
                m => {
                    2.0 * self
                        .model
                        .info_derivative(&moved, j, m - 2)
                        .ok_or(ObjectiveError::DerivativeUnavailable(m))?
                }
            };
            let penalty = match self.mode {
                PenaltyMode::ZeroPenalty if self.penalized[j] => -self.smoother.derivative_unchecked(v, order),
                PenaltyMode::ZeroPenalty => 0.0,
                PenaltyMode::FusionPenalty => {
                    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                    let below = lo.map_or(0.0, |l| self.smoother.derivative_unchecked(v - l, order));
                    let above = up.map_or(0.0, |u| sign * self.smoother.derivative_unchecked(u - v, order));
                    -(below + above)
                }
            };
            *slot = likelihood + self.c_n * penalty;
        }
        Ok(())
    }

    /// `order`-th partial derivative in `θ_j`, evaluated with `θ_j` replaced by
    /// `v`. `theta[j]` itself is ignored.
    pub fn coordinate_derivative(&self, theta: &[f64], j: usize, v: f64, order: usize) -> Result<f64, ObjectiveError> {
        let q = self.model.q();
        if theta.len() != q {
            return Err(ObjectiveError::DimensionMismatch {
                expected: q,
                got: theta.len(),
            });
        }
        check_index(j, q)?;
        if !v.is_finite() {
            return Err(ObjectiveError::NonFiniteParameter);
        }
        let likelihood = match order {
            0 => {
                let mut moved = theta.to_vec();
                moved[j] = v;
                return self.value(&moved);
            }
            1 | 2 => {
                let mut moved;
                let at = if theta[j] == v {
                    theta
                } else {
                    moved = theta.to_vec();
                    moved[j] = v;
                    &moved[..]
                };
                if order == 1 {
                    -2.0 * self.model.score(at, j)?
                } else {
                    2.0 * self.model.info(at, j)?
                }
            }
            m => {
                let mut moved = theta.to_vec();
                moved[j] = v;
                2.0 * self
                    .model
                    .info_derivative(&moved, j, m - 2)
                    .ok_or(ObjectiveError::DerivativeUnavailable(m))?
            }
        };
        let penalty = match self.mode {
            PenaltyMode::ZeroPenalty if self.penalized[j] => -self.smoother.derivative_unchecked(v, order),
            PenaltyMode::ZeroPenalty => 0.0,
            PenaltyMode::FusionPenalty => fusion_derivative(theta, &self.penalized, j, v, &self.smoother, order),
        };
        Ok(likelihood + self.c_n * penalty)
    }
}

/// One evaluation of the surrogate along a parameter slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub k: f64,
    pub theta: f64,
    pub surrogate_ic: f64,
    pub exact_ic: f64,
}

/// Evaluates the surrogate and exact criteria with coordinate `j` swept over
/// `grid` and every other coordinate held at `base`, once per sharpness.
pub fn surface_slice<M: LikelihoodModel + ?Sized>(
    model: &M,
    penalty: &PenaltySpec,
    base: &[f64],
    j: usize,
    ks: &[f64],
    grid: &[f64],
) -> Result<Vec<SurfacePoint>, ObjectiveError> {
    check_index(j, base.len())?;
    let mut out = Vec::with_capacity(ks.len() * grid.len());
    let mut theta = base.to_vec();
    for &k in ks {
        let obj = SurrogateObjective::new(model, penalty, k)?;
        for &v in grid {
            theta[j] = v;
            out.push(SurfacePoint {
                k,
                theta: v,
                surrogate_ic: obj.value(&theta)?,
                exact_ic: obj.exact_ic(&theta)?,
            });
        }
    }
    Ok(out)
}
