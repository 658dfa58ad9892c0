//! Univariate root finding with truncated Lagrange inversion series.
//!
//! Around a seed `a` with `f'(a) != 0`, the inverse function `g = f^{-1}` has a
//! Taylor expansion about `y = f(a)`; evaluating it at `y = 0` estimates the
//! root. Truncating after the first term is exactly Newton's method, the
//! second term gives a Halley-like correction, and so on. Within the radius of
//! convergence of the inverse series the remainder after `q` terms is
//! `o(|f(a)|^q)`.

use thiserror::Error;

/// Guard on `|f'(a)|` below which a series step is refused.
pub const DERIVATIVE_EPSILON: f64 = 1e-12;

/// Highest series order accepted by [`lagrange_step`].
pub const MAX_SERIES_ORDER: usize = 12;

const MAX_HALVINGS: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("|f'(a)| = {0:e} is too small for a series step")]
    DerivativeTooSmall(f64),
    #[error("series term is not finite")]
    SeriesDiverged,
    #[error("series order must lie in 1..={MAX_SERIES_ORDER}, got {0}")]
    InvalidOrder(usize),
    #[error("target must expose at least one derivative")]
    NoDerivatives,
    #[error("scaling constant must be finite and non-zero, got {0}")]
    DegenerateScaling(f64),
    #[error("invalid solver setting: {0}")]
    InvalidSetting(&'static str),
}

/// A scalar function that can report its value and leading derivatives.
pub trait DifferentiableTarget {
    /// Number of derivatives available analytically.
    fn max_order(&self) -> usize;

    /// Writes `f(x), f'(x), ..., f^(max_order)(x)` into `out`, whose length is
    /// `max_order + 1`.
    fn eval(&self, x: f64, out: &mut [f64]);
}

impl<T: DifferentiableTarget + ?Sized> DifferentiableTarget for &T {
    fn max_order(&self) -> usize {
        (**self).max_order()
    }

    fn eval(&self, x: f64, out: &mut [f64]) {
        (**self).eval(x, out)
    }
}

/// Closure-backed target.
pub struct FnTarget<F> {
    max_order: usize,
    f: F,
}

impl<F: Fn(f64, &mut [f64])> FnTarget<F> {
    pub fn new(max_order: usize, f: F) -> Result<Self, RootError> {
        if max_order == 0 {
            return Err(RootError::NoDerivatives);
        }
        Ok(Self { max_order, f })
    }
}

impl<F: Fn(f64, &mut [f64])> DifferentiableTarget for FnTarget<F> {
    fn max_order(&self) -> usize {
        self.max_order
    }

    fn eval(&self, x: f64, out: &mut [f64]) {
        (self.f)(x, out)
    }
}

/// A target multiplied through by a constant; the roots are unchanged.
pub struct Rescaled<T> {
    inner: T,
    scale: f64,
}

impl<T> Rescaled<T> {
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl<T: DifferentiableTarget> DifferentiableTarget for Rescaled<T> {
    fn max_order(&self) -> usize {
        self.inner.max_order()
    }

    fn eval(&self, x: f64, out: &mut [f64]) {
        self.inner.eval(x, out);
        for v in out.iter_mut() {
            *v *= self.scale;
        }
    }
}

pub fn rescale<T: DifferentiableTarget>(target: T, scale: f64) -> Result<Rescaled<T>, RootError> {
    if scale == 0.0 || !scale.is_finite() {
        return Err(RootError::DegenerateScaling(scale));
    }
    Ok(Rescaled { inner: target, scale })
}

/// Value and derivatives at a point, possibly extended numerically.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    /// `f, f_1, ..., f_order`.
    pub values: Vec<f64>,
    /// First order filled by finite differences, if any.
    pub approximate_from: Option<usize>,
}

/// Evaluates `f` and its first `order` derivatives. Orders beyond the target's
/// analytic ones come from central differences of its highest derivative.
pub fn derivatives<T: DifferentiableTarget + ?Sized>(target: &T, x: f64, order: usize) -> Derivatives {
    let q = target.max_order();
    let mut analytic = vec![0.0; q + 1];
    target.eval(x, &mut analytic);
    if order <= q {
        analytic.truncate(order + 1);
        return Derivatives {
            values: analytic,
            approximate_from: None,
        };
    }
    let mut values = analytic.clone();
    let mut scratch = vec![0.0; q + 1];
    for extra in 1..=(order - q) {
        values.push(central_difference(target, x, extra, &mut scratch));
    }
    Derivatives {
        values,
        approximate_from: Some(q + 1),
    }
}

/// `m`-th central difference of the target's top analytic derivative.
fn central_difference<T: DifferentiableTarget + ?Sized>(target: &T, x: f64, m: usize, scratch: &mut [f64]) -> f64 {
    let q = target.max_order();
    let h = f64::EPSILON.powf(1.0 / (m as f64 + 2.0)) * x.abs().max(1.0);
    let mut acc = 0.0;
    let mut binom = 1.0;
    for i in 0..=m {
        let offset = (m as f64 / 2.0 - i as f64) * h;
        target.eval(x + offset, scratch);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * scratch[q];
        binom = binom * (m - i) as f64 / (i + 1) as f64;
    }
    acc / h.powi(m as i32)
}

/// One truncated-series root estimate from the seed `a`.
///
/// Order 1 is the Newton step `a - f/f'`. Orders up to 3 use the expanded
/// coefficients of the inverse-function Taylor series; higher orders come from
/// reverting the Taylor series of `f` about `a`.
pub fn lagrange_step<T: DifferentiableTarget + ?Sized>(target: &T, a: f64, order: usize) -> Result<f64, RootError> {
    if order == 0 || order > MAX_SERIES_ORDER {
        return Err(RootError::InvalidOrder(order));
    }
    if target.max_order() == 0 {
        return Err(RootError::NoDerivatives);
    }
    let d = derivatives(target, a, order);
    series_estimate(a, &d.values, order)
}

fn series_estimate(a: f64, d: &[f64], order: usize) -> Result<f64, RootError> {
    let f1 = d[1];
    if !f1.is_finite() || f1.abs() <= DERIVATIVE_EPSILON {
        return Err(RootError::DerivativeTooSmall(f1));
    }
    let estimate = if order <= 3 {
        expanded_series(a, d, order)
    } else {
        reverted_series(a, d, order)
    };
    if estimate.is_finite() {
        Ok(estimate)
    } else {
        Err(RootError::SeriesDiverged)
    }
}

/// `a - u - f2/(2 f1) u^2 - (3 f2^2 - f1 f3)/(6 f1^2) u^3` with `u = f/f1`.
fn expanded_series(a: f64, d: &[f64], order: usize) -> f64 {
    let (f, f1) = (d[0], d[1]);
    let u = f / f1;
    let mut x = a - u;
    if order >= 2 {
        x -= d[2] / (2.0 * f1) * u * u;
    }
    if order >= 3 {
        x -= (3.0 * d[2] * d[2] - f1 * d[3]) / (6.0 * f1 * f1) * u * u * u;
    }
    x
}

/// Reverts `f(a + t) - f(a) = sum c_i t^i` into `t = sum b_i w^i` and
/// evaluates at `w = -f(a)`.
fn reverted_series(a: f64, d: &[f64], order: usize) -> f64 {
    let mut factorial = 1.0;
    let mut c = vec![0.0; order + 1];
    for i in 1..=order {
        factorial *= i as f64;
        c[i] = d[i] / factorial;
    }
    let mut b = vec![0.0; order + 1];
    b[1] = 1.0 / c[1];
    for n in 2..=order {
        // Coefficient of w^n in sum_{i>=2} c_i T(w)^i with T truncated at n-1.
        let mut power = b.clone();
        power[n] = 0.0;
        let truncated = power.clone();
        let mut coeff = 0.0;
        for ci in c.iter().take(n + 1).skip(2) {
            power = poly_mul_truncated(&power, &truncated, order);
            coeff += ci * power[n];
        }
        b[n] = -coeff / c[1];
    }
    let w = -d[0];
    let mut wp = 1.0;
    let mut t = 0.0;
    for bn in b.iter().skip(1) {
        wp *= w;
        t += bn * wp;
    }
    a + t
}

fn poly_mul_truncated(p: &[f64], q: &[f64], degree: usize) -> Vec<f64> {
    let mut out = vec![0.0; degree + 1];
    for (i, &pi) in p.iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        for (j, &qj) in q.iter().enumerate().take(degree + 1 - i) {
            out[i + j] += pi * qj;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootMethod {
    LagrangeSeries,
    Newton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSolveReport {
    pub root_estimate: f64,
    pub iterations: usize,
    /// `|f|` at the estimate.
    pub final_residual: f64,
    pub method_used: RootMethod,
    pub converged: bool,
}

/// Iterates [`lagrange_step`] from `seed` until `|f| < tol`.
///
/// A series step that fails to reduce `|f|` is replaced by a damped Newton
/// step (halved up to 30 times until `|f|` decreases), so accepted iterates
/// have strictly decreasing residuals. A solve that stalls is reported with
/// `converged = false` rather than as an error.
pub fn solve_root<T: DifferentiableTarget + ?Sized>(
    target: &T,
    seed: f64,
    order: usize,
    tol: f64,
    max_iter: usize,
) -> Result<RootSolveReport, RootError> {
    if order == 0 || order > MAX_SERIES_ORDER {
        return Err(RootError::InvalidOrder(order));
    }
    if !(tol > 0.0) {
        return Err(RootError::InvalidSetting("tol must be positive"));
    }
    if max_iter == 0 {
        return Err(RootError::InvalidSetting("max_iter must be at least 1"));
    }
    if target.max_order() == 0 {
        return Err(RootError::NoDerivatives);
    }

    let mut buf = vec![0.0; target.max_order() + 1];
    let mut residual_at = |x: f64| {
        target.eval(x, &mut buf);
        (buf[0], buf[1])
    };

    let mut x = seed;
    let (mut fx, mut f1x) = residual_at(x);
    let mut method = RootMethod::LagrangeSeries;
    let mut iterations = 0;
    let report = |x: f64, fx: f64, iterations, method, tol: f64| RootSolveReport {
        root_estimate: x,
        iterations,
        final_residual: fx.abs(),
        method_used: method,
        converged: fx.abs() < tol,
    };
    if !fx.is_finite() {
        return Ok(report(x, f64::INFINITY, 0, method, tol));
    }
    if fx.abs() < tol {
        return Ok(report(x, fx, 0, method, tol));
    }
    if !(f1x.abs() > DERIVATIVE_EPSILON) {
        // Nudge the seed off a stationary point of f.
        let delta = 1e-6 * x.abs().max(1.0);
        let nudged = [x - delta, x + delta]
            .into_iter()
            .map(|xp| (xp, residual_at(xp)))
            .filter(|(_, (f, f1))| f.is_finite() && f1.abs() > DERIVATIVE_EPSILON)
            .min_by(|a, b| a.1 .0.abs().total_cmp(&b.1 .0.abs()));
        match nudged {
            Some((xp, (f, f1))) => {
                x = xp;
                fx = f;
                f1x = f1;
            }
            None => return Ok(report(x, fx, 0, method, tol)),
        }
    }

    while iterations < max_iter && fx.abs() >= tol {
        let series = lagrange_step(target, x, order)
            .ok()
            .map(|xn| (xn, residual_at(xn)))
            .filter(|(_, (fnew, _))| fnew.is_finite() && fnew.abs() < fx.abs());
        let accepted = match series {
            Some(step) => Some((step, RootMethod::LagrangeSeries)),
            None => damped_newton(&mut residual_at, x, fx, f1x).map(|s| (s, RootMethod::Newton)),
        };
        match accepted {
            Some(((xn, (fnew, f1new)), m)) => {
                x = xn;
                fx = fnew;
                f1x = f1new;
                method = m;
                iterations += 1;
            }
            None => break,
        }
    }
    Ok(report(x, fx, iterations, method, tol))
}

fn damped_newton(
    residual_at: &mut impl FnMut(f64) -> (f64, f64),
    x: f64,
    fx: f64,
    f1x: f64,
) -> Option<(f64, (f64, f64))> {
    if !(f1x.abs() > DERIVATIVE_EPSILON) {
        return None;
    }
    let mut step = fx / f1x;
    for _ in 0..=MAX_HALVINGS {
        let xn = x - step;
        let r = residual_at(xn);
        if r.0.is_finite() && r.0.abs() < fx.abs() {
            return Some((xn, r));
        }
        step *= 0.5;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_target(coeffs: Vec<f64>) -> FnTarget<impl Fn(f64, &mut [f64])> {
        // Polynomial with all derivatives analytic up to order 4.
        FnTarget::new(4, move |x, out: &mut [f64]| {
            let mut p = coeffs.clone();
            for slot in out.iter_mut() {
                *slot = p.iter().rev().fold(0.0, |acc, &c| acc * x + c);
                p = p.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect();
            }
        })
        .unwrap()
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let mut flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if (fm < 0.0) == (flo < 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn linear_target_is_exact() {
        let t = poly_target(vec![-3.0, 1.0]);
        assert_eq!(lagrange_step(&t, 0.0, 1).unwrap(), 3.0);
        let r = solve_root(&t, -17.0, 3, 1e-12, 10).unwrap();
        assert_eq!(r.root_estimate, 3.0);
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
    }

    #[test]
    fn sqrt_two_error_shrinks_with_order() {
        let t = poly_target(vec![-2.0, 0.0, 1.0]);
        let root = bisect(|x| x * x - 2.0, 1.0, 2.0);
        let errs: Vec<f64> = (1..=3)
            .map(|o| (lagrange_step(&t, 1.5, o).unwrap() - root).abs())
            .collect();
        assert!(errs[2] < 1e-3);
        assert!(errs[0] >= errs[1] && errs[1] >= errs[2], "{errs:?}");
    }

    #[test]
    fn reversion_agrees_with_expanded_coefficients() {
        let targets = [
            vec![-2.0, 0.0, 1.0],
            vec![-2.0, -1.0, 0.0, 1.0],
            vec![0.3, 1.2, -0.7, 0.25, 0.1],
        ];
        for coeffs in targets {
            let t = poly_target(coeffs);
            for a in [0.4, 1.1, 1.7] {
                let d = derivatives(&t, a, 3).values;
                for order in 1..=3 {
                    let e = expanded_series(a, &d, order);
                    let r = reverted_series(a, &d, order);
                    assert!((e - r).abs() <= 1e-12 * e.abs().max(1.0), "{e} vs {r}");
                }
            }
        }
    }

    #[test]
    fn higher_orders_keep_improving_on_exponential() {
        // e^x - 5 at a = 1.5: |f(a)| < 1 so the remainder decays with order.
        let t = FnTarget::new(8, |x: f64, out: &mut [f64]| {
            let e = x.exp();
            out.fill(e);
            out[0] = e - 5.0;
        })
        .unwrap();
        let root = 5f64.ln();
        let errs: Vec<f64> = (1..=6)
            .map(|o| (lagrange_step(&t, 1.5, o).unwrap() - root).abs())
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] <= w[0], "{errs:?}");
        }
        assert!(errs[5] < 1e-6);
    }

    #[test]
    fn finite_difference_completion_is_flagged_and_accurate() {
        let t = FnTarget::new(1, |x: f64, out: &mut [f64]| {
            out[0] = x.sin();
            out[1] = x.cos();
        })
        .unwrap();
        let d = derivatives(&t, 0.7, 3);
        assert_eq!(d.approximate_from, Some(2));
        assert!((d.values[2] + 0.7f64.sin()).abs() < 1e-6);
        assert!((d.values[3] + 0.7f64.cos()).abs() < 1e-4);
        let exact = derivatives(&t, 0.7, 1);
        assert_eq!(exact.approximate_from, None);
    }

    #[test]
    fn rescaling_keeps_newton_step_and_roots() {
        let t = poly_target(vec![-2.0, 0.0, 1.0]);
        let one = rescale(&t, 1.0).unwrap();
        let (mut a, mut b) = (vec![0.0; 5], vec![0.0; 5]);
        t.eval(1.3, &mut a);
        one.eval(1.3, &mut b);
        assert_eq!(a, b);

        let scaled = rescale(&t, 0.1).unwrap();
        assert_eq!(
            lagrange_step(&scaled, 1.5, 1).unwrap(),
            lagrange_step(&t, 1.5, 1).unwrap()
        );
        assert!(matches!(rescale(&t, 0.0), Err(RootError::DegenerateScaling(_))));

        for c in [0.1, 10.0] {
            let s = rescale(&t, c).unwrap();
            let r = solve_root(&s, 1.0, 3, 1e-12, 50).unwrap();
            assert!(r.converged);
            assert!((r.root_estimate - 2f64.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn rescaled_exponential_gives_identical_series_steps() {
        // e^x - 5 at a = 0 has |f(a)| = 4. Scaling by 0.1 brings |c f(a)| below
        // one, but each series term scales as c^i * c^-i, so every truncation is
        // unchanged. The inverse series about f(0) = -4 has radius 1 and does not
        // converge at distance 4, so the error grows with order either way.
        let t = FnTarget::new(8, |x: f64, out: &mut [f64]| {
            let e = x.exp();
            out.fill(e);
            out[0] = e - 5.0;
        })
        .unwrap();
        let s = rescale(&t, 0.1).unwrap();
        let mut f = [0.0; 9];
        s.eval(0.0, &mut f);
        assert!(f[0].abs() < 1.0);
        let root = bisect(|x| x.exp() - 5.0, 0.0, 3.0);
        let mut errs = Vec::new();
        for order in 1..=4 {
            let scaled = lagrange_step(&s, 0.0, order).unwrap();
            let plain = lagrange_step(&t, 0.0, order).unwrap();
            assert!((scaled - plain).abs() <= 1e-12 * plain.abs().max(1.0));
            errs.push((scaled - root).abs());
        }
        assert!(errs[3] > errs[0], "{errs:?}");
        // The iterated solver still finds the root under either scaling.
        for target in [rescale(&t, 0.1).unwrap(), rescale(&t, 1.0).unwrap()] {
            let r = solve_root(&target, 0.0, 3, 1e-12, 50).unwrap();
            assert!(r.converged);
            assert!((r.root_estimate - root).abs() < 1e-10);
        }
    }

    #[test]
    fn cubic_converges() {
        let t = poly_target(vec![-2.0, -1.0, 0.0, 1.0]);
        let root = bisect(|x| x * x * x - x - 2.0, 1.0, 2.0);
        let r = solve_root(&t, 1.5, 2, 1e-10, 25).unwrap();
        assert!(r.converged);
        assert!(r.final_residual < 1e-10);
        assert!((r.root_estimate - root).abs() < 1e-9);
        assert!((r.root_estimate - 1.5213797).abs() < 1e-7);
    }

    #[test]
    fn no_real_root_reports_failure() {
        let t = poly_target(vec![1.0, 0.0, 1.0]);
        let r = solve_root(&t, 1.0, 3, 1e-10, 50).unwrap();
        assert!(!r.converged);
        assert!(r.final_residual >= 1.0);
    }

    #[test]
    fn stationary_seed_is_nudged() {
        // f'(0) = 0 for x^2 - 1; the nudge lets the solver proceed.
        let t = poly_target(vec![-1.0, 0.0, 1.0]);
        assert!(matches!(
            lagrange_step(&t, 0.0, 1),
            Err(RootError::DerivativeTooSmall(_))
        ));
        let r = solve_root(&t, 0.0, 1, 1e-12, 100).unwrap();
        assert!(r.converged);
        assert!((r.root_estimate.abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_settings() {
        let t = poly_target(vec![-1.0, 1.0]);
        assert!(solve_root(&t, 0.0, 1, 0.0, 10).is_err());
        assert!(solve_root(&t, 0.0, 1, 1e-8, 0).is_err());
        assert!(matches!(lagrange_step(&t, 0.0, 0), Err(RootError::InvalidOrder(0))));
        assert!(FnTarget::new(0, |_: f64, _: &mut [f64]| {}).is_err());
    }
}
