//! Likelihoods the surrogate objectives are built on.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::continuation::Pattern;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter index {index} out of range for {q} parameters")]
    IndexOutOfRange { index: usize, q: usize },
    #[error("design column {0} is identically zero")]
    ZeroColumn(usize),
    #[error("model needs at least one observation and one parameter")]
    Empty,
    #[error("variance must be positive and finite, got {0}")]
    InvalidVariance(f64),
    #[error("design restricted to the pattern is rank deficient")]
    Singular,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Coordinate-wise view of a log-likelihood.
pub trait LikelihoodModel: Sync {
    /// Sample size.
    fn n(&self) -> usize;

    /// Parameter count.
    fn q(&self) -> usize;

    fn loglik(&self, theta: &[f64]) -> Result<f64, ModelError>;

    /// `dℓ/dθ_j`.
    fn score(&self, theta: &[f64], j: usize) -> Result<f64, ModelError>;

    /// Observed information of `θ_j`, `-d²ℓ/dθ_j²`.
    fn info(&self, theta: &[f64], j: usize) -> Result<f64, ModelError>;

    /// Sum of the scores of the coordinates `coords`: the derivative of `ℓ`
    /// along a common shift of those coordinates.
    fn block_score(&self, theta: &[f64], coords: &[usize]) -> Result<f64, ModelError> {
        coords.iter().try_fold(0.0, |acc, &j| Ok(acc + self.score(theta, j)?))
    }

    /// `1ᵀ I 1` for the information submatrix of the coordinates `coords`:
    /// the information along a common shift of those coordinates.
    fn block_info(&self, theta: &[f64], coords: &[usize]) -> Result<f64, ModelError>;

    /// `order`-th derivative of [`info`](Self::info) in `θ_j`, when known in
    /// closed form.
    fn info_derivative(&self, _theta: &[f64], _j: usize, _order: usize) -> Option<f64> {
        None
    }

    /// Coordinates subject to the parsimony penalty by default.
    fn default_penalized(&self) -> Vec<bool> {
        vec![true; self.q()]
    }

    /// Typical magnitude of parameter differences, used to set default
    /// sharpness schedules and snap tolerances.
    fn parameter_scale(&self) -> f64;

    /// Maximum-likelihood fit with the constraints implied by `pattern`.
    fn constrained_fit(&self, pattern: &Pattern) -> Result<Vec<f64>, ModelError>;
}

fn check_len(theta: &[f64], q: usize) -> Result<(), ModelError> {
    if theta.len() == q {
        Ok(())
    } else {
        Err(ModelError::DimensionMismatch {
            expected: q,
            got: theta.len(),
        })
    }
}

fn check_index(j: usize, q: usize) -> Result<(), ModelError> {
    if j < q {
        Ok(())
    } else {
        Err(ModelError::IndexOutOfRange { index: j, q })
    }
}

fn check_pattern(pattern: &Pattern, q: usize) -> Result<(), ModelError> {
    if pattern.len() == q {
        Ok(())
    } else {
        Err(ModelError::DimensionMismatch {
            expected: q,
            got: pattern.len(),
        })
    }
}

/// Gaussian linear regression with a known noise variance.
#[derive(Debug, Clone)]
pub struct LinRegData {
    x: DMatrix<f64>,
    y: DVector<f64>,
    sigma2: f64,
    intercept: bool,
    col_sq_norms: Vec<f64>,
    scale: f64,
}

impl LinRegData {
    /// `x` is the full `n × q` design; when `intercept` is set, column 0 is
    /// the intercept and is left unpenalized by default.
    pub fn new(x: DMatrix<f64>, y: Vec<f64>, sigma2: f64, intercept: bool) -> Result<Self, ModelError> {
        let (n, q) = x.shape();
        if n == 0 || q == 0 {
            return Err(ModelError::Empty);
        }
        if y.len() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("regression data"));
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(ModelError::InvalidVariance(sigma2));
        }
        let col_sq_norms: Vec<f64> = x.column_iter().map(|c| c.norm_squared()).collect();
        if let Some(j) = col_sq_norms.iter().position(|&s| s == 0.0) {
            return Err(ModelError::ZeroColumn(j));
        }
        let mut data = Self {
            x,
            y: DVector::from_vec(y),
            sigma2,
            intercept,
            col_sq_norms,
            scale: 1.0,
        };
        data.scale = data.coefficient_scale()?;
        Ok(data)
    }

    /// Builds the design from predictor columns (plus an intercept column when
    /// requested) and fixes the noise variance at the full-model maximum
    /// likelihood estimate `SSR / n`.
    pub fn from_predictors(predictors: &[Vec<f64>], y: Vec<f64>, intercept: bool) -> Result<Self, ModelError> {
        let n = y.len();
        let design = design_matrix(predictors, n, intercept)?;
        let q = design.ncols();
        let beta = least_squares(&design, &DVector::from_column_slice(&y), &(0..q).collect::<Vec<_>>())?;
        let resid = DVector::from_column_slice(&y) - &design * beta;
        let sigma2 = resid.norm_squared() / n as f64;
        Self::new(design, y, sigma2, intercept)
    }

    /// Same data with the noise variance replaced.
    pub fn with_sigma2(self, sigma2: f64) -> Result<Self, ModelError> {
        Self::new(self.x, self.y.as_slice().to_vec(), sigma2, self.intercept)
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        self.y.as_slice()
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    /// Least squares restricted to `columns`, returned as a full-length
    /// coefficient vector with zeros elsewhere.
    pub fn ols(&self, columns: &[usize]) -> Result<Vec<f64>, ModelError> {
        let mut theta = vec![0.0; self.q()];
        if columns.is_empty() {
            return Ok(theta);
        }
        let beta = least_squares(&self.x, &self.y, columns)?;
        for (&j, b) in columns.iter().zip(beta.iter()) {
            theta[j] = *b;
        }
        Ok(theta)
    }

    fn summed_columns(&self, coords: &[usize]) -> Result<DVector<f64>, ModelError> {
        let mut sum = DVector::zeros(self.n());
        for &j in coords {
            check_index(j, self.q())?;
            sum += self.x.column(j);
        }
        Ok(sum)
    }

    fn residuals(&self, theta: &[f64]) -> DVector<f64> {
        &self.y - &self.x * DVector::from_column_slice(theta)
    }

    /// Median standard error of the penalized coefficients in the full fit.
    fn coefficient_scale(&self) -> Result<f64, ModelError> {
        let xtx = self.x.transpose() * &self.x;
        let inv = xtx.try_inverse().ok_or(ModelError::Singular)?;
        let penalized = self.default_penalized();
        let mut ses: Vec<f64> = (0..self.q())
            .filter(|&j| penalized[j] || penalized.iter().all(|p| !p))
            .map(|j| (self.sigma2 * inv[(j, j)]).sqrt())
            .collect();
        ses.sort_by(f64::total_cmp);
        Ok(median_sorted(&ses))
    }
}

fn median_sorted(v: &[f64]) -> f64 {
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn design_matrix(predictors: &[Vec<f64>], n: usize, intercept: bool) -> Result<DMatrix<f64>, ModelError> {
    let q = predictors.len() + usize::from(intercept);
    if n == 0 || q == 0 {
        return Err(ModelError::Empty);
    }
    if let Some(col) = predictors.iter().find(|c| c.len() != n) {
        return Err(ModelError::DimensionMismatch {
            expected: n,
            got: col.len(),
        });
    }
    let offset = usize::from(intercept);
    Ok(DMatrix::from_fn(n, q, |i, j| {
        if intercept && j == 0 {
            1.0
        } else {
            predictors[j - offset][i]
        }
    }))
}

/// Normal-equation least squares on a column subset of `x`.
fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>, columns: &[usize]) -> Result<DVector<f64>, ModelError> {
    let sub = x.select_columns(columns);
    solve_normal(&sub, y)
}

fn solve_normal(design: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>, ModelError> {
    let xtx = design.transpose() * design;
    let xty = design.transpose() * y;
    let chol = xtx.cholesky().ok_or(ModelError::Singular)?;
    let beta = chol.solve(&xty);
    if beta.iter().all(|b| b.is_finite()) {
        Ok(beta)
    } else {
        Err(ModelError::Singular)
    }
}

impl LikelihoodModel for LinRegData {
    fn n(&self) -> usize {
        self.x.nrows()
    }

    fn q(&self) -> usize {
        self.x.ncols()
    }

    fn loglik(&self, theta: &[f64]) -> Result<f64, ModelError> {
        check_len(theta, self.q())?;
        let n = self.n() as f64;
        let ssr = self.residuals(theta).norm_squared();
        Ok(-0.5 * n * (2.0 * std::f64::consts::PI * self.sigma2).ln() - ssr / (2.0 * self.sigma2))
    }

    fn score(&self, theta: &[f64], j: usize) -> Result<f64, ModelError> {
        check_len(theta, self.q())?;
        check_index(j, self.q())?;
        let r = self.residuals(theta);
        Ok(self.x.column(j).dot(&r) / self.sigma2)
    }

    fn info(&self, theta: &[f64], j: usize) -> Result<f64, ModelError> {
        check_len(theta, self.q())?;
        check_index(j, self.q())?;
        Ok(self.col_sq_norms[j] / self.sigma2)
    }

    fn block_score(&self, theta: &[f64], coords: &[usize]) -> Result<f64, ModelError> {
        check_len(theta, self.q())?;
        let direction = self.summed_columns(coords)?;
        Ok(direction.dot(&self.residuals(theta)) / self.sigma2)
    }

    fn block_info(&self, theta: &[f64], coords: &[usize]) -> Result<f64, ModelError> {
        check_len(theta, self.q())?;
        Ok(self.summed_columns(coords)?.norm_squared() / self.sigma2)
    }

    fn info_derivative(&self, _theta: &[f64], _j: usize, _order: usize) -> Option<f64> {
        Some(0.0)
    }

    fn default_penalized(&self) -> Vec<bool> {
        (0..self.q()).map(|j| !(self.intercept && j == 0)).collect()
    }

    fn parameter_scale(&self) -> f64 {
        self.scale
    }

    fn constrained_fit(&self, pattern: &Pattern) -> Result<Vec<f64>, ModelError> {
        check_pattern(pattern, self.q())?;
        match pattern {
            Pattern::Support(support) => {
                let cols: Vec<usize> = (0..self.q()).filter(|&j| support[j]).collect();
                self.ols(&cols)
            }
            Pattern::Groups(labels) => {
                let groups = labels.iter().copied().max().unwrap_or(0);
                let mut z = DMatrix::zeros(self.n(), groups);
                for (j, &g) in labels.iter().enumerate() {
                    let mut col = z.column_mut(g - 1);
                    col += self.x.column(j);
                }
                let beta = solve_normal(&z, &self.y)?;
                Ok(labels.iter().map(|&g| beta[g - 1]).collect())
            }
        }
    }
}

/// One free mean per observation with a common, known standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussMeansData {
    y: Vec<f64>,
    sigma: f64,
}

impl GaussMeansData {
    pub fn new(y: Vec<f64>, sigma: f64) -> Result<Self, ModelError> {
        if y.is_empty() {
            return Err(ModelError::Empty);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("observations"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(ModelError::InvalidVariance(sigma));
        }
        Ok(Self { y, sigma })
    }

    /// Uses the sample standard deviation (denominator `n - 1`) as `σ`.
    pub fn with_plugin_sigma(y: Vec<f64>) -> Result<Self, ModelError> {
        if y.len() < 2 {
            return Err(ModelError::InvalidVariance(f64::NAN));
        }
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self::new(y, var.sqrt())
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl LikelihoodModel for GaussMeansData {
    fn n(&self) -> usize {
        self.y.len()
    }

    fn q(&self) -> usize {
        self.y.len()
    }

    fn loglik(&self, theta: &[f64]) -> Result<f64, ModelError> {
        check_len(theta, self.q())?;
        let s2 = self.sigma * self.sigma;
        let norm = -0.5 * (2.0 * std::f64::consts::PI * s2).ln();
        Ok(self
            .y
            .iter()
            .zip(theta)
            .map(|(y, m)| norm - (y - m).powi(2) / (2.0 * s2))
            .sum())
    }

    fn score(&self, theta: &[f64], j: usize) -> Result<f64, ModelError> {
        check_len(theta, self.q())?;
        check_index(j, self.q())?;
        Ok((self.y[j] - theta[j]) / (self.sigma * self.sigma))
    }

    fn info(&self, theta: &[f64], j: usize) -> Result<f64, ModelError> {
        check_len(theta, self.q())?;
        check_index(j, self.q())?;
        Ok(1.0 / (self.sigma * self.sigma))
    }

    fn block_info(&self, theta: &[f64], coords: &[usize]) -> Result<f64, ModelError> {
        check_len(theta, self.q())?;
        for &j in coords {
            check_index(j, self.q())?;
        }
        Ok(coords.len() as f64 / (self.sigma * self.sigma))
    }

    fn info_derivative(&self, _theta: &[f64], _j: usize, _order: usize) -> Option<f64> {
        Some(0.0)
    }

    fn parameter_scale(&self) -> f64 {
        self.sigma
    }

    fn constrained_fit(&self, pattern: &Pattern) -> Result<Vec<f64>, ModelError> {
        check_pattern(pattern, self.q())?;
        match pattern {
            Pattern::Support(support) => Ok(self
                .y
                .iter()
                .zip(support)
                .map(|(&y, &s)| if s { y } else { 0.0 })
                .collect()),
            Pattern::Groups(labels) => {
                let groups = labels.iter().copied().max().unwrap_or(0);
                let mut sums = vec![0.0; groups];
                let mut counts = vec![0usize; groups];
                for (&y, &g) in self.y.iter().zip(labels) {
                    sums[g - 1] += y;
                    counts[g - 1] += 1;
                }
                Ok(labels.iter().map(|&g| sums[g - 1] / counts[g - 1] as f64).collect())
            }
        }
    }
}
