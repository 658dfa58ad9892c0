//! Brute-force ground truth: every zero pattern of a regression, every set
//! partition of a sample.

use thiserror::Error;

use crate::continuation::{canonical_labels, Pattern};
use crate::models::{GaussMeansData, LikelihoodModel, LinRegData, ModelError};

pub const MAX_SUBSET_COEFFICIENTS: usize = 20;
pub const MAX_PARTITION_OBSERVATIONS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error(
        "{0} penalized coefficients would need 2^{0} fits; exhaustive search is limited to {max}",
        max = MAX_SUBSET_COEFFICIENTS
    )]
    TooManyCoefficients(usize),
    #[error(
        "{0} observations have too many partitions; exhaustive search is limited to {max}",
        max = MAX_PARTITION_OBSERVATIONS
    )]
    TooManyObservations(usize),
    #[error("information-criterion weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub pattern: Pattern,
    pub theta: Vec<f64>,
    pub loglik: f64,
    /// Free-parameter count.
    pub p: usize,
    pub ic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleTable {
    pub ic_weight: f64,
    /// Rows in enumeration order.
    pub rows: Vec<OracleRow>,
    /// Index of the minimizing row.
    pub best: usize,
}

impl OracleTable {
    pub fn best_row(&self) -> &OracleRow {
        &self.rows[self.best]
    }

    pub fn find(&self, pattern: &Pattern) -> Option<&OracleRow> {
        self.rows.iter().find(|r| &r.pattern == pattern)
    }
}

fn check_weight(c: f64) -> Result<(), OracleError> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(OracleError::InvalidWeight(c))
    }
}

fn evaluate<M: LikelihoodModel>(model: &M, pattern: Pattern, c: f64) -> Result<OracleRow, OracleError> {
    let theta = model.constrained_fit(&pattern)?;
    let loglik = model.loglik(&theta)?;
    let p = pattern.free_parameters();
    Ok(OracleRow {
        ic: -2.0 * loglik + c * p as f64,
        pattern,
        theta,
        loglik,
        p,
    })
}

/// Refits every subset of the penalized coefficients (unpenalized ones are
/// always kept). Ties go to fewer parameters, then to the lexicographically
/// smaller pattern.
pub fn exhaustive_subset_ic(data: &LinRegData, ic_weight: f64) -> Result<OracleTable, OracleError> {
    check_weight(ic_weight)?;
    let penalized: Vec<usize> = data
        .default_penalized()
        .iter()
        .enumerate()
        .filter(|(_, p)| **p)
        .map(|(j, _)| j)
        .collect();
    let m = penalized.len();
    if m > MAX_SUBSET_COEFFICIENTS {
        return Err(OracleError::TooManyCoefficients(m));
    }
    let mut rows = Vec::with_capacity(1 << m);
    for mask in 0u32..(1u32 << m) {
        let mut support = vec![true; data.q()];
        for (bit, &j) in penalized.iter().enumerate() {
            support[j] = mask & (1 << bit) != 0;
        }
        rows.push(evaluate(data, Pattern::Support(support), ic_weight)?);
    }
    let best = argmin(&rows, |a, b| {
        let (sa, sb) = (a.pattern.support().unwrap(), b.pattern.support().unwrap());
        sa.cmp(sb)
    });
    Ok(OracleTable { ic_weight, rows, best })
}

/// Scores every set partition of the observations with group means fitted.
/// Ties go to fewer groups, then to the earlier restricted-growth string.
pub fn exhaustive_partition_ic(data: &GaussMeansData, ic_weight: f64) -> Result<OracleTable, OracleError> {
    check_weight(ic_weight)?;
    let n = data.n();
    if n > MAX_PARTITION_OBSERVATIONS {
        return Err(OracleError::TooManyObservations(n));
    }
    let mut rows = Vec::new();
    for rgs in RestrictedGrowth::new(n) {
        rows.push(evaluate(data, Pattern::Groups(rgs), ic_weight)?);
    }
    let best = argmin(&rows, |_, _| std::cmp::Ordering::Equal);
    Ok(OracleTable { ic_weight, rows, best })
}

/// Smallest IC, then fewest parameters, then `tie`, then earliest row.
fn argmin(rows: &[OracleRow], tie: impl Fn(&OracleRow, &OracleRow) -> std::cmp::Ordering) -> usize {
    let mut best = 0;
    for (i, r) in rows.iter().enumerate().skip(1) {
        let b = &rows[best];
        let better =
            r.ic.total_cmp(&b.ic)
                .then(r.p.cmp(&b.p))
                .then_with(|| tie(r, b))
                .is_lt();
        if better {
            best = i;
        }
    }
    best
}

/// Set partitions of `{0, .., n-1}` as restricted-growth strings, labelled
/// from 1, in lexicographic order.
#[derive(Debug, Clone)]
pub struct RestrictedGrowth {
    current: Option<Vec<usize>>,
}

impl RestrictedGrowth {
    pub fn new(n: usize) -> Self {
        Self {
            current: if n == 0 { None } else { Some(vec![1; n]) },
        }
    }
}

impl Iterator for RestrictedGrowth {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        // prefix_max[i] = max label among positions 0..i
        let mut prefix_max = vec![0; next.len()];
        let mut running = 0;
        for (i, &v) in next.iter().enumerate() {
            prefix_max[i] = running;
            running = running.max(v);
        }
        for i in (1..next.len()).rev() {
            if next[i] <= prefix_max[i] {
                next[i] += 1;
                for slot in next.iter_mut().skip(i + 1) {
                    *slot = 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// Bell numbers by the Bell triangle.
pub fn bell(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for &v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}

/// Canonical (first-appearance) form of a labelling.
pub fn canonical_partition(labels: &[usize]) -> Vec<usize> {
    canonical_labels(labels)
}
