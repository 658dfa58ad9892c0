//! Annealing the sharpness `k` with warm starts.
//!
//! For each `k` on a geometric schedule the surrogate criterion is minimized by
//! cyclic coordinate updates, each of which root-solves the coordinate
//! gradient with the truncated Lagrange series. The optimum seeds the next,
//! sharper surrogate. After the last step the estimate is snapped to its
//! discrete pattern (zeros or fused groups) and refitted exactly.

use std::fmt;

use thiserror::Error;

use crate::models::{LikelihoodModel, ModelError};
use crate::objective::{ObjectiveError, PenaltyMode, PenaltySpec, SurrogateObjective};
use crate::rootfind::{solve_root, DifferentiableTarget, RootError, RootMethod};

#[derive(Debug, Error)]
pub enum ContinuationError {
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("seed has {got} values, model has {expected} parameters")]
    SeedLength { expected: usize, got: usize },
    #[error("seed contains non-finite values")]
    NonFiniteSeed,
    #[error("iterate became non-finite at k = {k} after {} completed steps", .completed.len())]
    Diverged { k: f64, completed: Vec<PathRecord> },
}

/// Geometric sharpness schedule and inner-solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationSchedule {
    pub k0: f64,
    /// Geometric growth factor between consecutive `k`.
    pub ratio: f64,
    pub k_max: f64,
    /// Stop sweeping once every coordinate gradient is at most this.
    pub inner_tol: f64,
    /// Maximum coordinate sweeps per `k`.
    pub inner_max_iter: usize,
    pub series_order: usize,
    /// Iteration cap for each coordinate root solve.
    pub root_max_iter: usize,
    /// Gap below which values are treated as equal (or zero) when snapping.
    pub snap_tol: f64,
}

impl ContinuationSchedule {
    /// Defaults for parameters that vary on the scale `scale`.
    pub fn for_scale(scale: f64) -> Self {
        Self {
            k0: 0.5 / scale,
            ratio: 1.25,
            k_max: 1e4 / scale,
            inner_tol: 1e-6 / scale,
            inner_max_iter: 2000,
            series_order: 3,
            root_max_iter: 50,
            snap_tol: 1e-4 * scale,
        }
    }

    pub fn validate(&self) -> Result<(), ContinuationError> {
        let bad = |msg: &str| Err(ContinuationError::InvalidSchedule(msg.to_string()));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.k0) || !positive(self.k_max) {
            return bad("k0 and k_max must be positive");
        }
        if self.k0 > self.k_max {
            return bad("k0 must not exceed k_max");
        }
        if !(self.ratio.is_finite() && self.ratio > 1.0) {
            return bad("ratio must exceed 1");
        }
        if !positive(self.inner_tol) || !positive(self.snap_tol) {
            return bad("tolerances must be positive");
        }
        if self.inner_max_iter == 0 || self.root_max_iter == 0 {
            return bad("iteration limits must be at least 1");
        }
        if self.series_order == 0 || self.series_order > crate::rootfind::MAX_SERIES_ORDER {
            return bad("series order out of range");
        }
        Ok(())
    }

    /// `k0, k0 r, k0 r^2, ...` up to `k_max`.
    pub fn ks(&self) -> Vec<f64> {
        let limit = self.k_max * (1.0 + 1e-12);
        (0..)
            .map(|i| self.k0 * self.ratio.powi(i))
            .take_while(|&k| k <= limit)
            .collect()
    }
}

/// Discrete structure of a parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    /// `true` where the coefficient is free (nonzero or unpenalized).
    Support(Vec<bool>),
    /// Group label per coordinate, numbered from 1 by first appearance.
    Groups(Vec<usize>),
}

impl Pattern {
    pub fn len(&self) -> usize {
        match self {
            Pattern::Support(s) => s.len(),
            Pattern::Groups(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of free parameters the pattern leaves.
    pub fn free_parameters(&self) -> usize {
        match self {
            Pattern::Support(s) => s.iter().filter(|b| **b).count(),
            Pattern::Groups(g) => g.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn labels(&self) -> Option<&[usize]> {
        match self {
            Pattern::Groups(g) => Some(g),
            Pattern::Support(_) => None,
        }
    }

    pub fn support(&self) -> Option<&[bool]> {
        match self {
            Pattern::Support(s) => Some(s),
            Pattern::Groups(_) => None,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Support(s) => {
                let bits: String = s.iter().map(|&b| if b { '1' } else { '0' }).collect();
                f.write_str(&bits)
            }
            Pattern::Groups(g) => {
                let labels: Vec<String> = g.iter().map(|l| l.to_string()).collect();
                f.write_str(&labels.join(" "))
            }
        }
    }
}

/// Renumbers labels 1, 2, ... by first appearance.
pub(crate) fn canonical_labels<T: PartialEq + Copy>(raw: &[T]) -> Vec<usize> {
    let mut seen: Vec<T> = Vec::new();
    raw.iter()
        .map(|r| match seen.iter().position(|s| s == r) {
            Some(p) => p + 1,
            None => {
                seen.push(*r);
                seen.len()
            }
        })
        .collect()
}

/// Discrete pattern implied by `theta` with every coordinate penalized.
pub fn snap_pattern(theta: &[f64], mode: PenaltyMode, tol: f64) -> Pattern {
    snap_pattern_masked(theta, mode, tol, &vec![true; theta.len()])
}

/// As [`snap_pattern`], leaving unpenalized coordinates free: always in the
/// support, and in singleton groups.
pub fn snap_pattern_masked(theta: &[f64], mode: PenaltyMode, tol: f64, penalized: &[bool]) -> Pattern {
    match mode {
        PenaltyMode::ZeroPenalty => {
            Pattern::Support(theta.iter().zip(penalized).map(|(t, &p)| !p || t.abs() > tol).collect())
        }
        PenaltyMode::FusionPenalty => {
            let mut order: Vec<usize> = (0..theta.len()).filter(|&j| penalized[j]).collect();
            order.sort_by(|&a, &b| theta[a].total_cmp(&theta[b]));
            // Raw ids: runs of the sorted penalized values, then singletons.
            let mut raw = vec![0usize; theta.len()];
            let mut run = 0;
            for (pos, &j) in order.iter().enumerate() {
                if pos > 0 && theta[j] - theta[order[pos - 1]] > tol {
                    run += 1;
                }
                raw[j] = run;
            }
            let mut next = run + 1;
            for (j, &p) in penalized.iter().enumerate() {
                if !p {
                    raw[j] = next;
                    next += 1;
                }
            }
            Pattern::Groups(canonical_labels(&raw))
        }
    }
}

/// Exact refit under `pattern` and its criterion `-2ℓ + c_n p`.
pub fn polish<M: LikelihoodModel + ?Sized>(
    model: &M,
    pattern: &Pattern,
    ic_weight: f64,
) -> Result<(Vec<f64>, f64), ModelError> {
    let theta = model.constrained_fit(pattern)?;
    let ll = model.loglik(&theta)?;
    Ok((theta, -2.0 * ll + ic_weight * pattern.free_parameters() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateMethod {
    /// Gradient already within tolerance; coordinate left in place.
    Skipped,
    LagrangeSeries,
    Newton,
    /// Backtracking step scaled by the likelihood information.
    Scoring,
}

impl UpdateMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            UpdateMethod::Skipped => "skipped",
            UpdateMethod::LagrangeSeries => "lagrange",
            UpdateMethod::Newton => "newton",
            UpdateMethod::Scoring => "scoring",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "skipped" => Some(Self::Skipped),
            "lagrange" => Some(Self::LagrangeSeries),
            "newton" => Some(Self::Newton),
            "scoring" => Some(Self::Scoring),
            _ => None,
        }
    }
}

/// Outcome of the last update of one coordinate at a given `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateReport {
    pub iterations: usize,
    pub method: UpdateMethod,
    pub converged: bool,
    /// `|∂M_k/∂θ_j|` after the update.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub k: f64,
    pub theta: Vec<f64>,
    /// Surrogate criterion at `theta`.
    pub objective: f64,
    /// Smooth free-parameter count at `theta`.
    pub penalty_count: f64,
    /// Largest absolute coordinate gradient.
    pub grad_norm: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// Step from the previous record exceeds ten times the median step.
    pub jump: bool,
    pub reports: Vec<CoordinateReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPath {
    pub mode: PenaltyMode,
    pub ic_weight: f64,
    pub snap_tol: f64,
    pub penalized: Vec<bool>,
    pub records: Vec<PathRecord>,
    pub terminal_pattern: Pattern,
    pub polished_theta: Vec<f64>,
    pub polished_ic: f64,
}

impl SolutionPath {
    pub fn terminal(&self) -> &PathRecord {
        self.records.last().expect("a solution path has at least one record")
    }

    pub fn converged(&self) -> bool {
        self.terminal().converged
    }

    /// Snapped pattern of record `i`.
    pub fn pattern_at(&self, i: usize) -> Pattern {
        snap_pattern_masked(&self.records[i].theta, self.mode, self.snap_tol, &self.penalized)
    }
}

struct CoordinateTarget<'o, 'a, M: ?Sized> {
    objective: &'o SurrogateObjective<'a, M>,
    theta: &'o [f64],
    j: usize,
    max_order: usize,
}

impl<M: LikelihoodModel + ?Sized> DifferentiableTarget for CoordinateTarget<'_, '_, M> {
    fn max_order(&self) -> usize {
        self.max_order
    }

    fn eval(&self, x: f64, out: &mut [f64]) {
        if self
            .objective
            .coordinate_derivatives(self.theta, self.j, x, out)
            .is_err()
        {
            out.fill(f64::NAN);
        }
    }
}

fn update_coordinate<M: LikelihoodModel + ?Sized>(
    objective: &SurrogateObjective<'_, M>,
    theta: &mut [f64],
    j: usize,
    schedule: &ContinuationSchedule,
    coord_tol: f64,
) -> Result<CoordinateReport, ContinuationError> {
    let g0 = objective.grad(theta, j)?;
    if g0.abs() <= coord_tol {
        return Ok(CoordinateReport {
            iterations: 0,
            method: UpdateMethod::Skipped,
            converged: true,
            residual: g0.abs(),
        });
    }
    let v0 = theta[j];
    let m0 = objective.value(theta)?;
    let slack = 1e-12 * m0.abs().max(1.0);
    let value_at = |theta: &[f64], v: f64| objective.coordinate_derivative(theta, j, v, 0);

    let target = CoordinateTarget {
        objective,
        theta,
        j,
        max_order: (objective.analytic_order(theta, j) - 1).min(schedule.series_order),
    };
    let root = solve_root(&target, v0, schedule.series_order, coord_tol, schedule.root_max_iter)?;
    let cand = root.root_estimate;
    let acceptable = root.converged
        && cand.is_finite()
        && value_at(theta, cand).is_ok_and(|m| m <= m0 + slack)
        && objective
            .coordinate_derivative(theta, j, cand, 2)
            .is_ok_and(|h| h > 0.0);

    let (new_v, iterations, method) = if acceptable {
        let method = match root.method_used {
            RootMethod::LagrangeSeries => UpdateMethod::LagrangeSeries,
            RootMethod::Newton => UpdateMethod::Newton,
        };
        (cand, root.iterations, method)
    } else {
        // Information-scaled descent step with backtracking on the criterion.
        let h0 = objective.hess_diag(theta, j)?;
        let info = 2.0 * objective.model().info(theta, j)?;
        let curvature = h0.max(info);
        let mut step = -g0 / curvature;
        let mut accepted = v0;
        for _ in 0..=30 {
            let v = v0 + step;
            if v.is_finite() && value_at(theta, v).is_ok_and(|m| m < m0) {
                accepted = v;
                break;
            }
            step *= 0.5;
        }
        (accepted, 1, UpdateMethod::Scoring)
    };
    theta[j] = new_v;
    let residual = objective.grad(theta, j)?.abs();
    Ok(CoordinateReport {
        iterations,
        method,
        converged: residual <= coord_tol,
        residual,
    })
}

/// Common shift `δ` of a set of coordinates that are contiguous in the
/// sorted penalized order. Internal gaps are unchanged by the shift; only
/// the gap below the set (`lower_gap`) and above it (`upper_gap`) move, so
/// the derivatives along the shift stay cheap. Valid for
/// `-lower_gap <= δ <= upper_gap`, where the order is preserved.
struct ShiftTarget<'o, 'a, M: ?Sized> {
    objective: &'o SurrogateObjective<'a, M>,
    theta: &'o [f64],
    coords: &'o [usize],
    lower_gap: Option<f64>,
    upper_gap: Option<f64>,
}

impl<M: LikelihoodModel + ?Sized> ShiftTarget<'_, '_, M> {
    fn shifted(&self, delta: f64) -> Vec<f64> {
        let mut t = self.theta.to_vec();
        for &i in self.coords {
            t[i] += delta;
        }
        t
    }

    fn in_range(&self, delta: f64) -> bool {
        self.lower_gap.is_none_or(|g| delta >= -g) && self.upper_gap.is_none_or(|g| delta <= g)
    }
}

impl<M: LikelihoodModel + ?Sized> DifferentiableTarget for ShiftTarget<'_, '_, M> {
    fn max_order(&self) -> usize {
        1
    }

    fn eval(&self, x: f64, out: &mut [f64]) {
        let t = self.shifted(x);
        let model = self.objective.model();
        let s = self.objective.smoother();
        let c = self.objective.ic_weight();
        let gap = |order: usize| {
            let lo = self.lower_gap.map_or(0.0, |g| s.derivative_unchecked(g + x, order));
            let up = self.upper_gap.map_or(0.0, |g| s.derivative_unchecked(g - x, order));
            (lo, up)
        };
        let (lo, up) = gap(1);
        out[0] = match model.block_score(&t, self.coords) {
            Ok(score) => -2.0 * score + c * (up - lo),
            Err(_) => f64::NAN,
        };
        if out.len() > 1 {
            let (lo, up) = gap(2);
            out[1] = match model.block_info(&t, self.coords) {
                Ok(info) => 2.0 * info - c * (lo + up),
                Err(_) => f64::NAN,
            };
        }
    }
}

/// Moves `coords` by a common root-solved shift, keeping the sorted order.
fn shift_coordinates<M: LikelihoodModel + ?Sized>(
    objective: &SurrogateObjective<'_, M>,
    theta: &mut [f64],
    coords: &[usize],
    lower_gap: Option<f64>,
    upper_gap: Option<f64>,
    schedule: &ContinuationSchedule,
    tol: f64,
) -> Result<(), ContinuationError> {
    let target = ShiftTarget {
        objective,
        theta,
        coords,
        lower_gap,
        upper_gap,
    };
    let mut f = [0.0; 2];
    target.eval(0.0, &mut f);
    if !(f[0].abs() > tol) {
        return Ok(());
    }
    let m0 = objective.value(theta)?;
    let slack = 1e-12 * m0.abs().max(1.0);
    let value_at = |delta: f64| objective.value(&target.shifted(delta));

    let mut delta = solve_root(&target, 0.0, 1, tol, schedule.root_max_iter)
        .map(|r| r.root_estimate)
        .unwrap_or(f64::NAN);
    let fine = |d: f64| d.is_finite() && target.in_range(d);
    if !(fine(delta) && value_at(delta).is_ok_and(|m| m <= m0 + slack)) {
        let info = 2.0 * objective.model().block_info(theta, coords)?;
        let mut step = -f[0] / f[1].max(info);
        delta = 0.0;
        for _ in 0..=30 {
            if fine(step) && value_at(step).is_ok_and(|m| m < m0) {
                delta = step;
                break;
            }
            step *= 0.5;
        }
    }
    for &i in coords {
        theta[i] += delta;
    }
    Ok(())
}

/// Extra moves for fusion mode, in the sorted penalized order: every tail
/// above a gap narrower than the smoother width is shifted (changing that gap alone), then
/// every maximal run of such gaps is shifted as a block. Coordinate updates
/// alone contract tightly coupled runs very slowly.
fn fusion_moves<M: LikelihoodModel + ?Sized>(
    objective: &SurrogateObjective<'_, M>,
    theta: &mut [f64],
    schedule: &ContinuationSchedule,
    tol: f64,
) -> Result<(), ContinuationError> {
    let penalized = objective.penalized();
    let width = objective.smoother().width();
    let mut order: Vec<usize> = (0..theta.len()).filter(|&j| penalized[j]).collect();
    order.sort_by(|&a, &b| theta[a].total_cmp(&theta[b]).then(a.cmp(&b)));
    let gap = |theta: &[f64], m: usize| theta[order[m + 1]] - theta[order[m]];

    for m in 0..order.len().saturating_sub(1) {
        let g = gap(theta, m);
        if g <= width {
            shift_coordinates(objective, theta, &order[m + 1..], Some(g), None, schedule, tol)?;
        }
    }

    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && gap(theta, end) <= width {
            end += 1;
        }
        if end > start {
            let lower = (start > 0).then(|| gap(theta, start - 1));
            let upper = (end + 1 < order.len()).then(|| gap(theta, end));
            shift_coordinates(objective, theta, &order[start..=end], lower, upper, schedule, tol)?;
        }
        start = end + 1;
    }
    Ok(())
}

fn max_gradient<M: LikelihoodModel + ?Sized>(
    objective: &SurrogateObjective<'_, M>,
    theta: &[f64],
) -> Result<f64, ObjectiveError> {
    (0..theta.len()).try_fold(0.0f64, |acc, j| Ok(acc.max(objective.grad(theta, j)?.abs())))
}

/// Minimizes the surrogate criterion at one sharpness, starting from `theta`.
fn optimize_at_k<M: LikelihoodModel + ?Sized>(
    objective: &SurrogateObjective<'_, M>,
    theta: &mut [f64],
    schedule: &ContinuationSchedule,
) -> Result<(usize, bool, f64, Vec<CoordinateReport>), ContinuationError> {
    let q = theta.len();
    let coord_tol = 0.1 * schedule.inner_tol;
    let mut reports = vec![
        CoordinateReport {
            iterations: 0,
            method: UpdateMethod::Skipped,
            converged: true,
            residual: 0.0,
        };
        q
    ];
    let mut grad_norm = max_gradient(objective, theta)?;
    if grad_norm <= schedule.inner_tol {
        for (j, r) in reports.iter_mut().enumerate() {
            r.residual = objective.grad(theta, j)?.abs();
        }
        return Ok((0, true, grad_norm, reports));
    }
    let mut sweeps = 0;
    while sweeps < schedule.inner_max_iter {
        sweeps += 1;
        for (j, report) in reports.iter_mut().enumerate() {
            *report = update_coordinate(objective, theta, j, schedule, coord_tol)?;
        }
        if objective.mode() == PenaltyMode::FusionPenalty {
            fusion_moves(objective, theta, schedule, coord_tol)?;
        }
        if theta.iter().any(|t| !t.is_finite()) {
            break;
        }
        grad_norm = max_gradient(objective, theta)?;
        if grad_norm <= schedule.inner_tol {
            break;
        }
    }
    Ok((sweeps, grad_norm <= schedule.inner_tol, grad_norm, reports))
}

/// Runs the full continuation from `seed` and polishes the terminal pattern.
pub fn continuation_solve<M: LikelihoodModel + ?Sized>(
    model: &M,
    penalty: &PenaltySpec,
    schedule: &ContinuationSchedule,
    seed: &[f64],
) -> Result<SolutionPath, ContinuationError> {
    schedule.validate()?;
    if seed.len() != model.q() {
        return Err(ContinuationError::SeedLength {
            expected: model.q(),
            got: seed.len(),
        });
    }
    if seed.iter().any(|t| !t.is_finite()) {
        return Err(ContinuationError::NonFiniteSeed);
    }
    let mut theta = seed.to_vec();
    let mut records: Vec<PathRecord> = Vec::new();
    let mut ic_weight = 0.0;
    let mut penalized = Vec::new();
    for k in schedule.ks() {
        let objective = SurrogateObjective::new(model, penalty, k)?;
        ic_weight = objective.ic_weight();
        penalized = objective.penalized().to_vec();
        let outcome = optimize_at_k(&objective, &mut theta, schedule);
        let diverged = theta.iter().any(|t| !t.is_finite());
        let (sweeps, converged, grad_norm, reports) = match outcome {
            Ok(o) if !diverged => o,
            Ok(_) | Err(ContinuationError::Objective(ObjectiveError::NonFiniteParameter)) => {
                return Err(ContinuationError::Diverged { k, completed: records })
            }
            Err(e) => return Err(e),
        };
        records.push(PathRecord {
            k,
            objective: objective.value(&theta)?,
            penalty_count: objective.penalty_count(&theta)?,
            theta: theta.clone(),
            grad_norm,
            sweeps,
            converged,
            jump: false,
            reports,
        });
    }
    flag_jumps(seed, &mut records);

    let terminal = &records.last().expect("schedule has at least one k").theta;
    let terminal_pattern = snap_pattern_masked(terminal, penalty.mode, schedule.snap_tol, &penalized);
    let (polished_theta, polished_ic) = polish(model, &terminal_pattern, ic_weight)?;
    Ok(SolutionPath {
        mode: penalty.mode,
        ic_weight,
        snap_tol: schedule.snap_tol,
        penalized,
        records,
        terminal_pattern,
        polished_theta,
        polished_ic,
    })
}

/// Paths from several starts and the index of the one with the smallest
/// polished criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiStart {
    /// One path per `(seed, start_k)` pair, seeds outermost.
    pub paths: Vec<SolutionPath>,
    pub best: usize,
}

impl MultiStart {
    pub fn best_path(&self) -> &SolutionPath {
        &self.paths[self.best]
    }
}

/// Runs [`continuation_solve`] from every seed entered at every starting
/// sharpness in `start_ks` (each replacing `schedule.k0`), concurrently.
/// The best path minimizes the polished criterion; ties go to fewer free
/// parameters, then to the earlier start.
pub fn multistart_solve<M: LikelihoodModel + ?Sized>(
    model: &M,
    penalty: &PenaltySpec,
    schedule: &ContinuationSchedule,
    seeds: &[Vec<f64>],
    start_ks: &[f64],
) -> Result<MultiStart, ContinuationError> {
    if seeds.is_empty() || start_ks.is_empty() {
        return Err(ContinuationError::InvalidSchedule(
            "at least one seed and one starting sharpness are required".into(),
        ));
    }
    let schedules = start_ks
        .iter()
        .map(|&k0| {
            let s = ContinuationSchedule { k0, ..schedule.clone() };
            s.validate().map(|_| s)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<Result<SolutionPath, ContinuationError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .flat_map(|seed| schedules.iter().map(move |s| (seed, s)))
            .map(|(seed, s)| scope.spawn(move || continuation_solve(model, penalty, s, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("continuation worker panicked"))
            .collect()
    });
    let paths = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut best = 0;
    for (i, p) in paths.iter().enumerate().skip(1) {
        let b = &paths[best];
        let better = p
            .polished_ic
            .total_cmp(&b.polished_ic)
            .then(
                p.terminal_pattern
                    .free_parameters()
                    .cmp(&b.terminal_pattern.free_parameters()),
            )
            .is_lt();
        if better {
            best = i;
        }
    }
    Ok(MultiStart { paths, best })
}

fn flag_jumps(seed: &[f64], records: &mut [PathRecord]) {
    let mut prev = seed;
    let steps: Vec<f64> = records
        .iter()
        .map(|r| {
            let s = r.theta.iter().zip(prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prev = &r.theta;
            s
        })
        .collect();
    let mut sorted = steps.clone();
    sorted.sort_by(f64::total_cmp);
    let median = match sorted.len() {
        0 => return,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    };
    if median > 0.0 {
        for (r, s) in records.iter_mut().zip(steps) {
            r.jump = s > 10.0 * median;
        }
    }
}
