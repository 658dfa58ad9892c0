use std::fs::File;

use serde::Serialize;
use surrogate_ic::io::{self, read_table, DataTable};
use surrogate_ic::toy::{DEFAULT_TOY_SEED, DEFAULT_TOY_SIZE};
use surrogate_ic::{
    exhaustive_partition_ic, exhaustive_subset_ic, extract_clusters, multistart_solve, regression_toy, surface_slice,
    ContinuationError, ContinuationSchedule, GaussMeansData, IcWeight, LikelihoodModel, LinRegData, MultiStart,
    PenaltyMode, PenaltySpec, SmootherFamily, SolutionPath,
};

use crate::config::{SeedSpec, Settings};
use crate::{CliError, Output, TOY_KIND};

struct Input {
    table: DataTable,
    origin: String,
    summary: InputSummary,
}

#[derive(Serialize)]
struct InputSummary {
    data: Option<String>,
    synthetic: Option<SyntheticSummary>,
    rows: usize,
}

#[derive(Serialize)]
struct SyntheticSummary {
    kind: &'static str,
    seed: u64,
    n: usize,
}

fn load_input(s: &Settings) -> Result<Input, CliError> {
    let c = &s.config;
    match (&c.synthetic, &c.data) {
        (Some(_), Some(_)) => Err(s.error("synthetic", "give either `data` or `synthetic`, not both")),
        (Some(syn), None) => {
            if syn.kind != TOY_KIND {
                return Err(s.error(
                    "synthetic",
                    format!("unknown synthetic kind `{}`; expected `{TOY_KIND}`", syn.kind),
                ));
            }
            let seed = syn.seed.unwrap_or(DEFAULT_TOY_SEED);
            let n = syn.n.unwrap_or(DEFAULT_TOY_SIZE);
            if n < 3 {
                return Err(s.error("synthetic", "the regression toy needs n >= 3"));
            }
            let toy = regression_toy(seed, n);
            Ok(Input {
                table: DataTable {
                    headers: vec!["x".into(), "y".into()],
                    columns: vec![toy.x, toy.y],
                },
                origin: format!("synthetic {TOY_KIND} (seed {seed})"),
                summary: InputSummary {
                    data: None,
                    synthetic: Some(SyntheticSummary {
                        kind: TOY_KIND,
                        seed,
                        n,
                    }),
                    rows: n,
                },
            })
        }
        (None, Some(path)) => {
            let origin = path.display().to_string();
            let file = File::open(path).map_err(|e| CliError::Data(format!("{origin}: {e}")))?;
            let table = read_table(file).map_err(|e| CliError::Data(format!("{origin}: {e}")))?;
            Ok(Input {
                summary: InputSummary {
                    data: Some(origin.clone()),
                    synthetic: None,
                    rows: table.rows(),
                },
                table,
                origin,
            })
        }
        (None, None) => Err(s.invalid("no input data; set `data` or `synthetic`")),
    }
}

impl Input {
    fn column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        self.table
            .column(name)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| CliError::Data(format!("{}: line 1: no column named `{name}`", self.origin)))
    }

    fn data_error(&self, e: impl std::fmt::Display) -> CliError {
        CliError::Data(format!("{}: {e}", self.origin))
    }
}

pub(crate) fn weight_and_family(s: &Settings) -> Result<(IcWeight, SmootherFamily), CliError> {
    let weight = s
        .config
        .objective
        .as_deref()
        .unwrap_or("bic")
        .parse::<IcWeight>()
        .map_err(|e| s.error("objective", e))?;
    let family = s
        .config
        .smoother
        .as_deref()
        .unwrap_or("sech")
        .parse::<SmootherFamily>()
        .map_err(|e| s.error("smoother", e))?;
    Ok((weight, family))
}

fn schedule(s: &Settings, scale: f64) -> Result<ContinuationSchedule, CliError> {
    let c = &s.config;
    let mut sched = ContinuationSchedule::for_scale(scale);
    if let Some(v) = c.k0 {
        sched.k0 = v;
    }
    if let Some(v) = c.ratio {
        sched.ratio = v;
    }
    if let Some(v) = c.kmax {
        sched.k_max = v;
    }
    if let Some(v) = c.tol {
        sched.inner_tol = v;
    }
    if let Some(v) = c.max_sweeps {
        sched.inner_max_iter = v;
    }
    if let Some(v) = c.root_max_iter {
        sched.root_max_iter = v;
    }
    if let Some(v) = c.order {
        sched.series_order = v;
    }
    if let Some(v) = c.snap {
        sched.snap_tol = v;
    }
    sched.validate().map_err(|e| s.invalid(e))?;
    Ok(sched)
}

#[derive(Serialize)]
struct ScheduleSummary {
    k0: f64,
    ratio: f64,
    k_max: f64,
    inner_tol: f64,
    inner_max_iter: usize,
    series_order: usize,
    root_max_iter: usize,
    snap_tol: f64,
    steps: usize,
}

impl From<&ContinuationSchedule> for ScheduleSummary {
    fn from(s: &ContinuationSchedule) -> Self {
        Self {
            k0: s.k0,
            ratio: s.ratio,
            k_max: s.k_max,
            inner_tol: s.inner_tol,
            inner_max_iter: s.inner_max_iter,
            series_order: s.series_order,
            root_max_iter: s.root_max_iter,
            snap_tol: s.snap_tol,
            steps: s.ks().len(),
        }
    }
}

#[derive(Serialize)]
struct RunSummary {
    seed: String,
    start_k: f64,
    path_file: String,
    steps: usize,
    converged: bool,
    unconverged_steps: usize,
    jumps: usize,
    terminal_k: f64,
    terminal_grad_norm: f64,
    terminal_pattern: String,
    free_parameters: usize,
    polished_ic: f64,
    polished_theta: Vec<f64>,
}

fn run_summary(seed: &str, path: &SolutionPath, path_file: String) -> RunSummary {
    let t = path.terminal();
    RunSummary {
        seed: seed.to_string(),
        start_k: path.records[0].k,
        path_file,
        steps: path.records.len(),
        converged: path.converged(),
        unconverged_steps: path.records.iter().filter(|r| !r.converged).count(),
        jumps: path.records.iter().filter(|r| r.jump).count(),
        terminal_k: t.k,
        terminal_grad_norm: t.grad_norm,
        terminal_pattern: path.terminal_pattern.to_string(),
        free_parameters: path.terminal_pattern.free_parameters(),
        polished_ic: path.polished_ic,
        polished_theta: path.polished_theta.clone(),
    }
}

fn start_ks(s: &Settings, sched: &ContinuationSchedule) -> Result<Vec<f64>, CliError> {
    match &s.config.start_k {
        Some(ks) if ks.is_empty() => Err(s.error("start_k", "list is empty")),
        Some(ks) => Ok(ks.clone()),
        None => Ok(vec![sched.k0]),
    }
}

fn penalty(s: &Settings, mode: PenaltyMode, q: usize) -> Result<PenaltySpec, CliError> {
    let (weight, family) = weight_and_family(s)?;
    let spec = PenaltySpec::new(mode, family, weight);
    match &s.config.penalize {
        Some(mask) if mask.len() != q => Err(s.error(
            "penalize",
            format!("mask has {} entries, model has {q} parameters", mask.len()),
        )),
        Some(mask) => Ok(spec.with_mask(mask.clone())),
        None => Ok(spec),
    }
}

/// Runs every seed from every start and writes one path CSV per run.
fn solve_and_write<M: LikelihoodModel>(
    s: &Settings,
    out: &mut Output,
    stem: &str,
    model: &M,
    spec: &PenaltySpec,
    sched: &ContinuationSchedule,
    seeds: &[(String, Vec<f64>)],
) -> Result<(MultiStart, Vec<RunSummary>), CliError> {
    let ks = start_ks(s, sched)?;
    let vectors: Vec<Vec<f64>> = seeds.iter().map(|(_, v)| v.clone()).collect();
    let ms = multistart_solve(model, spec, sched, &vectors, &ks).map_err(|e| continuation_error(s, out, stem, e))?;
    let mut runs = Vec::with_capacity(ms.paths.len());
    for (r, path) in ms.paths.iter().enumerate() {
        let (i, j) = (r / ks.len(), r % ks.len());
        let name = if ks.len() == 1 {
            format!("{stem}_seed{i}.csv")
        } else {
            format!("{stem}_seed{i}_start{j}.csv")
        };
        out.write(&name, |w| io::write_path_csv(path, w))?;
        runs.push(run_summary(&seeds[i].0, path, name));
    }
    Ok((ms, runs))
}

fn continuation_error(s: &Settings, out: &mut Output, stem: &str, e: ContinuationError) -> CliError {
    match e {
        ContinuationError::Diverged { k, completed } => {
            let name = format!("{stem}_diverged.csv");
            match out.write(&name, |w| io::write_path_records(&completed, w)) {
                Ok(()) => CliError::Solver(format!(
                    "iterate became non-finite at k = {k}; the {} completed steps are in {name}",
                    completed.len()
                )),
                Err(write_err) => write_err,
            }
        }
        ContinuationError::Model(m) => CliError::Data(m.to_string()),
        ContinuationError::Root(r) => CliError::Solver(r.to_string()),
        other => s.invalid(other),
    }
}

struct Regression {
    data: LinRegData,
    names: Vec<String>,
}

fn regression(s: &Settings, input: &Input) -> Result<Regression, CliError> {
    let c = &s.config;
    let response = match (&c.response, &c.synthetic) {
        (Some(r), _) => r.clone(),
        (None, Some(_)) => "y".to_string(),
        (None, None) => return Err(s.invalid("`response` is required for regression data")),
    };
    let predictors: Vec<String> = match &c.predictors {
        Some(p) => p.clone(),
        None => input
            .table
            .headers
            .iter()
            .filter(|h| **h != response)
            .cloned()
            .collect(),
    };
    let intercept = c.intercept.unwrap_or(true);
    if predictors.is_empty() && !intercept {
        return Err(s.invalid("the model has no parameters; add predictors or an intercept"));
    }
    let y = input.column(&response)?;
    let xs = predictors
        .iter()
        .map(|p| input.column(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut data = LinRegData::from_predictors(&xs, y, intercept).map_err(|e| input.data_error(e))?;
    if let Some(sigma) = c.sigma {
        data = data.with_sigma2(sigma * sigma).map_err(|e| s.error("sigma", e))?;
    }
    let mut names = Vec::new();
    if intercept {
        names.push("intercept".to_string());
    }
    names.extend(predictors);
    Ok(Regression { data, names })
}

fn regression_seeds(s: &Settings, d: &LinRegData) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let specs = s
        .config
        .seeds
        .clone()
        .unwrap_or_else(|| vec![SeedSpec::Named("ols".into())]);
    if specs.is_empty() {
        return Err(s.error("seeds", "list is empty"));
    }
    let q = d.q();
    specs
        .into_iter()
        .map(|spec| match spec {
            SeedSpec::Named(name) => match name.as_str() {
                "ols" => d
                    .ols(&(0..q).collect::<Vec<_>>())
                    .map(|v| (name.clone(), v))
                    .map_err(|e| CliError::Data(e.to_string())),
                "zero" => Ok((name.clone(), vec![0.0; q])),
                other => Err(s.error(
                    "seeds",
                    format!("unknown seed `{other}` for regression; expected ols, zero or a vector"),
                )),
            },
            SeedSpec::Values(v) if v.len() == q => Ok(("vector".to_string(), v)),
            SeedSpec::Values(v) => Err(s.error(
                "seeds",
                format!("seed vector has {} values, model has {q} parameters", v.len()),
            )),
        })
        .collect()
}

fn means_seeds(s: &Settings, y: &[f64]) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let specs = s
        .config
        .seeds
        .clone()
        .unwrap_or_else(|| vec![SeedSpec::Named("data".into())]);
    if specs.is_empty() {
        return Err(s.error("seeds", "list is empty"));
    }
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    specs
        .into_iter()
        .map(|spec| match spec {
            SeedSpec::Named(name) => match name.as_str() {
                "data" => Ok((name.clone(), y.to_vec())),
                "zero" => Ok((name.clone(), vec![0.0; n])),
                "mean" => Ok((name.clone(), vec![mean; n])),
                other => Err(s.error(
                    "seeds",
                    format!("unknown seed `{other}` for cluster means; expected data, zero, mean or a vector"),
                )),
            },
            SeedSpec::Values(v) if v.len() == n => Ok(("vector".to_string(), v)),
            SeedSpec::Values(v) => Err(s.error(
                "seeds",
                format!("seed vector has {} values, data has {n} observations", v.len()),
            )),
        })
        .collect()
}

fn means_model(s: &Settings, input: &Input, y: Vec<f64>) -> Result<GaussMeansData, CliError> {
    match s.config.sigma {
        Some(sigma) => GaussMeansData::new(y, sigma).map_err(|e| s.error("sigma", e)),
        None => GaussMeansData::with_plugin_sigma(y).map_err(|e| input.data_error(e)),
    }
}

fn stem_for(name: &str) -> String {
    name.chars()
        .map(|ch| {
            if ch.is_ascii_alphanumeric() || ch == '-' || ch == '_' {
                ch
            } else {
                '_'
            }
        })
        .collect()
}

#[derive(Serialize)]
struct SelectSummary {
    mode: &'static str,
    input: InputSummary,
    objective: String,
    ic_weight: f64,
    smoother: String,
    parameters: Vec<String>,
    penalized: Vec<bool>,
    schedule: ScheduleSummary,
    runs: Vec<RunSummary>,
    best_run: usize,
    terminal_pattern: String,
    selected: Vec<String>,
    polished_ic: f64,
    polished_theta: Vec<f64>,
    converged: bool,
}

pub(crate) fn select(s: &Settings, out: &mut Output) -> Result<bool, CliError> {
    let input = load_input(s)?;
    let reg = regression(s, &input)?;
    let d = &reg.data;
    let spec = penalty(s, PenaltyMode::ZeroPenalty, d.q())?;
    let sched = schedule(s, d.parameter_scale())?;
    let seeds = regression_seeds(s, d)?;
    let (ms, runs) = solve_and_write(s, out, "path", d, &spec, &sched, &seeds)?;
    let best = ms.best_path();
    let support = best.terminal_pattern.support().unwrap_or(&[]);
    let converged = ms.paths.iter().all(SolutionPath::converged);
    let summary = SelectSummary {
        mode: "select",
        objective: spec.weight.to_string(),
        ic_weight: best.ic_weight,
        smoother: spec.family.to_string(),
        penalized: best.penalized.clone(),
        schedule: (&sched).into(),
        best_run: ms.best,
        terminal_pattern: best.terminal_pattern.to_string(),
        selected: reg
            .names
            .iter()
            .zip(support)
            .filter(|(_, &keep)| keep)
            .map(|(n, _)| n.clone())
            .collect(),
        polished_ic: best.polished_ic,
        polished_theta: best.polished_theta.clone(),
        converged,
        parameters: reg.names.clone(),
        runs,
        input: input.summary,
    };
    out.write_json("summary.json", &summary)?;
    Ok(converged)
}

#[derive(Serialize)]
struct ColumnSummary {
    name: String,
    sigma: f64,
    ic_weight: f64,
    schedule: ScheduleSummary,
    runs: Vec<RunSummary>,
    best_run: usize,
    groups: usize,
    group_means: Vec<f64>,
    polished_ic: f64,
    converged: bool,
}

#[derive(Serialize)]
struct ClusterSummary {
    mode: &'static str,
    input: InputSummary,
    objective: String,
    smoother: String,
    columns: Vec<ColumnSummary>,
    merged_groups: usize,
    group_sizes: Vec<usize>,
    split_observations: Vec<usize>,
    converged: bool,
}

fn cluster_columns(s: &Settings, input: &Input) -> Result<Vec<String>, CliError> {
    let cols = s.config.columns.clone().unwrap_or_else(|| input.table.headers.clone());
    if cols.is_empty() {
        return Err(s.error("columns", "list is empty"));
    }
    Ok(cols)
}

pub(crate) fn cluster(s: &Settings, out: &mut Output) -> Result<bool, CliError> {
    let input = load_input(s)?;
    let names = cluster_columns(s, &input)?;
    let mut labels = Vec::with_capacity(names.len());
    let mut columns = Vec::with_capacity(names.len());
    let (weight, family) = weight_and_family(s)?;
    for name in &names {
        let y = input.column(name)?;
        let d = means_model(s, &input, y)?;
        let spec = penalty(s, PenaltyMode::FusionPenalty, d.q())?;
        let sched = schedule(s, d.sigma())?;
        let seeds = means_seeds(s, d.y())?;
        let stem = format!("path_{}", stem_for(name));
        let (ms, runs) = solve_and_write(s, out, &stem, &d, &spec, &sched, &seeds)?;
        let best = ms.best_path();
        let groups = best.terminal_pattern.labels().unwrap_or(&[]).to_vec();
        let group_count = groups.iter().copied().max().unwrap_or(0);
        let group_means = (1..=group_count)
            .map(|g| {
                let i = groups.iter().position(|&l| l == g).unwrap_or(0);
                best.polished_theta[i]
            })
            .collect();
        columns.push(ColumnSummary {
            name: name.clone(),
            sigma: d.sigma(),
            ic_weight: best.ic_weight,
            schedule: (&sched).into(),
            best_run: ms.best,
            groups: group_count,
            group_means,
            polished_ic: best.polished_ic,
            converged: ms.paths.iter().all(SolutionPath::converged),
            runs,
        });
        labels.push(groups);
    }
    let assignment = extract_clusters(&labels).map_err(|e| CliError::Solver(e.to_string()))?;
    out.write("clusters.csv", |w| io::write_cluster_csv(&assignment, &names, w))?;
    let converged = columns.iter().all(|c| c.converged);
    let summary = ClusterSummary {
        mode: "cluster",
        objective: weight.to_string(),
        smoother: family.to_string(),
        merged_groups: assignment.group_count(),
        group_sizes: assignment.group_sizes(),
        split_observations: (0..assignment.n())
            .filter(|&i| assignment.split_flags[i])
            .map(|i| i + 1)
            .collect(),
        converged,
        columns,
        input: input.summary,
    };
    out.write_json("summary.json", &summary)?;
    Ok(converged)
}

#[derive(Serialize)]
struct OracleSummary {
    mode: &'static str,
    input: InputSummary,
    objective: String,
    ic_weight: f64,
    parameters: Vec<String>,
    patterns: usize,
    best_pattern: String,
    free_parameters: usize,
    best_ic: f64,
    best_theta: Vec<f64>,
}

fn reject_mask(s: &Settings) -> Result<(), CliError> {
    if s.config.penalize.is_some() {
        return Err(s.error(
            "penalize",
            "oracle modes always enumerate the model's default penalized set",
        ));
    }
    Ok(())
}

pub(crate) fn oracle_subset(s: &Settings, out: &mut Output) -> Result<bool, CliError> {
    reject_mask(s)?;
    let input = load_input(s)?;
    let reg = regression(s, &input)?;
    let (weight, _) = weight_and_family(s)?;
    let c = weight.value(reg.data.n()).map_err(|e| s.error("objective", e))?;
    let table = exhaustive_subset_ic(&reg.data, c).map_err(|e| input.data_error(e))?;
    out.write("oracle_subset.csv", |w| io::write_oracle_csv(&table, w))?;
    let best = table.best_row();
    let summary = OracleSummary {
        mode: "oracle-subset",
        objective: weight.to_string(),
        ic_weight: c,
        parameters: reg.names,
        patterns: table.rows.len(),
        best_pattern: best.pattern.to_string(),
        free_parameters: best.p,
        best_ic: best.ic,
        best_theta: best.theta.clone(),
        input: input.summary,
    };
    out.write_json("summary.json", &summary)?;
    Ok(true)
}

pub(crate) fn oracle_partition(s: &Settings, out: &mut Output) -> Result<bool, CliError> {
    reject_mask(s)?;
    let input = load_input(s)?;
    let names = cluster_columns(s, &input)?;
    if names.len() != 1 {
        return Err(s.error(
            "columns",
            format!("partition enumeration uses one column, got {}", names.len()),
        ));
    }
    let d = means_model(s, &input, input.column(&names[0])?)?;
    let (weight, _) = weight_and_family(s)?;
    let c = weight.value(d.n()).map_err(|e| s.error("objective", e))?;
    let table = exhaustive_partition_ic(&d, c).map_err(|e| input.data_error(e))?;
    out.write("oracle_partition.csv", |w| io::write_oracle_csv(&table, w))?;
    let best = table.best_row();
    let summary = OracleSummary {
        mode: "oracle-partition",
        objective: weight.to_string(),
        ic_weight: c,
        parameters: (1..=d.n()).map(|i| format!("{}_{i}", names[0])).collect(),
        patterns: table.rows.len(),
        best_pattern: best.pattern.to_string(),
        free_parameters: best.p,
        best_ic: best.ic,
        best_theta: best.theta.clone(),
        input: input.summary,
    };
    out.write_json("summary.json", &summary)?;
    Ok(true)
}

#[derive(Serialize)]
struct Curve {
    k: f64,
    /// Interior grid points lower than both neighbours.
    local_minima: Vec<f64>,
    argmin: f64,
    min_surrogate_ic: f64,
}

#[derive(Serialize)]
struct SurfaceSummary {
    mode: &'static str,
    input: InputSummary,
    objective: String,
    ic_weight: f64,
    smoother: String,
    parameters: Vec<String>,
    coordinate: usize,
    base: Vec<f64>,
    lo: f64,
    hi: f64,
    points: usize,
    curves: Vec<Curve>,
}

pub(crate) fn surface(s: &Settings, out: &mut Output) -> Result<bool, CliError> {
    let cfg = s
        .config
        .surface
        .clone()
        .ok_or_else(|| s.invalid("surface mode needs a `surface` section"))?;
    let input = load_input(s)?;
    let reg = regression(s, &input)?;
    let d = &reg.data;
    let q = d.q();
    let spec = penalty(s, PenaltyMode::ZeroPenalty, q)?;
    let j = cfg.coordinate.unwrap_or(q - 1);
    if j >= q {
        return Err(s.error("coordinate", format!("index {j} out of range for {q} parameters")));
    }
    if cfg.k_list.is_empty() {
        return Err(s.error("k_list", "list is empty"));
    }
    let base = match cfg.base {
        Some(b) if b.len() != q => {
            return Err(s.error("base", format!("has {} values, model has {q} parameters", b.len())));
        }
        Some(b) => b,
        None => d.ols(&(0..q).collect::<Vec<_>>()).map_err(|e| input.data_error(e))?,
    };
    let scale = d.parameter_scale();
    let lo = cfg.lo.unwrap_or(base[j].min(0.0) - 2.0 * scale);
    let hi = cfg.hi.unwrap_or(base[j].max(0.0) + 2.0 * scale);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(s.error("lo", "need finite lo < hi"));
    }
    let points = cfg.points.unwrap_or(401);
    if points < 3 {
        return Err(s.error("points", "need at least 3 grid points"));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    let surface = surface_slice(d, &spec, &base, j, &cfg.k_list, &grid).map_err(|e| s.error("k_list", e))?;
    out.write("surface.csv", |w| io::write_surface_csv(&surface, w))?;

    let curves = surface
        .chunks(points)
        .map(|curve| {
            let local_minima = curve
                .windows(3)
                .filter(|w| w[1].surrogate_ic < w[0].surrogate_ic && w[1].surrogate_ic <= w[2].surrogate_ic)
                .map(|w| w[1].theta)
                .collect();
            let lowest = curve
                .iter()
                .min_by(|a, b| a.surrogate_ic.total_cmp(&b.surrogate_ic))
                .expect("grid is non-empty");
            Curve {
                k: curve[0].k,
                local_minima,
                argmin: lowest.theta,
                min_surrogate_ic: lowest.surrogate_ic,
            }
        })
        .collect();
    let (weight, family) = weight_and_family(s)?;
    let summary = SurfaceSummary {
        mode: "surface",
        objective: weight.to_string(),
        ic_weight: weight.value(d.n()).map_err(|e| s.error("objective", e))?,
        smoother: family.to_string(),
        parameters: reg.names,
        coordinate: j,
        base,
        lo,
        hi,
        points,
        curves,
        input: input.summary,
    };
    out.write_json("summary.json", &summary)?;
    Ok(true)
}
