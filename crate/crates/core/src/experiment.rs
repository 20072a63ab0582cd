//! Experiment grids: generated or loaded instances × λ families ×
//! formulations × strengthening configurations, aggregated per cell.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::formulation::Formulation;
use crate::instance::{load_instance_file, Instance, InstanceGenerator};
use crate::lambda::LambdaSpec;
use crate::pipeline::solve_instance;
use crate::solver::{SolveStatus, SolverConfig, SolverProfile};
use crate::strengthen::StrengthenConfig;

/// Seconds charged for a run that hit the time limit when averaging.
pub const TIMEOUT_CHARGE_S: f64 = 7200.0;

fn default_replications() -> usize {
    5
}
fn default_seed() -> u64 {
    1
}
fn default_fraction() -> f64 {
    0.5
}
fn default_formulations() -> Vec<String> {
    vec!["uv".into()]
}
fn default_configs() -> Vec<String> {
    vec!["none".into()]
}
fn default_time_limit() -> f64 {
    7200.0
}
fn default_true() -> bool {
    true
}
fn default_parallelism() -> usize {
    1
}
fn default_charge() -> f64 {
    TIMEOUT_CHARGE_S
}

/// Grid description, read from TOML.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    /// Instance files; when nonempty the generator lists are ignored.
    #[serde(default)]
    pub instances: Vec<PathBuf>,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub p: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Replication `r` uses generator seed `seed + 1000 r`.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_fraction")]
    pub capacity_fraction: f64,
    pub lambdas: Vec<String>,
    #[serde(default = "default_formulations")]
    pub formulations: Vec<String>,
    /// Strengthening labels such as `none` or `p12+dv3_3+packing`.
    #[serde(default = "default_configs")]
    pub configs: Vec<String>,
    #[serde(default)]
    pub solver_profile: Option<PathBuf>,
    #[serde(default = "default_time_limit")]
    pub time_limit_s: f64,
    #[serde(default = "default_true")]
    pub disable_solver_cuts: bool,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_charge")]
    pub timeout_charge_s: f64,
    #[serde(default)]
    pub results_dir: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

/// Parsed and checked grid axes.
#[derive(Clone, Debug)]
pub struct GridPlan {
    pub lambdas: Vec<LambdaSpec>,
    pub formulations: Vec<Formulation>,
    pub configs: Vec<StrengthenConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Relative paths inside the file resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.instances.iter_mut().for_each(fix);
        cfg.solver_profile.iter_mut().for_each(fix);
        cfg.results_dir.iter_mut().for_each(fix);
        cfg.csv.iter_mut().for_each(fix);
        Ok(cfg)
    }

    pub fn plan(&self) -> Result<GridPlan> {
        let nonempty = |what: &str, len: usize| {
            if len == 0 {
                Err(Error::Validation(format!("grid has an empty {what} list")))
            } else {
                Ok(())
            }
        };
        nonempty("lambda", self.lambdas.len())?;
        nonempty("formulation", self.formulations.len())?;
        nonempty("config", self.configs.len())?;
        if self.instances.is_empty() {
            nonempty("n", self.n.len())?;
            nonempty("p", self.p.len())?;
            if self.replications == 0 {
                return Err(Error::Validation("replications must be positive".into()));
            }
        }
        if !(self.time_limit_s > 0.0) {
            return Err(Error::Validation(format!("time limit {} must be positive", self.time_limit_s)));
        }
        Ok(GridPlan {
            lambdas: self.lambdas.iter().map(|s| s.parse()).collect::<Result<_>>()?,
            formulations: self.formulations.iter().map(|s| s.parse()).collect::<Result<_>>()?,
            configs: self.configs.iter().map(|s| s.parse()).collect::<Result<_>>()?,
        })
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let profile = match &self.solver_profile {
            Some(p) => SolverProfile::load(p)?,
            None => SolverProfile::default_profile()?,
        };
        let mut cfg = SolverConfig::new(profile).with_time_limit(self.time_limit_s);
        cfg.disable_solver_cuts = self.disable_solver_cuts;
        Ok(cfg)
    }
}

/// One solve of the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub lambda: String,
    pub n: usize,
    pub p: usize,
    pub formulation: Formulation,
    pub config: String,
    pub replication: usize,
    /// Generator seed or instance path.
    pub source: String,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub rgap: Option<f64>,
    pub nodes: Option<u64>,
    pub time_s: f64,
    pub prep_time_s: f64,
    pub fixed_pct: f64,
    pub cuts: usize,
    pub error: Option<String>,
}

/// Cell averages in the layout of the result tables.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub lambda: String,
    pub n: usize,
    pub p: usize,
    pub formulation: Formulation,
    pub config: String,
    pub runs: usize,
    pub rgap: Option<f64>,
    pub nodes: Option<f64>,
    /// Mean wall time with the timeout charge substituted for timeouts.
    pub time_s: f64,
    pub timeouts: usize,
    pub errors: usize,
    pub prep_time_s: f64,
    pub fixed_pct: f64,
    pub cuts: f64,
    pub status: String,
}

impl ResultRow {
    /// `formulation/config`, the key used to pair rows across variants.
    pub fn variant(&self) -> String {
        format!("{}/{}", self.formulation, self.config)
    }

    /// Time with the timeout count appended, e.g. `3605.00(2)`.
    pub fn time_display(&self) -> String {
        if self.timeouts > 0 {
            format!("{:.2}({})", self.time_s, self.timeouts)
        } else {
            format!("{:.2}", self.time_s)
        }
    }
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, count) = xs.into_iter().fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Aggregates runs of one cell. Failed runs count in `errors` only.
pub fn aggregate(runs: &[RunRecord], timeout_charge_s: f64) -> Option<ResultRow> {
    let first = runs.first()?;
    let ok: Vec<&RunRecord> = runs.iter().filter(|r| r.status != SolveStatus::Error).collect();
    let timeouts = ok.iter().filter(|r| r.status == SolveStatus::TimeLimit).count();
    let errors = runs.len() - ok.len();
    let charged = ok.iter().map(|r| {
        if r.status == SolveStatus::TimeLimit {
            timeout_charge_s
        } else {
            r.time_s
        }
    });
    let status = if errors == runs.len() {
        "error"
    } else if errors > 0 {
        "partial"
    } else if timeouts > 0 {
        "time_limit"
    } else if ok.iter().all(|r| r.status == SolveStatus::Optimal) {
        "optimal"
    } else {
        "mixed"
    };
    Some(ResultRow {
        lambda: first.lambda.clone(),
        n: first.n,
        p: first.p,
        formulation: first.formulation,
        config: first.config.clone(),
        runs: runs.len(),
        rgap: mean(ok.iter().filter_map(|r| r.rgap)),
        nodes: mean(ok.iter().filter_map(|r| r.nodes.map(|x| x as f64))),
        time_s: mean(charged).unwrap_or(0.0),
        timeouts,
        errors,
        prep_time_s: mean(ok.iter().map(|r| r.prep_time_s)).unwrap_or(0.0),
        fixed_pct: mean(ok.iter().map(|r| r.fixed_pct)).unwrap_or(0.0),
        cuts: mean(ok.iter().map(|r| r.cuts as f64)).unwrap_or(0.0),
        status: status.into(),
    })
}

#[derive(Clone, Debug)]
pub struct GridReport {
    pub runs: Vec<RunRecord>,
    pub rows: Vec<ResultRow>,
}

struct Job {
    lambda_idx: usize,
    spec: LambdaSpec,
    inst: std::result::Result<Instance, String>,
    source: String,
    n: usize,
    p: usize,
    replication: usize,
}

type Sourced = (std::result::Result<Instance, String>, String, usize, usize, usize);

fn instances(cfg: &ExperimentConfig) -> Vec<Sourced> {
    if !cfg.instances.is_empty() {
        return cfg
            .instances
            .iter()
            .map(|path| {
                let inst = load_instance_file(path).map_err(|e| e.to_string());
                let (n, p) = inst.as_ref().map_or((0, 0), |i| (i.n(), i.p()));
                (inst, path.display().to_string(), n, p, 0)
            })
            .collect();
    }
    let mut out = Vec::new();
    for &n in &cfg.n {
        for &p in &cfg.p {
            for r in 0..cfg.replications {
                let mut gen = InstanceGenerator::new(n, p);
                gen.capacity_fraction = cfg.capacity_fraction;
                let seed = cfg.seed + 1000 * r as u64;
                let (inst, source) = match gen.generate(seed) {
                    Ok((inst, used)) => (Ok(inst), format!("seed:{used}")),
                    Err(e) => (Err(e.to_string()), format!("seed:{seed}")),
                };
                out.push((inst, source, n, p, r));
            }
        }
    }
    out
}

fn run_one(job: &Job, formulation: Formulation, config: &StrengthenConfig, solver: &SolverConfig) -> RunRecord {
    let mut rec = RunRecord {
        lambda: job.spec.kind().to_string(),
        n: job.n,
        p: job.p,
        formulation,
        config: config.label(),
        replication: job.replication,
        source: job.source.clone(),
        status: SolveStatus::Error,
        objective: None,
        rgap: None,
        nodes: None,
        time_s: 0.0,
        prep_time_s: 0.0,
        fixed_pct: 0.0,
        cuts: 0,
        error: None,
    };
    let result = job.inst.as_ref().map_err(|e| Error::Config(e.clone())).and_then(|inst| {
        let lambda = job.spec.instantiate(inst.n())?;
        solve_instance(inst, &lambda, formulation, config, solver)
    });
    match result {
        Ok(res) => {
            rec.status = res.outcome.status;
            rec.objective = res.objective();
            rec.rgap = res.rgap;
            rec.nodes = res.outcome.node_count;
            rec.time_s = res.outcome.wall_time_seconds;
            rec.prep_time_s = res.strengthen.prep_time_s;
            rec.fixed_pct = 100.0 * res.strengthen.fixing.fixed_fraction;
            rec.cuts = res.strengthen.cuts_added;
        }
        Err(e) => {
            log::warn!("{} {} {}: {e}", rec.lambda, rec.source, rec.config);
            rec.error = Some(e.to_string());
        }
    }
    rec
}

/// Runs every cell × replication, writes the CSV when configured and returns
/// per-run records and per-cell rows grouped λ-first.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<GridReport> {
    let plan = cfg.plan()?;
    let base_solver = cfg.solver_config()?;
    let mut jobs = Vec::new();
    for (inst, source, n, p, replication) in instances(cfg) {
        for (lambda_idx, spec) in plan.lambdas.iter().enumerate() {
            jobs.push(Job {
                lambda_idx,
                spec: spec.clone(),
                inst: inst.clone(),
                source: source.clone(),
                n,
                p,
                replication,
            });
        }
    }
    let mut tasks = Vec::new();
    for job in &jobs {
        for (fi, &f) in plan.formulations.iter().enumerate() {
            for (ci, c) in plan.configs.iter().enumerate() {
                tasks.push((job, fi, f, ci, c));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut runs: Vec<((usize, usize, usize, usize, usize, usize), RunRecord)> = pool.install(|| {
        tasks
            .par_iter()
            .enumerate()
            .map(|(t, &(job, fi, f, ci, c))| {
                let mut solver = base_solver.clone();
                if let Some(dir) = &cfg.results_dir {
                    let d = dir.join(format!("run{t:05}"));
                    if std::fs::create_dir_all(&d).is_ok() {
                        solver.work_dir = Some(d);
                    }
                }
                let key = (job.lambda_idx, job.n, job.p, fi, ci, job.replication);
                (key, run_one(job, f, c, &solver))
            })
            .collect()
    });
    runs.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.source.cmp(&b.1.source)));

    let mut cells: BTreeMap<(usize, usize, usize, usize, usize), Vec<RunRecord>> = BTreeMap::new();
    for ((l, n, p, f, c, _), rec) in &runs {
        cells.entry((*l, *n, *p, *f, *c)).or_default().push(rec.clone());
    }
    let rows: Vec<ResultRow> = cells
        .values()
        .filter_map(|r| aggregate(r, cfg.timeout_charge_s))
        .collect();
    let report = GridReport {
        runs: runs.into_iter().map(|(_, r)| r).collect(),
        rows,
    };
    if let Some(path) = &cfg.csv {
        write_csv(&report.rows, path)?;
    }
    Ok(report)
}

pub const CSV_HEADER: [&str; 15] = [
    "lambda",
    "n",
    "p",
    "formulation",
    "config",
    "runs",
    "RGAP",
    "Nodes",
    "Time",
    "Timeouts",
    "T.prep",
    "Fixed",
    "Cuts",
    "Errors",
    "Status",
];

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v:.2}"))
}

pub fn write_csv_to<W: std::io::Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.lambda.clone(),
            r.n.to_string(),
            r.p.to_string(),
            r.formulation.to_string(),
            r.config.clone(),
            r.runs.to_string(),
            opt(r.rgap),
            opt(r.nodes),
            r.time_display(),
            r.timeouts.to_string(),
            format!("{:.2}", r.prep_time_s),
            format!("{:.2}", r.fixed_pct),
            format!("{:.1}", r.cuts),
            r.errors.to_string(),
            r.status.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(())
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(rows, file)
}

// ---------------------------------------------------------------------------
// Comparisons

/// `200 (b − a) / (|a| + |b|)`; swapping the arguments negates it.
pub fn symmetric_delta(a: f64, b: f64) -> f64 {
    let d = a.abs() + b.abs();
    if d == 0.0 {
        0.0
    } else {
        200.0 * (b - a) / d
    }
}

/// `100 (a − b) / a`, the reduction of `b` relative to the base `a`.
pub fn reduction(a: f64, b: f64) -> Option<f64> {
    (a != 0.0).then(|| 100.0 * (a - b) / a)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricDelta {
    pub base: f64,
    pub other: f64,
    pub symmetric: f64,
    pub reduction: Option<f64>,
}

impl MetricDelta {
    fn new(base: f64, other: f64) -> Self {
        MetricDelta {
            base,
            other,
            symmetric: symmetric_delta(base, other),
            reduction: reduction(base, other),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellComparison {
    pub lambda: String,
    pub n: usize,
    pub p: usize,
    pub time: MetricDelta,
    pub nodes: Option<MetricDelta>,
    pub rgap: Option<MetricDelta>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub base: String,
    pub other: String,
    pub cells: Vec<CellComparison>,
    /// Deltas between the means over all paired cells.
    pub total_time: Option<MetricDelta>,
    pub total_nodes: Option<MetricDelta>,
    pub total_rgap: Option<MetricDelta>,
}

/// Pairs rows of variants `base` and `other` (see [`ResultRow::variant`]) by
/// `(λ, n, p)`.
pub fn compare_configs(rows: &[ResultRow], base: &str, other: &str) -> Result<Comparison> {
    let index = |v: &str| -> BTreeMap<(String, usize, usize), &ResultRow> {
        rows.iter()
            .filter(|r| r.variant() == v)
            .map(|r| ((r.lambda.clone(), r.n, r.p), r))
            .collect()
    };
    let (a, b) = (index(base), index(other));
    if a.is_empty() || b.is_empty() {
        return Err(Error::Validation(format!("no rows for `{}`", if a.is_empty() { base } else { other })));
    }
    let mut cells = Vec::new();
    for (key, ra) in &a {
        let Some(rb) = b.get(key) else {
            log::warn!("cell {key:?} has no `{other}` row; skipped");
            continue;
        };
        let pair = |x: Option<f64>, y: Option<f64>| Some(MetricDelta::new(x?, y?));
        cells.push(CellComparison {
            lambda: key.0.clone(),
            n: key.1,
            p: key.2,
            time: MetricDelta::new(ra.time_s, rb.time_s),
            nodes: pair(ra.nodes, rb.nodes),
            rgap: pair(ra.rgap, rb.rgap),
        });
    }
    for key in b.keys().filter(|k| !a.contains_key(*k)) {
        log::warn!("cell {key:?} has no `{base}` row; skipped");
    }
    let total = |f: &dyn Fn(&CellComparison) -> Option<&MetricDelta>| {
        let ds: Vec<&MetricDelta> = cells.iter().filter_map(f).collect();
        let base = mean(ds.iter().map(|d| d.base))?;
        let other = mean(ds.iter().map(|d| d.other))?;
        Some(MetricDelta::new(base, other))
    };
    Ok(Comparison {
        base: base.into(),
        other: other.into(),
        total_time: total(&|c| Some(&c.time)),
        total_nodes: total(&|c| c.nodes.as_ref()),
        total_rgap: total(&|c| c.rgap.as_ref()),
        cells,
    })
}
