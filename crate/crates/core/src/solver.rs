//! External MIP solver bridge: adapter profiles, subprocess runs, log
//! parsing and solution files.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use regex::Regex;
use serde::Deserialize;
use wait_timeout::ChildExt;

use crate::error::{Error, Result};
use crate::model::MipModel;
use crate::mps;

/// Profile shipped with the workspace.
pub const DEFAULT_PROFILE_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../profiles/highs.toml");

/// Environment variable overriding [`DEFAULT_PROFILE_PATH`].
pub const PROFILE_ENV: &str = "OMHL_SOLVER_PROFILE";

#[derive(Clone, Debug, Deserialize)]
pub struct Patterns {
    pub status: String,
    pub objective: String,
    pub best_bound: String,
    pub root_bound: String,
    pub nodes: String,
}

#[derive(Clone, Debug, Deserialize)]
struct ProfileFile {
    name: String,
    command: Vec<String>,
    #[serde(default)]
    time_limit_args: Vec<String>,
    #[serde(default)]
    cuts_off_args: Vec<String>,
    #[serde(default)]
    relax_args: Vec<String>,
    #[serde(default = "default_solution_format")]
    solution_format: String,
    patterns: Patterns,
    #[serde(default)]
    status_map: HashMap<String, String>,
}

fn default_solution_format() -> String {
    "name_value".into()
}

/// Per-solver adapter: command template, option arguments and log regexes.
#[derive(Clone, Debug)]
pub struct SolverProfile {
    pub name: String,
    pub command: Vec<String>,
    pub time_limit_args: Vec<String>,
    pub cuts_off_args: Vec<String>,
    pub relax_args: Vec<String>,
    pub status_map: HashMap<String, SolveStatus>,
    pub profile_dir: PathBuf,
    status_re: Regex,
    objective_re: Regex,
    best_bound_re: Regex,
    root_bound_re: Regex,
    nodes_re: Regex,
}

fn compile(name: &str, pattern: &str) -> Result<Regex> {
    Regex::new(pattern).map_err(|e| Error::Config(format!("pattern `{name}`: {e}")))
}

impl SolverProfile {
    pub fn from_toml(text: &str, profile_dir: impl Into<PathBuf>) -> Result<Self> {
        let f: ProfileFile = toml::from_str(text).map_err(|e| Error::Config(format!("solver profile: {e}")))?;
        if f.command.is_empty() {
            return Err(Error::Config("solver profile: empty command".into()));
        }
        if f.solution_format != "name_value" {
            return Err(Error::Config(format!(
                "solver profile: unsupported solution format `{}`",
                f.solution_format
            )));
        }
        let mut status_map = HashMap::new();
        for (token, status) in &f.status_map {
            status_map.insert(token.clone(), status.parse()?);
        }
        Ok(SolverProfile {
            name: f.name,
            command: f.command,
            time_limit_args: f.time_limit_args,
            cuts_off_args: f.cuts_off_args,
            relax_args: f.relax_args,
            status_map,
            profile_dir: profile_dir.into(),
            status_re: compile("status", &f.patterns.status)?,
            objective_re: compile("objective", &f.patterns.objective)?,
            best_bound_re: compile("best_bound", &f.patterns.best_bound)?,
            root_bound_re: compile("root_bound", &f.patterns.root_bound)?,
            nodes_re: compile("nodes", &f.patterns.nodes)?,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Self::from_toml(&text, dir)
    }

    /// Profile named by `OMHL_SOLVER_PROFILE`, else the bundled HiGHS one.
    pub fn default_profile() -> Result<Self> {
        match std::env::var_os(PROFILE_ENV) {
            Some(p) => Self::load(p),
            None => Self::load(DEFAULT_PROFILE_PATH),
        }
    }

    fn expand(&self, arg: &str, vars: &[(&str, String)]) -> String {
        let mut s = arg.replace("{profile_dir}", &self.profile_dir.to_string_lossy());
        for (k, v) in vars {
            s = s.replace(&format!("{{{k}}}"), v);
        }
        s
    }

    /// Parses a solver log into the outcome fields.
    pub fn parse_log(&self, log: &str) -> ParsedLog {
        let capture = |re: &Regex| re.captures(log).and_then(|c| c.get(1)).map(|m| m.as_str().to_string());
        let float = |re: &Regex| capture(re).and_then(|s| s.parse::<f64>().ok());
        ParsedLog {
            status: capture(&self.status_re).and_then(|t| self.status_map.get(&t).copied().or_else(|| t.parse().ok())),
            objective: float(&self.objective_re),
            best_bound: float(&self.best_bound_re),
            root_bound: float(&self.root_bound_re),
            nodes: capture(&self.nodes_re).and_then(|s| s.parse().ok()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedLog {
    pub status: Option<SolveStatus>,
    pub objective: Option<f64>,
    pub best_bound: Option<f64>,
    pub root_bound: Option<f64>,
    pub nodes: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
    Error,
}

impl std::str::FromStr for SolveStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(SolveStatus::Optimal),
            "feasible" => Ok(SolveStatus::Feasible),
            "infeasible" => Ok(SolveStatus::Infeasible),
            "time_limit" => Ok(SolveStatus::TimeLimit),
            "error" => Ok(SolveStatus::Error),
            _ => Err(Error::Config(format!("unknown solve status `{s}`"))),
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Error => "error",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub profile: SolverProfile,
    pub time_limit_s: f64,
    pub disable_solver_cuts: bool,
    pub seed: u64,
    /// Keep model, log and solution files here instead of a temp dir.
    pub work_dir: Option<PathBuf>,
}

impl SolverConfig {
    pub fn new(profile: SolverProfile) -> Self {
        SolverConfig {
            profile,
            time_limit_s: 7200.0,
            disable_solver_cuts: false,
            seed: 0,
            work_dir: None,
        }
    }

    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit_s = seconds;
        self
    }

    pub fn default_highs() -> Result<Self> {
        Ok(Self::new(SolverProfile::default_profile()?))
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub best_objective: Option<f64>,
    pub best_bound: Option<f64>,
    pub root_lp_bound: Option<f64>,
    pub node_count: Option<u64>,
    pub wall_time_seconds: f64,
    pub solver_log_path: Option<PathBuf>,
    pub solution_path: Option<PathBuf>,
    pub log: String,
}

/// Runs the configured solver on an MPS file.
///
/// Spawn failures are errors; a nonzero exit or an unreadable log yields a
/// `SolveStatus::Error` outcome carrying the captured log.
pub fn run_solver(model_file: &Path, solution_file: &Path, config: &SolverConfig) -> Result<SolveOutcome> {
    run_solver_mode(model_file, solution_file, config, false)
}

fn run_solver_mode(model_file: &Path, solution_file: &Path, config: &SolverConfig, relax: bool) -> Result<SolveOutcome> {
    let profile = &config.profile;
    let vars = [
        ("model", model_file.to_string_lossy().into_owned()),
        ("solution", solution_file.to_string_lossy().into_owned()),
        ("seed", config.seed.to_string()),
        ("time_limit", format!("{}", config.time_limit_s)),
    ];
    let mut args: Vec<String> = profile.command.iter().map(|a| profile.expand(a, &vars)).collect();
    args.extend(profile.time_limit_args.iter().map(|a| profile.expand(a, &vars)));
    if config.disable_solver_cuts {
        args.extend(profile.cuts_off_args.iter().map(|a| profile.expand(a, &vars)));
    }
    if relax {
        args.extend(profile.relax_args.iter().map(|a| profile.expand(a, &vars)));
    }

    let log_path = solution_file.with_extension("log");
    let log_file = File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
    let err_file = log_file.try_clone().map_err(|e| Error::io(&log_path, e))?;
    let _ = std::fs::remove_file(solution_file);

    let started = Instant::now();
    let mut child = Command::new(&args[0])
        .args(&args[1..])
        .stdin(Stdio::null())
        .stdout(log_file)
        .stderr(err_file)
        .spawn()
        .map_err(|e| Error::Solver {
            msg: format!("cannot launch `{}`: {e}", args[0]),
            log: None,
        })?;
    // The solver enforces the limit itself; this only guards against hangs.
    let grace = Duration::from_secs_f64(config.time_limit_s.max(0.0) * 1.5 + 30.0);
    let exit = match child.wait_timeout(grace).map_err(|e| Error::io(&log_path, e))? {
        Some(status) => Some(status),
        None => {
            let _ = child.kill();
            let _ = child.wait();
            None
        }
    };
    let wall = started.elapsed().as_secs_f64();
    let log = std::fs::read_to_string(&log_path).unwrap_or_default();
    let parsed = profile.parse_log(&log);

    let mut outcome = SolveOutcome {
        status: SolveStatus::Error,
        best_objective: parsed.objective,
        best_bound: parsed.best_bound,
        root_lp_bound: parsed.root_bound,
        node_count: parsed.nodes,
        wall_time_seconds: wall,
        solver_log_path: Some(log_path),
        solution_path: solution_file.exists().then(|| solution_file.to_path_buf()),
        log,
    };
    outcome.status = match exit {
        None => SolveStatus::TimeLimit,
        Some(s) if !s.success() => SolveStatus::Error,
        Some(_) => parsed.status.unwrap_or(SolveStatus::Error),
    };
    if outcome.status == SolveStatus::Optimal && outcome.best_objective.is_none() {
        outcome.status = SolveStatus::Error;
    }
    Ok(outcome)
}

/// Reads `name value` lines.
pub fn read_solution(path: &Path) -> Result<BTreeMap<String, f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        match f.as_slice() {
            [] => {}
            [name, value] => {
                let v = value
                    .parse::<f64>()
                    .map_err(|_| Error::parse(i + 1, format!("bad value `{value}`")))?;
                out.insert(name.to_string(), v);
            }
            _ => return Err(Error::parse(i + 1, format!("expected `name value`, got `{line}`"))),
        }
    }
    Ok(out)
}

/// Outcome plus primal values indexed like `model.vars()`.
#[derive(Clone, Debug)]
pub struct ModelSolve {
    pub outcome: SolveOutcome,
    pub values: Option<Vec<f64>>,
}

impl ModelSolve {
    /// Values keyed by full variable name.
    pub fn named_values(&self, model: &MipModel) -> Option<BTreeMap<String, f64>> {
        let values = self.values.as_ref()?;
        Some(model.vars().iter().zip(values).map(|(v, &x)| (v.name.clone(), x)).collect())
    }
}

fn solve_with(model: &MipModel, config: &SolverConfig, relax: bool) -> Result<ModelSolve> {
    let tmp;
    let dir = match &config.work_dir {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
            d.clone()
        }
        None => {
            tmp = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
            tmp.path().to_path_buf()
        }
    };
    let stem = if model.name.is_empty() { "model" } else { model.name.as_str() };
    let mps_path = dir.join(format!("{stem}.mps"));
    let sol_path = dir.join(format!("{stem}.sol"));
    let names = mps::emit_model(model, &mps_path)?;
    let mut outcome = run_solver_mode(&mps_path, &sol_path, config, relax)?;

    let values = match &outcome.solution_path {
        Some(p) if outcome.status != SolveStatus::Error => {
            let raw = read_solution(p)?;
            if raw.is_empty() {
                None
            } else {
                let mut dense = Vec::with_capacity(model.num_vars());
                for short in &names.cols {
                    dense.push(*raw.get(short).ok_or_else(|| Error::Solver {
                        msg: format!("solution lacks column `{short}`"),
                        log: outcome.solver_log_path.clone(),
                    })?);
                }
                Some(dense)
            }
        }
        _ => None,
    };
    if config.work_dir.is_none() {
        outcome.solver_log_path = None;
        outcome.solution_path = None;
    }
    Ok(ModelSolve { outcome, values })
}

/// Emits `model`, solves it as a MIP and maps the solution back by name.
pub fn solve_model(model: &MipModel, config: &SolverConfig) -> Result<ModelSolve> {
    solve_with(model, config, false)
}

/// Solves only the LP relaxation.
pub fn solve_relaxation(model: &MipModel, config: &SolverConfig) -> Result<ModelSolve> {
    solve_with(model, config, true)
}

/// Root gap in percent, `100 (opt − root) / opt`; `None` if undefined.
pub fn compute_rgap(outcome: &SolveOutcome, optimum: f64) -> Option<f64> {
    let root = outcome.root_lp_bound?;
    if optimum == 0.0 {
        return None;
    }
    Some(100.0 * (optimum - root) / optimum)
}
