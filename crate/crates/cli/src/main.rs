use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use omhl_core::example::example1;
use omhl_core::experiment::{compare_configs, write_csv_to};
use omhl_core::oracle::{brute_force_solve_with_ceiling, enumerate_feasible, DEFAULT_ORACLE_CEILING};
use omhl_core::strengthen::{effective_capacities, generate_cuts, p1_values, CutFamily};
use omhl_core::{
    block_decompose, canonical_covering, compute_order_scale, load_instance_file, run_grid, solve_instance, Error,
    ExperimentConfig, Formulation, Instance, InstanceGenerator, LambdaSpec, SolverConfig, SolverProfile,
    StrengthenConfig, VarKey,
};

#[derive(Parser)]
#[command(name = "omhl", version, about = "Capacitated ordered median hub location")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with the external MIP solver.
    Solve(SolveArgs),
    /// Solve by exhaustive enumeration.
    Oracle(OracleArgs),
    /// Run an experiment grid from a TOML file.
    Grid(GridArgs),
    /// Check generated cuts against every feasible allocation.
    CutsAudit(AuditArgs),
    /// Generate a random capacitated instance.
    Gen(GenArgs),
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long)]
    instance: PathBuf,
    /// median | center | kcentrum[:k] | trimmed[:k1,k2] | anti[:k1,k2] | blocks[:a,b,..] | custom:v1,..,vn
    #[arg(long)]
    lambda: String,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value = "uv")]
    form: String,
    /// Strengthening, e.g. `none`, `p12`, `p12+dv3_3+packing`.
    #[arg(long, default_value = "none")]
    config: String,
    /// Solver adapter profile (TOML).
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, default_value_t = 7200.0)]
    time_limit: f64,
    /// Keep the solver's own cutting planes enabled.
    #[arg(long)]
    solver_cuts: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = DEFAULT_ORACLE_CEILING)]
    ceiling: usize,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the CSV path of the config; `-` prints to stdout.
    #[arg(long)]
    csv: Option<String>,
    /// Print paired deltas `BASE` vs `OTHER`, each `formulation/config`.
    #[arg(long, num_args = 2, value_names = ["BASE", "OTHER"])]
    compare: Option<Vec<String>>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated cut families; default all.
    #[arg(long)]
    families: Option<String>,
    #[arg(long, default_value_t = DEFAULT_ORACLE_CEILING)]
    ceiling: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, required_unless_present = "example")]
    n: Option<usize>,
    #[arg(long, required_unless_present = "example")]
    p: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    capacity_fraction: f64,
    /// Emit the six-site worked example instead.
    #[arg(long)]
    example: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_problem(args: &ProblemArgs) -> anyhow::Result<(Instance, omhl_core::LambdaVector)> {
    let inst = load_instance_file(&args.instance)?;
    let spec: LambdaSpec = args.lambda.parse()?;
    let lambda = spec.instantiate(inst.n())?;
    Ok((inst, lambda))
}

fn solve(args: SolveArgs) -> anyhow::Result<()> {
    let (inst, lambda) = load_problem(&args.problem)?;
    let form: Formulation = args.form.parse()?;
    let strengthen: StrengthenConfig = args.config.parse()?;
    let profile = match &args.profile {
        Some(p) => SolverProfile::load(p)?,
        None => SolverProfile::default_profile()?,
    };
    let mut solver = SolverConfig::new(profile).with_time_limit(args.time_limit);
    solver.disable_solver_cuts = !args.solver_cuts;
    solver.seed = args.seed;
    let res = solve_instance(&inst, &lambda, form, &strengthen, &solver)?;
    let o = &res.outcome;
    eprintln!("status {}", o.status);
    eprintln!("model {} vars, {} rows, {} covering", res.num_vars, res.num_rows, res.covering_vars);
    if let Some(b) = o.best_bound {
        eprintln!("best_bound {b}");
    }
    if let Some(b) = o.root_lp_bound {
        eprintln!("root_lp_bound {b}");
    }
    if let Some(g) = res.rgap {
        eprintln!("rgap {g:.4}");
    }
    if let Some(nodes) = o.node_count {
        eprintln!("nodes {nodes}");
    }
    eprintln!("time {:.3}s, prep {:.3}s", o.wall_time_seconds, res.strengthen.prep_time_s);
    if !strengthen.is_empty() {
        eprintln!(
            "fixed {:.2}%, cuts {}",
            100.0 * res.strengthen.fixing.fixed_fraction,
            res.strengthen.cuts_added
        );
    }
    match res.solution {
        Some(sol) => {
            println!("{sol}");
            Ok(())
        }
        None => anyhow::bail!("no solution ({})", o.status),
    }
}

fn oracle(args: OracleArgs) -> anyhow::Result<()> {
    let (inst, lambda) = load_problem(&args.problem)?;
    let scale = compute_order_scale(&inst);
    let sol = brute_force_solve_with_ceiling(&inst, &scale, &lambda, args.ceiling)?;
    println!("{sol}");
    Ok(())
}

fn grid(args: GridArgs) -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    let to_stdout = match args.csv.as_deref() {
        Some("-") => {
            cfg.csv = None;
            true
        }
        Some(path) => {
            cfg.csv = Some(path.into());
            false
        }
        None => cfg.csv.is_none(),
    };
    let report = run_grid(&cfg)?;
    if to_stdout {
        write_csv_to(&report.rows, std::io::stdout().lock())?;
    } else if let Some(path) = &cfg.csv {
        eprintln!("wrote {} rows to {}", report.rows.len(), path.display());
    }
    if let Some(pair) = args.compare {
        let cmp = compare_configs(&report.rows, &pair[0], &pair[1])?;
        println!("lambda,n,p,time_delta,nodes_delta,rgap_delta");
        let show = |d: Option<&omhl_core::experiment::MetricDelta>| d.map_or(String::new(), |d| format!("{:.2}", d.symmetric));
        for c in &cmp.cells {
            println!("{},{},{},{},{},{}", c.lambda, c.n, c.p, show(Some(&c.time)), show(c.nodes.as_ref()), show(c.rgap.as_ref()));
        }
        println!(
            "Total Avg.,,,{},{},{}",
            show(cmp.total_time.as_ref()),
            show(cmp.total_nodes.as_ref()),
            show(cmp.total_rgap.as_ref())
        );
    }
    Ok(())
}

fn cuts_audit(args: AuditArgs) -> anyhow::Result<bool> {
    let (inst, lambda) = load_problem(&args.problem)?;
    let scale = compute_order_scale(&inst);
    let decomp = block_decompose(&lambda, inst.p())?;
    let families = match &args.families {
        Some(list) => list.split(',').map(|s| s.trim().parse()).collect::<Result<_, Error>>()?,
        None => CutFamily::ALL.into_iter().collect(),
    };
    let p1 = p1_values(&inst, &scale, &effective_capacities(&inst, &scale), None)?;
    let cuts = generate_cuts(&inst, &scale, &decomp, &families, Some(&p1))?;
    let allocs = enumerate_feasible(&inst, args.ceiling)?;
    let mut violated = std::collections::BTreeMap::<String, usize>::new();
    let mut per_family = std::collections::BTreeMap::<String, usize>::new();
    for c in &cuts {
        *per_family.entry(c.tag.clone()).or_default() += 1;
    }
    for alloc in &allocs {
        let cover = canonical_covering(alloc, &scale, &decomp);
        let value = |k: &VarKey| match *k {
            VarKey::X(j, h) => f64::from(u8::from(alloc.hub_of[j] == h)),
            ref other => cover.value(other).unwrap_or(0.0),
        };
        for c in &cuts {
            if !c.holds(value, 1e-6) {
                *violated.entry(c.name.clone()).or_default() += 1;
            }
        }
    }
    println!("allocations {}", allocs.len());
    for (tag, count) in &per_family {
        println!("{tag} {count}");
    }
    println!("violations {}", violated.values().sum::<usize>());
    for (name, count) in &violated {
        println!("  {name} {count}");
    }
    Ok(violated.is_empty())
}

fn gen(args: GenArgs) -> anyhow::Result<()> {
    let inst = if args.example {
        example1()
    } else {
        let (n, p) = (args.n.unwrap_or_default(), args.p.unwrap_or_default());
        let mut g = InstanceGenerator::new(n, p);
        g.capacity_fraction = args.capacity_fraction;
        let (inst, used) = g.generate(args.seed).context("no feasible instance within the retry budget")?;
        if used != args.seed {
            eprintln!("seed {} infeasible, used {used}", args.seed);
        }
        inst
    };
    match args.out {
        Some(path) => inst.save(&path)?,
        None => print!("{}", inst.to_text()),
    }
    Ok(())
}

/// Input problems exit with 2, everything else with 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Io { .. } | Error::Parse { .. } | Error::Config(_) | Error::Validation(_) | Error::Lambda(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Solve(a) => solve(a).map(|_| true),
        Command::Oracle(a) => oracle(a).map(|_| true),
        Command::Grid(a) => grid(a).map(|_| true),
        Command::CutsAudit(a) => cuts_audit(a),
        Command::Gen(a) => gen(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
