//! Acceptance criteria. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits nonzero if any fails.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;

use omhl_core::example::{example1, EXAMPLE1_LAMBDA};
use omhl_core::experiment::{aggregate, run_grid, ExperimentConfig, RunRecord, TIMEOUT_CHARGE_S};
use omhl_core::formulation::solution_point;
use omhl_core::oracle::{brute_force_solve, enumerate_feasible, route_flows};
use omhl_core::pipeline::{covering_var_count, PipelineResult};
use omhl_core::strengthen::{effective_capacities, generate_cuts, p1_values, CutFamily, PreprocessMode};
use omhl_core::{
    block_decompose, build_f_ubar, build_f_uv, canonical_covering, compute_order_scale, solve_instance, Allocation,
    Formulation, HubSolution, Instance, InstanceGenerator, LambdaSpec, LambdaVector, SolveStatus, SolverConfig,
    StrengthenConfig, VarKey,
};

const TOL: f64 = 1e-6;

struct Case {
    label: String,
    inst: Instance,
    lambda: LambdaVector,
    oracle: HubSolution,
}

struct Verdict {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn solver() -> SolverConfig {
    let mut cfg = SolverConfig::default_highs().expect("bundled solver profile").with_time_limit(600.0);
    cfg.disable_solver_cuts = true;
    cfg
}

fn families() -> Vec<LambdaSpec> {
    vec![
        LambdaSpec::Median,
        LambdaSpec::AntiTrimmed(None),
        LambdaSpec::Trimmed(None),
        LambdaSpec::Center,
        LambdaSpec::KCentrum(None),
        LambdaSpec::Blocks(None),
    ]
}

fn generate(n: usize, p: usize, seed: u64) -> Instance {
    let mut gen = InstanceGenerator::new(n, p);
    // two hubs need a larger capacity share to be feasible at all
    if p == 2 {
        gen.capacity_fraction = 0.8;
    }
    gen.generate(seed).expect("feasible instance").0
}

/// 54 instances: nine per λ family over n ∈ {6,7,8}, p ∈ {2,3}.
fn suite() -> Vec<Case> {
    let shapes = [(6, 2), (6, 3), (7, 2), (7, 3), (8, 2), (8, 3), (6, 3), (7, 3), (8, 3)];
    let mut jobs = Vec::new();
    for (f, spec) in families().into_iter().enumerate() {
        for (k, &(n, p)) in shapes.iter().enumerate() {
            jobs.push((spec.clone(), n, p, 1 + 100 * f as u64 + 7 * k as u64));
        }
    }
    jobs.into_par_iter()
        .map(|(spec, n, p, seed)| {
            let inst = generate(n, p, seed);
            let lambda = spec.instantiate(n).unwrap();
            let oracle = brute_force_solve(&inst, &compute_order_scale(&inst), &lambda).unwrap();
            Case {
                label: format!("{spec}/n{n}/p{p}/s{seed}"),
                inst,
                lambda,
                oracle,
            }
        })
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

fn run(case: &Case, form: Formulation, cfg: &StrengthenConfig) -> Result<PipelineResult, String> {
    solve_instance(&case.inst, &case.lambda, form, cfg, &solver()).map_err(|e| format!("{}: {e}", case.label))
}

fn example_case() -> Case {
    let inst = example1();
    let lambda = LambdaVector::custom(EXAMPLE1_LAMBDA.to_vec()).unwrap();
    let oracle = brute_force_solve(&inst, &compute_order_scale(&inst), &lambda).unwrap();
    Case {
        label: "example1".into(),
        inst,
        lambda,
        oracle,
    }
}

fn criterion1() -> Verdict {
    let case = example_case();
    let mut problems = Vec::new();
    let mut times = Vec::new();
    for form in [Formulation::Ubar, Formulation::Uv] {
        let started = Instant::now();
        let res = match run(&case, form, &StrengthenConfig::default()) {
            Ok(r) => r,
            Err(e) => {
                problems.push(e);
                continue;
            }
        };
        let wall = started.elapsed().as_secs_f64();
        times.push(format!("{form} {wall:.2}s"));
        let Some(sol) = res.solution else {
            problems.push(format!("{form}: no solution ({})", res.outcome.status));
            continue;
        };
        let o = &sol.objective;
        if !(close(o.total, 2136.8) && close(o.ordered, 636.0) && close(o.routing, 1500.8)) {
            problems.push(format!("{form}: breakdown {} + {} = {}", o.ordered, o.routing, o.total));
        }
        if sol.hubs != [3, 5] {
            problems.push(format!("{form}: hubs {:?}", sol.hubs));
        }
        if sol.assign.hub_of != [5, 3, 3, 3, 5, 5] {
            problems.push(format!("{form}: allocation {:?}", sol.assign.hub_of));
        }
        if wall >= 30.0 {
            problems.push(format!("{form}: {wall:.1}s"));
        }
    }
    Verdict {
        id: 1,
        title: "Example 1 golden solve, both formulations",
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("2136.8 = 636 + 1500.8, hubs 4 6; {}", times.join(", "))
        } else {
            problems.join("; ")
        },
    }
}

fn criterion2() -> Verdict {
    let case = example_case();
    let scale = compute_order_scale(&case.inst);
    let decomp = block_decompose(&case.lambda, 2).unwrap();
    let ubar = covering_var_count(&build_f_ubar(&case.inst, &scale, &case.lambda).unwrap());
    let uv = covering_var_count(&build_f_uv(&case.inst, &scale, &decomp).unwrap());
    let delta = ubar as i64 - uv as i64;
    Verdict {
        id: 2,
        title: "covering-variable reduction",
        pass: delta == 104 && ubar == 156 && uv == 52,
        detail: format!("F_ubar {ubar}, F_uv {uv}, difference {delta} (expected 104)"),
    }
}

struct SuiteRuns {
    baseline_uv: Vec<Option<f64>>,
    cuts_uv: Vec<Option<f64>>,
    rgap_uv: Vec<f64>,
    rgap_cuts: Vec<f64>,
}

fn criterion3(cases: &[Case]) -> (Verdict, SuiteRuns) {
    let started = Instant::now();
    let all_cuts = StrengthenConfig::new(PreprocessMode::None, CutFamily::ALL);
    let results: Vec<_> = cases
        .par_iter()
        .map(|case| {
            let ubar = run(case, Formulation::Ubar, &StrengthenConfig::default());
            let uv = run(case, Formulation::Uv, &StrengthenConfig::default());
            let cut = run(case, Formulation::Uv, &all_cuts);
            (case, ubar, uv, cut)
        })
        .collect();
    let mut problems = Vec::new();
    let mut worst: f64 = 0.0;
    let mut runs = SuiteRuns {
        baseline_uv: Vec::new(),
        cuts_uv: Vec::new(),
        rgap_uv: Vec::new(),
        rgap_cuts: Vec::new(),
    };
    for (case, ubar, uv, cut) in results {
        let want = case.oracle.objective.total;
        for (name, r) in [("ubar", &ubar), ("uv", &uv)] {
            match r.as_ref().map(|r| r.objective()) {
                Ok(Some(obj)) => {
                    worst = worst.max((obj - want).abs());
                    if !close(obj, want) {
                        problems.push(format!("{} {name}: {obj} vs oracle {want}", case.label));
                    }
                }
                Ok(None) => problems.push(format!("{} {name}: no solution", case.label)),
                Err(e) => problems.push(e.clone()),
            }
        }
        let root = |r: &Result<PipelineResult, String>| r.as_ref().ok().and_then(|r| r.outcome.root_lp_bound);
        runs.baseline_uv.push(root(&uv));
        runs.cuts_uv.push(root(&cut));
        if let (Ok(a), Ok(b)) = (&uv, &cut) {
            runs.rgap_uv.extend(a.rgap);
            runs.rgap_cuts.extend(b.rgap);
        }
    }
    let secs = started.elapsed().as_secs_f64();
    if secs >= 900.0 {
        problems.push(format!("suite took {secs:.0}s"));
    }
    let verdict = Verdict {
        id: 3,
        title: "oracle = F_ubar = F_uv on the generated suite",
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{} instances, max |diff| {worst:.2e}, {secs:.0}s", cases.len())
        } else {
            problems.join("; ")
        },
    };
    (verdict, runs)
}

/// Each fixing mode alone, each cut family on top of both fixings, and all
/// families with and without fixing. The full power set of cut families
/// under every fixing mode runs on Example 1.
fn strengthening_configs() -> Vec<StrengthenConfig> {
    let mut out = Vec::new();
    for mode in [PreprocessMode::P1, PreprocessMode::P2, PreprocessMode::P12] {
        out.push(StrengthenConfig::new(mode, []));
    }
    for fam in CutFamily::ALL {
        out.push(StrengthenConfig::new(PreprocessMode::P12, [fam]));
    }
    out.push(StrengthenConfig::new(PreprocessMode::P12, CutFamily::ALL));
    out
}

fn criterion4(cases: &[Case]) -> Verdict {
    let started = Instant::now();
    let configs = strengthening_configs();
    let mut jobs: Vec<(&Case, StrengthenConfig)> = Vec::new();
    for case in cases {
        for cfg in &configs {
            jobs.push((case, cfg.clone()));
        }
    }
    let example = example_case();
    for mode in [PreprocessMode::None, PreprocessMode::P1, PreprocessMode::P2, PreprocessMode::P12] {
        for mask in 0u32..(1 << CutFamily::ALL.len()) {
            let fams = CutFamily::ALL.into_iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, f)| f);
            let cfg = StrengthenConfig::new(mode, fams);
            if !cfg.is_empty() {
                jobs.push((&example, cfg));
            }
        }
    }
    let failures: Vec<String> = jobs
        .par_iter()
        .filter_map(|(case, cfg)| {
            let want = case.oracle.objective.total;
            match run(case, Formulation::Uv, cfg) {
                Ok(r) => match r.objective() {
                    Some(obj) if close(obj, want) => None,
                    Some(obj) => Some(format!("{} {}: {obj} vs {want}", case.label, cfg.label())),
                    None => Some(format!("{} {}: {}", case.label, cfg.label(), r.outcome.status)),
                },
                Err(e) => Some(format!("{e} [{}]", cfg.label())),
            }
        })
        .collect();
    Verdict {
        id: 4,
        title: "strengthening leaves the optimum unchanged",
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!(
                "{} solves ({} suite configs x {} instances, 511 on Example 1), {:.0}s",
                jobs.len(),
                configs.len(),
                cases.len(),
                started.elapsed().as_secs_f64()
            )
        } else {
            failures.join("; ")
        },
    }
}

fn criterion5() -> Verdict {
    let shapes = [(5, 2), (5, 3), (6, 2), (6, 3), (7, 2), (7, 3), (6, 2), (7, 3), (6, 3), (7, 2)];
    let specs = families();
    let families: BTreeSet<CutFamily> = CutFamily::ALL.into_iter().collect();
    let mut checks = 0usize;
    let mut violations = Vec::new();
    let mut points = 0usize;
    let mut cut_total = 0usize;
    for (k, &(n, p)) in shapes.iter().enumerate() {
        let inst = generate(n, p, 5000 + 13 * k as u64);
        let lambda = specs[k % specs.len()].instantiate(n).unwrap();
        let scale = compute_order_scale(&inst);
        let decomp = block_decompose(&lambda, p).unwrap();
        let p1 = p1_values(&inst, &scale, &effective_capacities(&inst, &scale), None).unwrap();
        let cuts = generate_cuts(&inst, &scale, &decomp, &families, Some(&p1)).unwrap();
        cut_total += cuts.len();
        for alloc in enumerate_feasible(&inst, 9).unwrap() {
            points += 1;
            let cover = canonical_covering(&alloc, &scale, &decomp);
            let value = |key: &VarKey| match *key {
                VarKey::X(j, h) => f64::from(u8::from(alloc.hub_of[j] == h)),
                ref other => cover.value(other).unwrap_or(0.0),
            };
            for c in &cuts {
                checks += 1;
                if !c.holds(value, TOL) {
                    violations.push(format!("n{n}p{p}: {} at {:?}", c.name, alloc.hub_of));
                }
            }
        }
    }
    Verdict {
        id: 5,
        title: "cut validity by exhaustive enumeration",
        pass: violations.is_empty() && checks > 0,
        detail: format!(
            "10 instances, {cut_total} cuts, {points} feasible allocations, {checks} checks, {} violations{}",
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    }
}

fn criterion6(runs: &SuiteRuns) -> Verdict {
    let pairs: Vec<(f64, f64)> = runs
        .baseline_uv
        .iter()
        .zip(&runs.cuts_uv)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .collect();
    let mean = |xs: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = xs.collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    };
    let base = mean(&mut pairs.iter().map(|p| p.0));
    let cut = mean(&mut pairs.iter().map(|p| p.1));
    let g0 = mean(&mut runs.rgap_uv.iter().copied());
    let g1 = mean(&mut runs.rgap_cuts.iter().copied());
    Verdict {
        id: 6,
        title: "root bound improves on average with cuts",
        pass: pairs.len() == runs.baseline_uv.len() && !pairs.is_empty() && cut >= base - TOL,
        detail: format!(
            "{} instances: mean root LP {base:.3} -> {cut:.3}; mean RGAP {g0:.2}% -> {g1:.2}%",
            pairs.len()
        ),
    }
}

/// Block ranges of `λ` beyond the first `p` positions, 1-based, from the
/// weight vector alone.
fn blocks_of(lambda: &[f64], p: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut pos = p;
    while pos < lambda.len() {
        if lambda[pos] == 0.0 {
            pos += 1;
            continue;
        }
        let start = pos;
        while pos < lambda.len() && lambda[pos] == lambda[start] {
            pos += 1;
        }
        out.push((start + 1, pos));
    }
    out
}

fn criterion7(cases: &[Case]) -> Verdict {
    let mut problems = Vec::new();
    let example = example_case();
    let all: Vec<&Case> = std::iter::once(&example).chain(cases).collect();
    for case in &all {
        let inst = &case.inst;
        let scale = compute_order_scale(inst);
        let decomp = block_decompose(&case.lambda, inst.p()).unwrap();
        let alloc = &case.oracle.assign;
        let cover = canonical_covering(alloc, &scale, &decomp);
        let mut costs: Vec<f64> = (0..inst.n()).map(|j| scale.c_hat(j, alloc.hub_of[j])).collect();
        costs.sort_by(f64::total_cmp);
        let blocks = blocks_of(&case.lambda.values, inst.p());
        if blocks.len() != decomp.blocks() {
            problems.push(format!("{}: {} blocks vs {}", case.label, blocks.len(), decomp.blocks()));
            continue;
        }
        for (i, &(first, last)) in blocks.iter().enumerate() {
            for h in 1..=scale.g() {
                let lvl = scale.level(h);
                let v = (first..=last).filter(|&q| costs[q - 1] >= lvl).count();
                let u = usize::from(costs[first - 1] >= lvl);
                if cover.v(i + 1, h) != v || usize::from(cover.u(i + 1, h)) != u {
                    problems.push(format!("{}: block {} level {h}", case.label, i + 1));
                }
            }
        }
        let mut model = build_f_uv(inst, &scale, &decomp).unwrap();
        let fams = [CutFamily::CountLb, CutFamily::CountUb].into_iter().collect();
        let cuts = generate_cuts(inst, &scale, &decomp, &fams, None).unwrap();
        omhl_core::strengthen::add_cuts(&mut model, &cuts).unwrap();
        let point = solution_point(&model, alloc, &route_flows(inst, alloc), &cover);
        let bad = model.violations(&point, TOL);
        if !bad.is_empty() {
            problems.push(format!("{}: violates {}", case.label, bad.join(",")));
        }
    }
    let ex = {
        let scale = compute_order_scale(&example.inst);
        let decomp = block_decompose(&example.lambda, 2).unwrap();
        let cover = canonical_covering(&Allocation::new(vec![5, 3, 3, 3, 5, 5]), &scale, &decomp);
        (1..=26).map(|h| cover.v(1, h)).collect::<Vec<_>>()
    };
    let want: Vec<usize> = (1..=26).map(|h| if h <= 9 { 2 } else if h <= 12 { 1 } else { 0 }).collect();
    if ex != want {
        problems.push(format!("example v_1h = {ex:?}"));
    }
    Verdict {
        id: 7,
        title: "canonical covering consistency",
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{} oracle optima; Example 1 v_1h = 2 (h<=9), 1 (10..12), 0 after", all.len())
        } else {
            problems.join("; ")
        },
    }
}

fn criterion8() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let grid = |body: &str| -> Result<Vec<RunRecord>, String> {
        let path = dir.path().join("grid.toml");
        std::fs::write(&path, body).map_err(|e| e.to_string())?;
        let cfg = ExperimentConfig::load(&path).map_err(|e| e.to_string())?;
        let report = run_grid(&cfg).map_err(|e| e.to_string())?;
        Ok(report.runs)
    };
    let mut problems = Vec::new();
    // 28 sites with a 10 ms budget cannot finish
    let slow = grid("lambdas = ['median']\nn = [28]\np = [4]\nreplications = 2\ntime_limit_s = 0.01\ncsv = 'slow.csv'\n");
    let fast = grid("lambdas = ['kcentrum']\nn = [6]\np = [3]\nreplications = 3\ntime_limit_s = 120\n");
    let (slow, fast) = match (slow, fast) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => {
            return Verdict {
                id: 8,
                title: "timeout bookkeeping",
                pass: false,
                detail: format!("grid failed: {:?} {:?}", a.err(), b.err()),
            }
        }
    };
    if !slow.iter().all(|r| r.status == SolveStatus::TimeLimit) {
        problems.push(format!("forced runs ended {:?}", slow.iter().map(|r| r.status).collect::<Vec<_>>()));
    }
    let csv = std::fs::read_to_string(dir.path().join("slow.csv")).unwrap_or_default();
    if !csv.contains(",7200.00(2),2,") {
        problems.push(format!("csv row: {}", csv.lines().nth(1).unwrap_or("")));
    }
    if !fast.iter().all(|r| r.status == SolveStatus::Optimal) {
        problems.push("reference runs not optimal".into());
    }
    // five-replication cell, two of them timed out
    let mut cell: Vec<RunRecord> = fast.clone();
    cell.extend(slow.iter().cloned().map(|mut r| {
        r.lambda = fast[0].lambda.clone();
        r
    }));
    let row = aggregate(&cell, TIMEOUT_CHARGE_S).unwrap();
    let expect = (fast.iter().map(|r| r.time_s).sum::<f64>() + 2.0 * 7200.0) / 5.0;
    if (row.time_s - expect).abs() > 1e-9 || row.timeouts != 2 || !row.time_display().ends_with("(2)") {
        problems.push(format!("mixed cell {} vs {expect}", row.time_display()));
    }
    Verdict {
        id: 8,
        title: "timeout bookkeeping",
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("all-timeout cell 7200.00(2); mixed 5-run cell {}", row.time_display())
        } else {
            problems.join("; ")
        },
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    if let Some(filter) = args.iter().find(|a| !a.starts_with('-')) {
        if !"acceptance".contains(filter.as_str()) && !filter.starts_with("criterion") {
            return;
        }
    }
    let report = |v: &Verdict| {
        println!(
            "criterion {} [{}]: {} - {}",
            v.id,
            v.title,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    };
    let mut verdicts = Vec::new();
    for f in [criterion1, criterion2] {
        verdicts.push(f());
        report(verdicts.last().unwrap());
    }
    let cases = suite();
    let (v3, runs) = criterion3(&cases);
    report(&v3);
    verdicts.push(v3);
    let v4 = criterion4(&cases);
    report(&v4);
    verdicts.push(v4);
    verdicts.push(criterion5());
    report(verdicts.last().unwrap());
    verdicts.push(criterion6(&runs));
    report(verdicts.last().unwrap());
    verdicts.push(criterion7(&cases));
    report(verdicts.last().unwrap());
    verdicts.push(criterion8());
    report(verdicts.last().unwrap());
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
