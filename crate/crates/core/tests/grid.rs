use omhl_core::example::example1;
use omhl_core::experiment::{run_grid, ExperimentConfig, CSV_HEADER};
use omhl_core::{Error, Formulation, SolveStatus};

fn example_grid(dir: &std::path::Path, extra: &str) -> ExperimentConfig {
    example1().save(dir.join("ex1.txt")).unwrap();
    let text = format!(
        "instances = ['ex1.txt']\nlambdas = ['custom:0,1,0,0,1,1']\nformulations = ['ubar', 'uv']\ntime_limit_s = 120\ncsv = 'out/grid.csv'\n{extra}"
    );
    std::fs::write(dir.join("grid.toml"), text).unwrap();
    ExperimentConfig::load(dir.join("grid.toml")).unwrap()
}

#[test]
fn example_grid_has_equal_objectives() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example_grid(dir.path(), "");
    let report = run_grid(&cfg).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.rows[0].formulation, Formulation::Ubar);
    assert_eq!(report.rows[1].formulation, Formulation::Uv);
    let objs: Vec<f64> = report.runs.iter().map(|r| r.objective.unwrap()).collect();
    assert!(objs.iter().all(|o| (o - 2136.8).abs() < 1e-6), "{objs:?}");
    assert!(report.runs.iter().all(|r| r.status == SolveStatus::Optimal));
    let csv = std::fs::read_to_string(dir.path().join("out/grid.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn grid_is_deterministic_apart_from_times() {
    let dir = tempfile::tempdir().unwrap();
    let text = "lambdas = ['median', 'center']\nn = [6]\np = [3]\nreplications = 2\nconfigs = ['none', 'p12+dv3_3']\ntime_limit_s = 120\n";
    std::fs::write(dir.path().join("g.toml"), text).unwrap();
    let cfg = ExperimentConfig::load(dir.path().join("g.toml")).unwrap();
    let strip = |rows: &[omhl_core::ResultRow]| {
        rows.iter()
            .map(|r| (r.lambda.clone(), r.n, r.p, r.config.clone(), r.rgap.map(|g| (g * 1e6).round()), r.nodes, r.fixed_pct, r.cuts))
            .collect::<Vec<_>>()
    };
    let a = run_grid(&cfg).unwrap();
    let b = run_grid(&cfg).unwrap();
    assert_eq!(strip(&a.rows), strip(&b.rows));
    // λ-first grouping
    let order: Vec<&str> = a.rows.iter().map(|r| r.lambda.as_str()).collect();
    assert_eq!(order, ["median", "median", "center", "center"]);
    let objs = |r: &omhl_core::experiment::GridReport| r.runs.iter().map(|x| x.objective).collect::<Vec<_>>();
    assert_eq!(objs(&a), objs(&b));
}

#[test]
fn failures_become_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = example_grid(dir.path(), "");
    cfg.instances.push(dir.path().join("missing.txt"));
    let report = run_grid(&cfg).unwrap();
    assert_eq!(report.rows.len(), 4);
    let failed: Vec<_> = report.runs.iter().filter(|r| r.status == SolveStatus::Error).collect();
    assert_eq!(failed.len(), 2);
    assert!(failed.iter().all(|r| r.error.is_some()));
}

#[test]
fn empty_lambda_list_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = example_grid(dir.path(), "");
    cfg.lambdas.clear();
    assert!(matches!(run_grid(&cfg), Err(Error::Validation(_))));
}
