use omhl_core::example::{example1, EXAMPLE1_LAMBDA};
use omhl_core::formulation::{canonical_covering, solution_point};
use omhl_core::mps::{emit_model, parse, render};
use omhl_core::oracle::{brute_force_solve, route_flows};
use omhl_core::solver::{solve_model, solve_relaxation};
use omhl_core::{
    block_decompose, build_f_ubar, build_f_uv, compute_order_scale, compute_rgap, recover_solution, run_solver,
    Allocation, InstanceGenerator, LambdaVector, MipModel, Sense, SolveStatus, SolverConfig, VarKind,
};

fn solver() -> SolverConfig {
    SolverConfig::default_highs().unwrap().with_time_limit(120.0)
}

fn example_lambda() -> LambdaVector {
    LambdaVector::custom(EXAMPLE1_LAMBDA.to_vec()).unwrap()
}

#[test]
fn trivially_infeasible_model() {
    let mut m = MipModel::new("bad");
    let x = m.add_var("x", VarKind::Continuous, 0.0, f64::INFINITY, 1.0).unwrap();
    m.add_row("le", "t", [(x, 1.0)], Sense::Le, 0.0).unwrap();
    m.add_row("ge", "t", [(x, 1.0)], Sense::Ge, 1.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.mps");
    emit_model(&m, &file).unwrap();
    let out = run_solver(&file, &dir.path().join("bad.sol"), &solver()).unwrap();
    assert_eq!(out.status, SolveStatus::Infeasible);
}

#[test]
fn example_ubar_through_files() {
    let inst = example1();
    let scale = compute_order_scale(&inst);
    let lambda = example_lambda();
    let model = build_f_ubar(&inst, &scale, &lambda).unwrap();
    let solved = solve_model(&model, &solver()).unwrap();
    assert_eq!(solved.outcome.status, SolveStatus::Optimal);
    let obj = solved.outcome.best_objective.unwrap();
    assert!((obj - 2136.8).abs() < 1e-6, "{obj}");
    if let (Some(b), Some(o)) = (solved.outcome.best_bound, solved.outcome.best_objective) {
        assert!(b <= o + 1e-6);
    }
    let sol = recover_solution(&solved, &model, &inst, &scale, &lambda).unwrap();
    assert_eq!(sol.assign.hub_of, vec![5, 3, 3, 3, 5, 5]);
    // the solver may split ties differently; the oracle's routing costs the same
    let oracle = brute_force_solve(&inst, &scale, &lambda).unwrap();
    assert!((sol.objective.routing - oracle.objective.routing).abs() < 1e-6);
    assert_eq!(oracle.s_flow.get(&(3, 5, 4)), Some(&45.0));
}

#[test]
fn forced_timeout_keeps_a_bound() {
    let (inst, _) = InstanceGenerator::new(28, 4).generate(3).unwrap();
    let scale = compute_order_scale(&inst);
    let lambda = omhl_core::make_lambda(&omhl_core::LambdaSpec::Median, 28).unwrap();
    let decomp = block_decompose(&lambda, 4).unwrap();
    let model = build_f_uv(&inst, &scale, &decomp).unwrap();
    let solved = solve_model(&model, &SolverConfig::default_highs().unwrap().with_time_limit(0.01)).unwrap();
    assert_eq!(solved.outcome.status, SolveStatus::TimeLimit);
    assert!(solved.outcome.best_bound.is_some());
}

#[test]
fn rgap_from_lp_relaxation() {
    let inst = example1();
    let scale = compute_order_scale(&inst);
    let decomp = block_decompose(&example_lambda(), 2).unwrap();
    let model = build_f_uv(&inst, &scale, &decomp).unwrap();
    let lp = solve_relaxation(&model, &solver()).unwrap();
    assert_eq!(lp.outcome.status, SolveStatus::Optimal);
    let relaxed = lp.outcome.best_objective.unwrap();
    let mip = solve_model(&model, &solver()).unwrap();
    let root = mip.outcome.root_lp_bound.unwrap();
    assert!((root - relaxed).abs() < 1e-6);
    let gap = compute_rgap(&mip.outcome, 2136.8).unwrap();
    assert!((gap - 100.0 * (2136.8 - relaxed) / 2136.8).abs() < 1e-9);
    assert!(gap > 0.0 && gap < 100.0);
}

#[test]
fn emitted_example_round_trips_byte_identical() {
    let inst = example1();
    let scale = compute_order_scale(&inst);
    let decomp = block_decompose(&example_lambda(), 2).unwrap();
    let model = build_f_uv(&inst, &scale, &decomp).unwrap();
    let (first, map) = render(&model);
    let back = parse(&first, Some(&map)).unwrap();
    let (second, map2) = render(&back);
    assert_eq!(first, second);
    assert_eq!(map, map2);
    assert_eq!(render(&model).0, first);
}

/// With the allocation fixed and λ = 0 only the routing LP is left; its
/// optimum must equal the oracle's per-commodity shortest paths.
#[test]
fn oracle_routing_matches_lp() {
    for seed in [11, 12, 13] {
        let (inst, _) = InstanceGenerator::new(6, 3).generate(seed).unwrap();
        let scale = compute_order_scale(&inst);
        let zero = LambdaVector::custom(vec![0.0; 6]).unwrap();
        let decomp = block_decompose(&zero, 3).unwrap();
        let oracle = brute_force_solve(&inst, &scale, &zero).unwrap();
        let mut model = build_f_uv(&inst, &scale, &decomp).unwrap();
        for (j, &k) in oracle.assign.hub_of.iter().enumerate() {
            for h in 0..6 {
                let id = model.id(&format!("x_{}_{}", j + 1, h + 1)).unwrap();
                let v = if h == k { 1.0 } else { 0.0 };
                model.set_bounds(id, v, v);
            }
        }
        let lp = solve_relaxation(&model, &solver()).unwrap();
        let routing = lp.outcome.best_objective.unwrap();
        assert!((routing - oracle.objective.routing).abs() < 1e-6, "{routing} vs {}", oracle.objective.routing);
    }
}

#[test]
fn canonical_point_is_feasible_for_both_models() {
    let inst = example1();
    let scale = compute_order_scale(&inst);
    let lambda = example_lambda();
    let decomp = block_decompose(&lambda, 2).unwrap();
    let alloc = Allocation::new(vec![5, 3, 3, 3, 5, 5]);
    let cover = canonical_covering(&alloc, &scale, &decomp);
    let routing = route_flows(&inst, &alloc);
    for model in [build_f_ubar(&inst, &scale, &lambda).unwrap(), build_f_uv(&inst, &scale, &decomp).unwrap()] {
        let point = solution_point(&model, &alloc, &routing, &cover);
        assert!(model.violations(&point, 1e-9).is_empty());
        assert!((model.objective_value(&point) - 2136.8).abs() < 1e-9);
    }
}
