use proptest::prelude::*;

use omhl_core::experiment::{compare_configs, ResultRow};
use omhl_core::formulation::{canonical_covering, solution_point};
use omhl_core::lambda::covering_var_savings;
use omhl_core::oracle::{brute_force_solve, enumerate_feasible, route_flows};
use omhl_core::pipeline::covering_var_count;
use omhl_core::strengthen::{effective_capacities, fix_from_p1, fix_from_p2, p1_values, p2_values};
use omhl_core::{
    block_decompose, build_f_ubar, build_f_uv, compute_order_scale, evaluate_solution, Formulation, Instance,
    InstanceGenerator, LambdaSpec,
};

fn spec() -> impl Strategy<Value = LambdaSpec> {
    prop_oneof![
        Just(LambdaSpec::Median),
        Just(LambdaSpec::AntiTrimmed(None)),
        Just(LambdaSpec::Trimmed(None)),
        Just(LambdaSpec::Center),
        Just(LambdaSpec::KCentrum(None)),
        Just(LambdaSpec::Blocks(None)),
    ]
}

fn instance(n: usize, p: usize, seed: u64) -> Option<Instance> {
    let mut gen = InstanceGenerator::new(n, p);
    if p == 2 {
        gen.capacity_fraction = 0.8;
    }
    gen.generate(seed).ok().map(|(i, _)| i)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Both formulations price the canonical point of any feasible
    /// allocation at its true objective, and the point satisfies every row.
    #[test]
    fn formulations_price_feasible_points_exactly(
        n in 5usize..=7, p in 2usize..=3, seed in 0u64..5000, spec in spec(), pick in 0usize..1000,
    ) {
        let Some(inst) = instance(n, p, seed) else { return Ok(()) };
        let lambda = spec.instantiate(n).unwrap();
        let scale = compute_order_scale(&inst);
        let decomp = block_decompose(&lambda, p).unwrap();
        let all = enumerate_feasible(&inst, 9).unwrap();
        let alloc = &all[pick % all.len()];
        let routing = route_flows(&inst, alloc);
        let truth = evaluate_solution(&inst, &scale, &lambda, alloc, &routing).unwrap().total;
        let cover = canonical_covering(alloc, &scale, &decomp);
        for model in [build_f_ubar(&inst, &scale, &lambda).unwrap(), build_f_uv(&inst, &scale, &decomp).unwrap()] {
            let point = solution_point(&model, alloc, &routing, &cover);
            prop_assert!(model.violations(&point, 1e-9).is_empty(), "{}", model.name);
            prop_assert!((model.objective_value(&point) - truth).abs() < 1e-9 * truth.max(1.0));
        }
    }

    #[test]
    fn covering_savings_formula(n in 4usize..=9, p in 1usize..=3, seed in 0u64..5000, spec in spec()) {
        let Some(inst) = instance(n, p.min(n - 1), seed) else { return Ok(()) };
        let p = inst.p();
        let lambda = spec.instantiate(n).unwrap();
        let scale = compute_order_scale(&inst);
        let decomp = block_decompose(&lambda, p).unwrap();
        let ubar = covering_var_count(&build_f_ubar(&inst, &scale, &lambda).unwrap()) as i64;
        let uv = covering_var_count(&build_f_uv(&inst, &scale, &decomp).unwrap()) as i64;
        prop_assert_eq!(ubar, (n * scale.g()) as i64);
        prop_assert_eq!(uv, (2 * decomp.blocks() * scale.g()) as i64);
        prop_assert_eq!(ubar - uv, covering_var_savings(&decomp, n, scale.g()));
    }

    /// `P1` grows and `P2` shrinks with the level; fixes admit the oracle
    /// optimum.
    #[test]
    fn auxiliary_bounds_are_monotone_and_safe(n in 5usize..=7, p in 2usize..=3, seed in 0u64..5000, spec in spec()) {
        let Some(inst) = instance(n, p, seed) else { return Ok(()) };
        let lambda = spec.instantiate(n).unwrap();
        let scale = compute_order_scale(&inst);
        let decomp = block_decompose(&lambda, p).unwrap();
        let bt = effective_capacities(&inst, &scale);
        let p1 = p1_values(&inst, &scale, &bt, None).unwrap();
        let p2 = p2_values(&inst, &scale, None).unwrap();
        prop_assert_eq!(p1[1], p);
        prop_assert_eq!(p2[2], n);
        for h in 2..=scale.g() {
            prop_assert!(p1[h] >= p1[h - 1]);
            if h > 2 {
                prop_assert!(p2[h] <= p2[h - 1]);
            }
            for k in 0..n {
                prop_assert!(bt.get(k, h) >= bt.get(k, h - 1));
            }
        }
        let opt = brute_force_solve(&inst, &scale, &lambda).unwrap();
        let cover = canonical_covering(&opt.assign, &scale, &decomp);
        let fixing = fix_from_p1(&p1, &decomp).merge(fix_from_p2(&p2, n, &decomp), &decomp, scale.g()).unwrap();
        prop_assert!(fixing.admits(|i, h| cover.u(i, h), |i, h| cover.v(i, h), &decomp));
    }

    #[test]
    fn compare_configs_is_antisymmetric(times in proptest::collection::vec((0.1f64..100.0, 0.1f64..100.0, 0.0f64..50.0, 0.0f64..50.0), 1..6)) {
        let row = |i: usize, config: &str, t: f64, g: f64| ResultRow {
            lambda: "median".into(),
            n: 6 + i,
            p: 2,
            formulation: Formulation::Uv,
            config: config.into(),
            runs: 1,
            rgap: Some(g),
            nodes: Some(t.floor()),
            time_s: t,
            timeouts: 0,
            errors: 0,
            prep_time_s: 0.0,
            fixed_pct: 0.0,
            cuts: 0.0,
            status: "optimal".into(),
        };
        let mut rows = Vec::new();
        for (i, &(a, b, ga, gb)) in times.iter().enumerate() {
            rows.push(row(i, "none", a, ga));
            rows.push(row(i, "p12", b, gb));
        }
        let ab = compare_configs(&rows, "uv/none", "uv/p12").unwrap();
        let ba = compare_configs(&rows, "uv/p12", "uv/none").unwrap();
        for (x, y) in ab.cells.iter().zip(&ba.cells) {
            prop_assert!((x.time.symmetric + y.time.symmetric).abs() < 1e-9);
            let (gx, gy) = (x.rgap.as_ref().unwrap(), y.rgap.as_ref().unwrap());
            prop_assert!((gx.symmetric + gy.symmetric).abs() < 1e-9);
        }
        let same = compare_configs(&rows, "uv/none", "uv/none").unwrap();
        prop_assert!(same.cells.iter().all(|c| c.time.symmetric == 0.0 && c.time.reduction == Some(0.0)));
    }
}
