//! Shared fixtures for the criterion benches.

use omhl_core::{compute_order_scale, make_lambda, Instance, InstanceGenerator, LambdaSpec, LambdaVector, OrderedCostScale};

/// Deterministic generated instance with its cost scale and a λ vector.
pub fn fixture(n: usize, p: usize, lambda: &LambdaSpec, seed: u64) -> (Instance, OrderedCostScale, LambdaVector) {
    let (inst, _) = InstanceGenerator::new(n, p)
        .generate(seed)
        .expect("generator finds a feasible instance");
    let scale = compute_order_scale(&inst);
    let lambda = make_lambda(lambda, n).expect("valid lambda family");
    (inst, scale, lambda)
}
