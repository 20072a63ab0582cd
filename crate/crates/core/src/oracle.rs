//! Exhaustive reference solver: every hub set, every capacity-feasible
//! allocation, optimal routing per (first hub, destination).

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::combinatorics::Combinations;
use crate::error::{Error, Result};
use crate::formulation::{evaluate_solution, ordered_cost, Allocation, Routing};
use crate::instance::{Instance, OrderedCostScale, CAPACITY_EPS};
use crate::lambda::LambdaVector;
use crate::solution::HubSolution;

pub const DEFAULT_ORACLE_CEILING: usize = 9;

/// Cheapest unit cost from first hub `k` to destination `m` given the open
/// hubs; the second hub must be `m` itself when `m` is open.
pub fn unit_route(inst: &Instance, hubs: &[usize], k: usize, m: usize) -> (usize, f64) {
    let (mu, delta) = (inst.mu(), inst.delta());
    if hubs.contains(&m) {
        return (m, mu * inst.cost(k, m) + delta * inst.cost(m, m));
    }
    let mut best = (usize::MAX, f64::INFINITY);
    for &l in hubs {
        let c = mu * inst.cost(k, l) + delta * inst.cost(l, m);
        if c < best.1 {
            best = (l, c);
        }
    }
    best
}

/// Routing of every commodity along its cheapest admissible path.
pub fn route_flows(inst: &Instance, alloc: &Allocation) -> Routing {
    let n = inst.n();
    let hubs = alloc.hubs();
    let mut routing = Routing::new();
    for k in hubs.iter().copied() {
        for m in 0..n {
            let f: f64 = (0..n).filter(|&j| alloc.hub_of[j] == k).map(|j| inst.flow(j, m)).sum();
            if f > 0.0 {
                let (l, _) = unit_route(inst, &hubs, k, m);
                *routing.entry((k, l, m)).or_insert(0.0) += f;
            }
        }
    }
    routing
}

/// Routing cost of origin `j` when allocated to hub `k`, for a fixed hub set.
fn origin_routing_costs(inst: &Instance, hubs: &[usize]) -> Vec<Vec<f64>> {
    let n = inst.n();
    let unit: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            if hubs.contains(&k) {
                (0..n).map(|m| unit_route(inst, hubs, k, m).1).collect()
            } else {
                vec![f64::INFINITY; n]
            }
        })
        .collect();
    (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    if !hubs.contains(&k) {
                        return f64::INFINITY;
                    }
                    (0..n).map(|m| inst.flow(j, m) * unit[k][m]).sum()
                })
                .collect()
        })
        .collect()
}

/// Calls `visit` on every capacity-feasible allocation with hub set `hubs`.
/// Origins are branched in decreasing outflow order.
pub fn for_each_allocation(inst: &Instance, hubs: &[usize], mut visit: impl FnMut(&Allocation)) {
    let n = inst.n();
    let w = inst.outflow_totals();
    let mut remaining: Vec<f64> = inst.capacities().to_vec();
    let mut hub_of = vec![usize::MAX; n];
    for &k in hubs {
        hub_of[k] = k;
        remaining[k] -= w[k];
        if remaining[k] < -CAPACITY_EPS {
            return;
        }
    }
    let mut order: Vec<usize> = (0..n).filter(|j| !hubs.contains(j)).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));

    fn rec(
        depth: usize,
        order: &[usize],
        hubs: &[usize],
        w: &[f64],
        remaining: &mut [f64],
        hub_of: &mut Vec<usize>,
        visit: &mut dyn FnMut(&Allocation),
    ) {
        if depth == order.len() {
            visit(&Allocation::new(hub_of.clone()));
            return;
        }
        let j = order[depth];
        for &k in hubs {
            if remaining[k] - w[j] >= -CAPACITY_EPS {
                remaining[k] -= w[j];
                hub_of[j] = k;
                rec(depth + 1, order, hubs, w, remaining, hub_of, visit);
                remaining[k] += w[j];
            }
        }
        hub_of[j] = usize::MAX;
    }
    rec(0, &order, hubs, &w, &mut remaining, &mut hub_of, &mut visit);
}

/// Every feasible allocation of the instance (all hub sets).
pub fn enumerate_feasible(inst: &Instance, ceiling: usize) -> Result<Vec<Allocation>> {
    if inst.n() > ceiling {
        return Err(Error::SizeLimit { size: inst.n(), ceiling });
    }
    let mut out = Vec::new();
    for hubs in Combinations::new(inst.n(), inst.p()) {
        for_each_allocation(inst, &hubs, |a| out.push(a.clone()));
    }
    Ok(out)
}

#[derive(Clone)]
struct Candidate {
    total: f64,
    alloc: Allocation,
}

fn better(a: &Candidate, b: &Candidate) -> Ordering {
    let tol = 1e-9 * a.total.abs().max(b.total.abs()).max(1.0);
    if (a.total - b.total).abs() > tol {
        return a.total.total_cmp(&b.total);
    }
    (a.alloc.hubs(), &a.alloc.hub_of).cmp(&(b.alloc.hubs(), &b.alloc.hub_of))
}

pub fn brute_force_solve(inst: &Instance, scale: &OrderedCostScale, lambda: &LambdaVector) -> Result<HubSolution> {
    brute_force_solve_with_ceiling(inst, scale, lambda, DEFAULT_ORACLE_CEILING)
}

/// Global minimizer; ties go to the lexicographically smallest hub set,
/// then allocation vector.
pub fn brute_force_solve_with_ceiling(
    inst: &Instance,
    scale: &OrderedCostScale,
    lambda: &LambdaVector,
    ceiling: usize,
) -> Result<HubSolution> {
    let n = inst.n();
    if n > ceiling {
        return Err(Error::SizeLimit { size: n, ceiling });
    }
    if lambda.len() != n {
        return Err(Error::Lambda(format!("lambda has {} entries, expected {n}", lambda.len())));
    }
    let hub_sets: Vec<Vec<usize>> = Combinations::new(n, inst.p()).collect();
    let best = hub_sets
        .par_iter()
        .filter_map(|hubs| {
            let route = origin_routing_costs(inst, hubs);
            let mut best: Option<Candidate> = None;
            for_each_allocation(inst, hubs, |alloc| {
                let routing: f64 = (0..n).map(|j| route[j][alloc.hub_of[j]]).sum();
                let cand = Candidate {
                    total: ordered_cost(scale, lambda, alloc) + routing,
                    alloc: alloc.clone(),
                };
                if best.as_ref().is_none_or(|b| better(&cand, b) == Ordering::Less) {
                    best = Some(cand);
                }
            });
            best
        })
        .min_by(better)
        .ok_or(Error::Infeasible)?;

    let routing = route_flows(inst, &best.alloc);
    let objective = evaluate_solution(inst, scale, lambda, &best.alloc, &routing)?;
    Ok(HubSolution::new(best.alloc, routing, objective))
}
