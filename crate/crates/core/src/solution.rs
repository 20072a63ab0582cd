//! Validated hub solutions and their recovery from solver output.

use std::fmt;

use crate::error::{Error, Result};
use crate::formulation::{canonical_covering, evaluate_solution, Allocation, CanonicalCovering, ObjectiveBreakdown, Routing};
use crate::instance::{Instance, OrderedCostScale, CAPACITY_EPS};
use crate::lambda::{BlockDecomposition, LambdaVector};
use crate::model::{MipModel, VarKey, VarKind};
use crate::solver::ModelSolve;

pub const INTEGRALITY_TOL: f64 = 1e-6;
pub const OBJECTIVE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct HubSolution {
    /// Open hubs, ascending, 0-based.
    pub hubs: Vec<usize>,
    pub assign: Allocation,
    pub s_flow: Routing,
    pub objective: ObjectiveBreakdown,
    pub canonical_uv: Option<CanonicalCovering>,
}

impl HubSolution {
    pub fn new(assign: Allocation, s_flow: Routing, objective: ObjectiveBreakdown) -> Self {
        HubSolution {
            hubs: assign.hubs(),
            assign,
            s_flow,
            objective,
            canonical_uv: None,
        }
    }

    pub fn with_canonical(mut self, scale: &OrderedCostScale, decomp: &BlockDecomposition) -> Self {
        self.canonical_uv = Some(canonical_covering(&self.assign, scale, decomp));
        self
    }

    /// Checks allocation feasibility and flow conservation of `s_flow`.
    pub fn check(&self, inst: &Instance) -> Result<()> {
        self.assign.validate(inst)?;
        let n = inst.n();
        let flow_err = |detail: String| Error::InfeasibleAllocation {
            constraint: "balance".into(),
            detail,
        };
        for (&(k, l, m), &s) in &self.s_flow {
            if s < -CAPACITY_EPS {
                return Err(flow_err(format!("negative flow on ({}, {}, {})", k + 1, l + 1, m + 1)));
            }
            if s > CAPACITY_EPS {
                if !self.assign.is_hub(k) || !self.assign.is_hub(l) {
                    return Err(flow_err(format!("flow through closed site on ({}, {}, {})", k + 1, l + 1, m + 1)));
                }
                if l != m && self.assign.is_hub(m) {
                    return Err(Error::InfeasibleAllocation {
                        constraint: "hubdest".into(),
                        detail: format!("destination hub {} reached via {}", m + 1, l + 1),
                    });
                }
            }
        }
        for k in 0..n {
            for m in 0..n {
                let sent: f64 = (0..n).map(|l| self.s_flow.get(&(k, l, m)).copied().unwrap_or(0.0)).sum();
                let need: f64 = (0..n).filter(|&j| self.assign.hub_of[j] == k).map(|j| inst.flow(j, m)).sum();
                if (sent - need).abs() > 1e-6 * need.max(1.0) {
                    return Err(flow_err(format!("first hub {} to {}: {sent} sent, {need} required", k + 1, m + 1)));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for HubSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hubs: Vec<String> = self.hubs.iter().map(|h| (h + 1).to_string()).collect();
        writeln!(f, "hubs {}", hubs.join(" "))?;
        let alloc: Vec<String> = self
            .assign
            .hub_of
            .iter()
            .enumerate()
            .map(|(j, k)| format!("{}->{}", j + 1, k + 1))
            .collect();
        writeln!(f, "allocation {}", alloc.join(" "))?;
        writeln!(f, "ordered {}", fmt_num(self.objective.ordered))?;
        writeln!(f, "routing {}", fmt_num(self.objective.routing))?;
        write!(f, "total {}", fmt_num(self.objective.total))
    }
}

/// Rounds away floating noise below 1e-9 for display.
pub fn fmt_num(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9;
    format!("{}", if r == 0.0 { 0.0 } else { r })
}

/// Maps solver values back to a [`HubSolution`] and cross-checks the
/// objective against [`evaluate_solution`].
pub fn recover_solution(
    solved: &ModelSolve,
    model: &MipModel,
    inst: &Instance,
    scale: &OrderedCostScale,
    lambda: &LambdaVector,
) -> Result<HubSolution> {
    let values = solved.values.as_ref().ok_or_else(|| Error::Solver {
        msg: format!("no solution available (status {})", solved.outcome.status),
        log: solved.outcome.solver_log_path.clone(),
    })?;
    let reported = solved.outcome.best_objective.ok_or_else(|| Error::Solver {
        msg: "solver reported no objective".into(),
        log: solved.outcome.solver_log_path.clone(),
    })?;
    recover_from_values(model, values, reported, inst, scale, lambda)
}

pub fn recover_from_values(
    model: &MipModel,
    values: &[f64],
    reported: f64,
    inst: &Instance,
    scale: &OrderedCostScale,
    lambda: &LambdaVector,
) -> Result<HubSolution> {
    let n = inst.n();
    let mut x = vec![vec![false; n]; n];
    let mut routing = Routing::new();
    for (var, &value) in model.vars().iter().zip(values) {
        if var.kind != VarKind::Continuous && (value - value.round()).abs() > INTEGRALITY_TOL {
            return Err(Error::Integrality {
                name: var.name.clone(),
                value,
            });
        }
        match VarKey::parse(&var.name) {
            Some(VarKey::X(j, k)) if j < n && k < n => x[j][k] = value > 0.5,
            Some(VarKey::S(k, l, m)) if value.abs() > 1e-9 => {
                routing.insert((k, l, m), value);
            }
            _ => {}
        }
    }
    let mut hub_of = Vec::with_capacity(n);
    for (j, row) in x.iter().enumerate() {
        let chosen: Vec<usize> = (0..n).filter(|&k| row[k]).collect();
        match chosen.as_slice() {
            [k] => hub_of.push(*k),
            _ => {
                return Err(Error::InfeasibleAllocation {
                    constraint: "assign".into(),
                    detail: format!("origin {} has {} first hubs", j + 1, chosen.len()),
                })
            }
        }
    }
    let alloc = Allocation::new(hub_of);
    let objective = evaluate_solution(inst, scale, lambda, &alloc, &routing)?;
    if (objective.total - reported).abs() > OBJECTIVE_TOL * reported.abs().max(1.0) {
        return Err(Error::ObjectiveMismatch {
            reported,
            recomputed: objective.total,
        });
    }
    let sol = HubSolution::new(alloc, routing, objective);
    sol.check(inst)?;
    Ok(sol)
}
