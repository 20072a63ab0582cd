//! One instance, one formulation, one strengthening configuration: build,
//! strengthen, solve, recover.

use std::time::Instant;

use crate::error::Result;
use crate::formulation::{build_f_ubar, build_f_uv, Formulation};
use crate::instance::{compute_order_scale, Instance, OrderedCostScale};
use crate::lambda::{block_decompose, LambdaVector};
use crate::model::MipModel;
use crate::solution::{recover_solution, HubSolution};
use crate::solver::{compute_rgap, solve_model, SolveOutcome, SolveStatus, SolverConfig};
use crate::strengthen::{strengthen, StrengthenConfig, StrengthenReport};

/// Number of covering variables (`ubar_*`, `u_*`, `v_*`) in a model.
pub fn covering_var_count(model: &MipModel) -> usize {
    ["ubar_", "u_", "v_"].iter().map(|p| model.count_vars_with_prefix(p)).sum()
}

/// Builds the formulation and applies the strengthening in place.
pub fn build_model(
    inst: &Instance,
    scale: &OrderedCostScale,
    lambda: &LambdaVector,
    formulation: Formulation,
    config: &StrengthenConfig,
    solver: Option<&SolverConfig>,
) -> Result<(MipModel, StrengthenReport)> {
    let decomp = block_decompose(lambda, inst.p())?;
    let mut model = match formulation {
        Formulation::Ubar => build_f_ubar(inst, scale, lambda)?,
        Formulation::Uv => build_f_uv(inst, scale, &decomp)?,
    };
    let report = if config.is_empty() {
        StrengthenReport::default()
    } else {
        strengthen(&mut model, inst, scale, &decomp, config, solver)?
    };
    Ok((model, report))
}

#[derive(Clone, Debug)]
pub struct PipelineResult {
    pub formulation: Formulation,
    pub config: StrengthenConfig,
    pub num_vars: usize,
    pub num_rows: usize,
    pub covering_vars: usize,
    pub outcome: SolveOutcome,
    /// Present whenever the solver returned a point; validated.
    pub solution: Option<HubSolution>,
    pub strengthen: StrengthenReport,
    pub rgap: Option<f64>,
    pub build_time_s: f64,
}

impl PipelineResult {
    pub fn objective(&self) -> Option<f64> {
        self.solution.as_ref().map(|s| s.objective.total)
    }
}

pub fn solve_instance(
    inst: &Instance,
    lambda: &LambdaVector,
    formulation: Formulation,
    config: &StrengthenConfig,
    solver: &SolverConfig,
) -> Result<PipelineResult> {
    let started = Instant::now();
    let scale = compute_order_scale(inst);
    let (model, report) = build_model(inst, &scale, lambda, formulation, config, Some(solver))?;
    let build_time_s = started.elapsed().as_secs_f64();
    log::debug!(
        "{} {}: {} vars, {} rows built in {build_time_s:.3}s",
        formulation,
        config.label(),
        model.num_vars(),
        model.num_rows()
    );
    let solved = solve_model(&model, solver)?;
    let solution = match solved.outcome.status {
        SolveStatus::Optimal | SolveStatus::Feasible if solved.values.is_some() => {
            let decomp = block_decompose(lambda, inst.p())?;
            Some(recover_solution(&solved, &model, inst, &scale, lambda)?.with_canonical(&scale, &decomp))
        }
        _ => None,
    };
    let rgap = match (solved.outcome.status, solved.outcome.best_objective) {
        (SolveStatus::Optimal, Some(opt)) => compute_rgap(&solved.outcome, opt),
        _ => None,
    };
    Ok(PipelineResult {
        formulation,
        config: config.clone(),
        num_vars: model.num_vars(),
        num_rows: model.num_rows(),
        covering_vars: covering_var_count(&model),
        outcome: solved.outcome,
        solution,
        strengthen: report,
        rgap,
        build_time_s,
    })
}
