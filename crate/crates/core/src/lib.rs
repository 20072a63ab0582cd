//! Capacitated single-allocation ordered median hub location: instances,
//! covering formulations, strengthening, an exhaustive oracle and an
//! external-solver bridge.

pub mod combinatorics;
pub mod error;
pub mod example;
pub mod experiment;
pub mod formulation;
pub mod instance;
pub mod lambda;
pub mod model;
pub mod mps;
pub mod oracle;
pub mod pipeline;
pub mod solution;
pub mod solver;
pub mod strengthen;

pub use error::{Error, Result};
pub use formulation::{
    build_f_ubar, build_f_uv, canonical_covering, evaluate_solution, Allocation, CanonicalCovering, Formulation,
    ObjectiveBreakdown, Routing,
};
pub use instance::{compute_order_scale, load_instance, load_instance_file, Instance, InstanceGenerator, OrderedCostScale};
pub use lambda::{block_decompose, make_lambda, BlockDecomposition, LambdaSpec, LambdaVector};
pub use model::{MipModel, Sense, VarKey, VarKind};
pub use oracle::brute_force_solve;
pub use solution::{recover_solution, HubSolution};
pub use solver::{compute_rgap, run_solver, SolveOutcome, SolveStatus, SolverConfig, SolverProfile};
pub use strengthen::{generate_cuts, strengthen, CutFamily, PreprocessMode, StrengthenConfig, StrengthenReport};
pub use experiment::{compare_configs, run_grid, ExperimentConfig, ResultRow};
pub use pipeline::{solve_instance, PipelineResult};
