//! Equity-aware prepositioning of relief supplies: instance handling,
//! Lorenz-curve Gini, scenario clustering, the four stochastic MILP
//! formulations, a solver bridge and out-of-sample simulation.

pub mod cluster;
pub mod error;
pub mod fixtures;
pub mod instance;
pub mod lorenz;
pub mod models;
pub mod sim;
pub mod solver;

pub use error::{ClusterError, InstanceError, LorenzError, ModelError, SimError, SolverError};
pub use instance::{derive_demands, load_instance, validate_instance, DemandTable, Instance};
pub use lorenz::{compute_gini, rank_coverages, CoverageVector, GiniResult, LorenzCurve};
pub use models::{build, BuildOptions, FirstStage, Formulation, ModelIR};
pub use solver::{solve, Solution, SolveParams, Status};
