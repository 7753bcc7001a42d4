//! Solving a [`ModelIR`] with HiGHS, in-process or as an external
//! executable, and checking what comes back.

mod cache;
mod external;
mod highs;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use cache::SolutionCache;
pub use external::{parse_cbc_solution, parse_highs_solution, ExternalKind, ExternalSolver};
pub use highs::HighsSolver;

use crate::error::SolverError;
use crate::models::{Cmp, ModelIR, VarKind};

/// Absolute/relative slack accepted by [`verify_feasibility`].
pub const FEASIBILITY_TOLERANCE: f64 = 1e-6;
/// Denominator floor of the relative gap.
pub const GAP_EPSILON: f64 = 1e-10;
/// Environment variable naming an external solver executable.
pub const SOLVER_ENV: &str = "EQUILOX_SOLVER";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveParams {
    pub time_limit_s: f64,
    pub rel_gap: f64,
    pub threads: u32,
    pub seed: u64,
    /// Relax every binary to `[0, 1]`.
    pub lp_relaxation: bool,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            time_limit_s: 3600.0,
            rel_gap: 1e-5,
            threads: 1,
            seed: 0,
            lp_relaxation: false,
        }
    }
}

impl SolveParams {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.time_limit_s > 0.0) {
            return Err(SolverError::Params("time limit must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.rel_gap) {
            return Err(SolverError::Params("relative gap must lie in [0, 1)".into()));
        }
        if self.threads == 0 {
            return Err(SolverError::Params("thread count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    /// Stopped at a limit with an incumbent.
    FeasibleLimit,
    Infeasible,
    Unbounded,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::FeasibleLimit => "feasible_limit",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::Error => "error",
        }
    }

    pub fn has_solution(self) -> bool {
        matches!(self, Status::Optimal | Status::FeasibleLimit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    pub values: BTreeMap<String, f64>,
    pub objective: Option<f64>,
    pub best_bound: Option<f64>,
    pub gap: Option<f64>,
    pub wall_time_s: f64,
    /// Solver diagnostics or feasibility violations.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
}

impl Solution {
    pub fn failed(status: Status, message: impl Into<String>, wall_time_s: f64) -> Self {
        Solution {
            status,
            values: BTreeMap::new(),
            objective: None,
            best_bound: None,
            gap: None,
            wall_time_s,
            messages: vec![message.into()],
        }
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

/// `|objective - bound| / max(|objective|, eps)`.
pub fn relative_gap(objective: f64, bound: f64) -> f64 {
    (objective - bound).abs() / objective.abs().max(GAP_EPSILON)
}

pub trait Backend: Send + Sync {
    /// Runs the solver. Feasibility checking is done by [`solve_with`].
    fn run(&self, model: &ModelIR, params: &SolveParams) -> Result<Solution, SolverError>;

    fn name(&self) -> String;
}

/// Picks the backend: an external executable when `path` or
/// `EQUILOX_SOLVER` is set, in-process HiGHS otherwise.
pub fn default_backend(path: Option<PathBuf>) -> Box<dyn Backend> {
    let path = path.or_else(|| std::env::var_os(SOLVER_ENV).map(PathBuf::from));
    match path {
        Some(p) => Box::new(ExternalSolver::detect(p)),
        None => Box::new(HighsSolver),
    }
}

/// Solves with in-process HiGHS.
pub fn solve(model: &ModelIR, params: &SolveParams) -> Solution {
    solve_with(&HighsSolver, model, params)
}

/// Solves with `backend`, then re-checks every bound and constraint of the
/// returned point. A point that fails the check is reported as an error.
pub fn solve_with(backend: &dyn Backend, model: &ModelIR, params: &SolveParams) -> Solution {
    if let Err(e) = params.validate() {
        return Solution::failed(Status::Error, e.to_string(), 0.0);
    }
    let relaxed;
    let target = if params.lp_relaxation {
        relaxed = model.relaxed();
        &relaxed
    } else {
        model
    };
    let mut sol = match backend.run(target, params) {
        Ok(sol) => sol,
        Err(e) => return Solution::failed(Status::Error, e.to_string(), 0.0),
    };
    if sol.status.has_solution() {
        let violations = verify_feasibility(target, &sol.values);
        if !violations.is_empty() {
            log::warn!("{}: {} feasibility violations", model.name, violations.len());
            sol.messages.extend(violations.iter().take(20).map(ToString::to_string));
            sol.status = Status::Error;
        }
    }
    sol
}

/// [`solve_with`] behind an optional on-disk cache. Only solutions with a
/// verified point are stored.
pub fn solve_cached(
    backend: &dyn Backend,
    cache: Option<&SolutionCache>,
    model: &ModelIR,
    params: &SolveParams,
) -> Solution {
    let Some(cache) = cache else {
        return solve_with(backend, model, params);
    };
    let key = SolutionCache::key(model, params);
    if let Some(sol) = cache.get(&key) {
        log::debug!("{}: cache hit {key}", model.name);
        return sol;
    }
    let sol = solve_with(backend, model, params);
    if sol.status.has_solution() {
        if let Err(e) = cache.put(&key, &sol) {
            log::warn!("could not cache {}: {e}", model.name);
        }
    }
    sol
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Missing(String),
    Bound { var: String, value: f64, lower: f64, upper: f64 },
    Integrality { var: String, value: f64 },
    Row { row: String, activity: f64, rhs: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Missing(v) => write!(f, "no value for {v}"),
            Violation::Bound { var, value, lower, upper } => {
                write!(f, "{var} = {value} outside [{lower}, {upper}]")
            }
            Violation::Integrality { var, value } => write!(f, "{var} = {value} is not integral"),
            Violation::Row { row, activity, rhs } => {
                write!(f, "{row}: activity {activity} violates rhs {rhs}")
            }
        }
    }
}

fn slack(scale: f64) -> f64 {
    FEASIBILITY_TOLERANCE * scale.abs().max(1.0)
}

/// Lists every bound, integrality and row violated by `values` beyond
/// [`FEASIBILITY_TOLERANCE`] (relative to the row scale when it exceeds 1).
pub fn verify_feasibility(model: &ModelIR, values: &BTreeMap<String, f64>) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut x = Vec::with_capacity(model.variables().len());
    for v in model.variables() {
        let Some(&value) = values.get(&v.name) else {
            out.push(Violation::Missing(v.name.clone()));
            x.push(0.0);
            continue;
        };
        x.push(value);
        if value < v.lower - slack(v.lower) || value > v.upper + slack(v.upper) {
            out.push(Violation::Bound {
                var: v.name.clone(),
                value,
                lower: v.lower,
                upper: v.upper,
            });
        }
        if v.kind == VarKind::Binary && (value - value.round()).abs() > FEASIBILITY_TOLERANCE {
            out.push(Violation::Integrality {
                var: v.name.clone(),
                value,
            });
        }
    }
    for row in model.constraints() {
        let activity = model.row_activity(row, &x);
        let scale = row
            .terms
            .iter()
            .map(|(v, c)| (c * x[v.0]).abs())
            .fold(row.rhs.abs(), f64::max);
        let tol = slack(scale);
        let bad = match row.cmp {
            Cmp::Le => activity > row.rhs + tol,
            Cmp::Ge => activity < row.rhs - tol,
            Cmp::Eq => (activity - row.rhs).abs() > tol,
        };
        if bad {
            out.push(Violation::Row {
                row: row.name.clone(),
                activity,
                rhs: row.rhs,
            });
        }
    }
    out
}
