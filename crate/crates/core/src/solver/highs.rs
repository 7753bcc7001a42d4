use std::collections::BTreeMap;
use std::time::Instant;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem};

use super::{relative_gap, Backend, Solution, SolveParams, Status};
use crate::error::SolverError;
use crate::models::{Cmp, ModelIR, Sense, VarKind};

/// HiGHS linked into the process.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsSolver;

impl Backend for HighsSolver {
    fn name(&self) -> String {
        "highs (in-process)".to_string()
    }

    fn run(&self, model: &ModelIR, params: &SolveParams) -> Result<Solution, SolverError> {
        let start = Instant::now();
        let mut pb = RowProblem::default();
        let mut cost = vec![0.0; model.variables().len()];
        for &(v, c) in &model.objective().terms {
            cost[v.0] += c;
        }
        let cols: Vec<_> = model
            .variables()
            .iter()
            .zip(&cost)
            .map(|(v, &c)| match v.kind {
                VarKind::Binary => pb.add_integer_column(c, v.lower..=v.upper),
                VarKind::Continuous => pb.add_column(c, v.lower..=v.upper),
            })
            .collect();
        for row in model.constraints() {
            let terms: Vec<_> = row.terms.iter().map(|&(v, c)| (cols[v.0], c)).collect();
            match row.cmp {
                Cmp::Le => pb.add_row(..=row.rhs, &terms),
                Cmp::Ge => pb.add_row(row.rhs.., &terms),
                Cmp::Eq => pb.add_row(row.rhs..=row.rhs, &terms),
            }
        }
        let sense = match model.objective().sense {
            Sense::Maximize => highs::Sense::Maximise,
            Sense::Minimize => highs::Sense::Minimise,
        };
        let mut m = pb.optimise(sense);
        m.make_quiet();
        m.set_option("time_limit", params.time_limit_s);
        m.set_option("mip_rel_gap", params.rel_gap);
        m.set_option("random_seed", (params.seed % i32::MAX as u64) as i32);
        m.set_option("threads", params.threads as i32);
        let solved = m
            .try_solve()
            .map_err(|s| SolverError::Output(format!("HiGHS returned {s:?}")))?;

        let elapsed = start.elapsed().as_secs_f64();
        let has_point = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let status = match solved.status() {
            HighsModelStatus::Optimal => Status::Optimal,
            HighsModelStatus::ModelEmpty => Status::Optimal,
            HighsModelStatus::Infeasible => Status::Infeasible,
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => Status::Unbounded,
            HighsModelStatus::ReachedTimeLimit
            | HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ReachedSolutionLimit
            | HighsModelStatus::ReachedInterrupt
            | HighsModelStatus::ReachedMemoryLimit
            | HighsModelStatus::ObjectiveBound
            | HighsModelStatus::ObjectiveTarget
                if has_point =>
            {
                Status::FeasibleLimit
            }
            other => {
                return Ok(Solution::failed(
                    Status::Error,
                    format!("HiGHS stopped with {other:?} and no feasible point"),
                    elapsed,
                ))
            }
        };
        if !status.has_solution() {
            return Ok(Solution::failed(status, format!("HiGHS: {:?}", solved.status()), elapsed));
        }

        let columns = solved.get_solution().columns().to_vec();
        let values: BTreeMap<String, f64> = model
            .variables()
            .iter()
            .zip(&columns)
            .map(|(v, &x)| (v.name.clone(), x))
            .collect();
        let objective = model.evaluate_objective(&columns);
        let is_mip = model.num_binaries() > 0;
        let best_bound = if is_mip {
            solved
                .double_info_value(c"mip_dual_bound")
                .ok()
                .filter(|b| b.is_finite())
                .unwrap_or(objective)
        } else {
            objective
        };
        let gap = if status == Status::Optimal && !is_mip {
            0.0
        } else {
            relative_gap(objective, best_bound)
        };
        Ok(Solution {
            status,
            values,
            objective: Some(objective),
            best_bound: Some(best_bound),
            gap: Some(gap),
            wall_time_s: elapsed,
            messages: Vec::new(),
        })
    }
}
