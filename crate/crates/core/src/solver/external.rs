//! External solver executables driven through MPS files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use super::{relative_gap, Backend, Solution, SolveParams, Status};
use crate::error::SolverError;
use crate::models::mps::{write_mps, MpsFormat};
use crate::models::{ModelIR, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExternalKind {
    /// `highs --model_file ... --solution_file ...`
    Highs,
    /// `cbc model.mps ... solve solu ...`
    Cbc,
}

#[derive(Debug, Clone)]
pub struct ExternalSolver {
    pub path: PathBuf,
    pub kind: ExternalKind,
}

impl ExternalSolver {
    /// Guesses the solver family from the executable name (CBC when it
    /// contains `cbc`, HiGHS otherwise).
    pub fn detect(path: PathBuf) -> Self {
        let stem = path
            .file_name()
            .map(|s| s.to_string_lossy().to_ascii_lowercase())
            .unwrap_or_default();
        let kind = if stem.contains("cbc") {
            ExternalKind::Cbc
        } else {
            ExternalKind::Highs
        };
        ExternalSolver { path, kind }
    }

    fn command(&self, dir: &Path, params: &SolveParams) -> Result<Command, SolverError> {
        let model = dir.join("model.mps");
        let sol = dir.join("solution.txt");
        let mut cmd = Command::new(&self.path);
        cmd.current_dir(dir);
        match self.kind {
            ExternalKind::Highs => {
                let opts = dir.join("options.txt");
                std::fs::write(
                    &opts,
                    format!(
                        "time_limit = {}\nmip_rel_gap = {}\nthreads = {}\nrandom_seed = {}\n",
                        params.time_limit_s,
                        params.rel_gap,
                        params.threads,
                        params.seed % i32::MAX as u64
                    ),
                )?;
                cmd.arg("--model_file")
                    .arg(&model)
                    .arg("--options_file")
                    .arg(&opts)
                    .arg("--solution_file")
                    .arg(&sol);
            }
            ExternalKind::Cbc => {
                cmd.arg(&model)
                    .args(["sec", &params.time_limit_s.to_string()])
                    .args(["ratio", &params.rel_gap.to_string()])
                    .args(["threads", &params.threads.to_string()])
                    .args(["randomC", &(params.seed % i32::MAX as u64).to_string()])
                    .arg("solve")
                    .arg("solu")
                    .arg(&sol);
            }
        }
        Ok(cmd)
    }
}

impl Backend for ExternalSolver {
    fn name(&self) -> String {
        format!("{:?} ({})", self.kind, self.path.display())
    }

    fn run(&self, model: &ModelIR, params: &SolveParams) -> Result<Solution, SolverError> {
        let start = Instant::now();
        let dir = tempfile::tempdir()?;
        // CBC is given a minimization so no OBJSENSE support is needed.
        let flip = self.kind == ExternalKind::Cbc && model.objective().sense == Sense::Maximize;
        let written = if flip {
            let mut m = model.clone();
            let terms = m.objective().terms.iter().map(|&(v, c)| (v, -c)).collect();
            m.set_objective(Sense::Minimize, terms);
            m
        } else {
            model.clone()
        };
        std::fs::write(dir.path().join("model.mps"), write_mps(&written, MpsFormat::Free))?;
        let output = self
            .command(dir.path(), params)?
            .output()
            .map_err(|source| SolverError::Spawn {
                path: self.path.display().to_string(),
                source,
            })?;
        let elapsed = start.elapsed().as_secs_f64();
        let stdout = String::from_utf8_lossy(&output.stdout).to_string();
        let sol_path = dir.path().join("solution.txt");
        let Ok(text) = std::fs::read_to_string(&sol_path) else {
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Ok(Solution::failed(
                Status::Error,
                format!(
                    "solver exited with {} and wrote no solution; stderr: {}",
                    output.status,
                    stderr.trim()
                ),
                elapsed,
            ));
        };
        let parsed = match self.kind {
            ExternalKind::Highs => parse_highs_solution(&text)?,
            ExternalKind::Cbc => parse_cbc_solution(&text)?,
        };
        if !parsed.status.has_solution() {
            return Ok(Solution::failed(parsed.status, "no feasible point reported", elapsed));
        }
        let mut values: BTreeMap<String, f64> = model
            .variables()
            .iter()
            .map(|v| (v.name.clone(), 0.0))
            .collect();
        for (k, v) in parsed.values {
            values.insert(k, v);
        }
        let x: Vec<f64> = model.variables().iter().map(|v| values[&v.name]).collect();
        let objective = model.evaluate_objective(&x);
        let best_bound = parse_dual_bound(&stdout)
            .map(|b| if flip { -b } else { b })
            .unwrap_or(objective);
        Ok(Solution {
            status: parsed.status,
            values,
            objective: Some(objective),
            best_bound: Some(best_bound),
            gap: Some(relative_gap(objective, best_bound)),
            wall_time_s: elapsed,
            messages: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSolution {
    pub status: Status,
    pub objective: Option<f64>,
    pub values: BTreeMap<String, f64>,
}

/// Reads a HiGHS `--solution_file` in its default (raw) style.
pub fn parse_highs_solution(text: &str) -> Result<ParsedSolution, SolverError> {
    let mut lines = text.lines().map(str::trim);
    let mut status = None;
    let mut objective = None;
    let mut values = BTreeMap::new();
    let mut primal_feasible = false;
    while let Some(line) = lines.next() {
        if line == "Model status" {
            let s = lines.next().unwrap_or("");
            status = Some(match s {
                "Optimal" => Status::Optimal,
                "Infeasible" => Status::Infeasible,
                "Unbounded" | "Primal infeasible or unbounded" => Status::Unbounded,
                s if s.contains("limit") || s.contains("Interrupt") => Status::FeasibleLimit,
                _ => Status::Error,
            });
        } else if line == "# Primal solution values" {
            primal_feasible = lines.next() == Some("Feasible");
        } else if let Some(rest) = line.strip_prefix("Objective ") {
            objective = rest.trim().parse().ok();
        } else if let Some(rest) = line.strip_prefix("# Columns ") {
            let n: usize = rest
                .trim()
                .parse()
                .map_err(|_| SolverError::Output(format!("bad column count {rest:?}")))?;
            for _ in 0..n {
                let entry = lines
                    .next()
                    .ok_or_else(|| SolverError::Output("truncated column list".into()))?;
                let mut it = entry.split_whitespace();
                let (Some(name), Some(v)) = (it.next(), it.next()) else {
                    return Err(SolverError::Output(format!("bad column line {entry:?}")));
                };
                let v: f64 = v
                    .parse()
                    .map_err(|_| SolverError::Output(format!("bad value in {entry:?}")))?;
                values.insert(name.to_string(), v);
            }
            // only the primal block matters
            break;
        }
    }
    let mut status = status.ok_or_else(|| SolverError::Output("missing model status".into()))?;
    if status == Status::FeasibleLimit && !primal_feasible {
        status = Status::Error;
    }
    Ok(ParsedSolution {
        status,
        objective,
        values,
    })
}

/// Reads a CBC `solu` file: a status line followed by
/// `index name value reduced_cost` rows.
pub fn parse_cbc_solution(text: &str) -> Result<ParsedSolution, SolverError> {
    let mut lines = text.lines();
    let head = lines
        .next()
        .ok_or_else(|| SolverError::Output("empty CBC solution".into()))?
        .trim();
    let lower = head.to_ascii_lowercase();
    let status = if lower.starts_with("optimal") {
        Status::Optimal
    } else if lower.contains("infeasible") {
        Status::Infeasible
    } else if lower.contains("unbounded") {
        Status::Unbounded
    } else if lower.starts_with("stopped") && lower.contains("objective value") {
        Status::FeasibleLimit
    } else {
        Status::Error
    };
    let objective = head
        .rsplit("objective value")
        .next()
        .filter(|_| head.contains("objective value"))
        .and_then(|s| s.trim().parse().ok());
    let mut values = BTreeMap::new();
    for line in lines {
        let line = line.trim().trim_start_matches("**").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(SolverError::Output(format!("bad CBC line {line:?}")));
        }
        let v: f64 = fields[2]
            .parse()
            .map_err(|_| SolverError::Output(format!("bad value in {line:?}")))?;
        values.insert(fields[1].to_string(), v);
    }
    Ok(ParsedSolution {
        status,
        objective,
        values,
    })
}

/// Dual bound from a HiGHS or CBC log, when present.
fn parse_dual_bound(stdout: &str) -> Option<f64> {
    stdout.lines().rev().find_map(|line| {
        let line = line.trim();
        let rest = line
            .strip_prefix("Dual bound")
            .or_else(|| line.strip_prefix("Best possible"))?;
        rest.trim_start_matches(':').split_whitespace().next()?.parse().ok()
    })
}
