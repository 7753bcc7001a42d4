//! Solver-agnostic linear model.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    /// `f64::INFINITY` when unbounded.
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: Sense,
    pub terms: Vec<(VarId, f64)>,
}

/// Linear model with named variables and constraints.
///
/// Variables are referenced by [`VarId`]; the builder methods keep names
/// unique and every term pointing at a declared variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelIR {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Objective,
    index: HashMap<String, VarId>,
    row_names: HashMap<String, usize>,
}

impl ModelIR {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        ModelIR {
            name: name.into(),
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Objective {
                sense,
                terms: Vec::new(),
            },
            index: HashMap::new(),
            row_names: HashMap::new(),
        }
    }

    /// Declares a variable. Panics on a duplicate name: builders generate
    /// names from unique index tuples, so a clash is a programming error.
    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let name = name.into();
        let id = VarId(self.variables.len());
        let prev = self.index.insert(name.clone(), id);
        assert!(prev.is_none(), "duplicate variable name {name}");
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        id
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        cmp: Cmp,
        rhs: f64,
    ) -> usize {
        let name = name.into();
        debug_assert!(terms.iter().all(|(v, _)| v.0 < self.variables.len()));
        let row = self.constraints.len();
        let prev = self.row_names.insert(name.clone(), row);
        assert!(prev.is_none(), "duplicate constraint name {name}");
        self.constraints.push(Constraint {
            name,
            terms: merge_terms(terms),
            cmp,
            rhs,
        });
        row
    }

    pub fn set_objective(&mut self, sense: Sense, terms: Vec<(VarId, f64)>) {
        self.objective = Objective {
            sense,
            terms: merge_terms(terms),
        };
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.row_names.get(name).map(|&i| &self.constraints[i])
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn try_var(&self, name: &str) -> Result<VarId, ModelError> {
        self.var_id(name)
            .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))
    }

    pub fn num_binaries(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count()
    }

    pub fn count_prefix(&self, prefix: &str) -> usize {
        self.variables
            .iter()
            .filter(|v| v.name.starts_with(prefix))
            .count()
    }

    /// Fixes a variable to `value` by collapsing its bounds.
    pub fn fix(&mut self, id: VarId, value: f64) {
        let v = &mut self.variables[id.0];
        v.lower = value;
        v.upper = value;
    }

    pub fn set_bounds(&mut self, id: VarId, lower: f64, upper: f64) {
        let v = &mut self.variables[id.0];
        v.lower = lower;
        v.upper = upper;
    }

    /// Mutable access to a constraint's right-hand side.
    pub fn rhs_mut(&mut self, name: &str) -> Option<&mut f64> {
        let row = *self.row_names.get(name)?;
        Some(&mut self.constraints[row].rhs)
    }

    /// Copy with every binary variable relaxed to a continuous one in `[0, 1]`.
    pub fn relaxed(&self) -> ModelIR {
        let mut out = self.clone();
        for v in &mut out.variables {
            v.kind = VarKind::Continuous;
        }
        out
    }

    /// Objective value of an assignment indexed by [`VarId`].
    pub fn evaluate_objective(&self, values: &[f64]) -> f64 {
        self.objective
            .terms
            .iter()
            .map(|(v, c)| c * values[v.0])
            .sum()
    }

    /// Left-hand side of a constraint for an assignment indexed by [`VarId`].
    pub fn row_activity(&self, row: &Constraint, values: &[f64]) -> f64 {
        row.terms.iter().map(|(v, c)| c * values[v.0]).sum()
    }
}

/// Merges duplicate variables and drops zero coefficients, keeping first-seen order.
fn merge_terms(terms: Vec<(VarId, f64)>) -> Vec<(VarId, f64)> {
    let mut pos: HashMap<VarId, usize> = HashMap::with_capacity(terms.len());
    let mut out: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
    for (v, c) in terms {
        match pos.get(&v) {
            Some(&i) => out[i].1 += c,
            None => {
                pos.insert(v, out.len());
                out.push((v, c));
            }
        }
    }
    out.retain(|(_, c)| *c != 0.0);
    out
}
