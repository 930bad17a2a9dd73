//! Exact-rational linear programming.
//!
//! All variables are implicitly non-negative. [`solve`] minimizes the
//! program's objective with a two-phase Bland-rule simplex; infeasible
//! programs come back with an irreducible conflicting subset of rows and
//! unbounded ones with a recession ray.

mod expr;
pub mod format;
mod simplex;

pub use expr::{Constraint, LinExpr, Rat, Relation, VarId};
pub use simplex::{is_feasible, solve, solve_stages, PIVOT_LIMIT};

use num::Zero;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LpError {
    #[error("pivot limit of {0} exceeded")]
    PivotLimit(usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearProgram {
    names: Vec<String>,
    constraints: Vec<Constraint>,
    objective: LinExpr,
}

impl LinearProgram {
    pub fn new() -> Self {
        LinearProgram::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> VarId {
        self.names.push(name.into());
        VarId(self.names.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// # Panics
    /// If the row mentions a variable that was never registered.
    pub fn add_constraint(&mut self, c: Constraint) -> usize {
        assert!(
            c.coeffs.vars().all(|v| v.0 < self.names.len()),
            "constraint references an unregistered variable"
        );
        self.constraints.push(c);
        self.constraints.len() - 1
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn set_objective(&mut self, objective: LinExpr) {
        assert!(objective.vars().all(|v| v.0 < self.names.len()));
        self.objective = objective;
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    /// Copy of the program keeping only the rows for which `keep` holds.
    pub fn filter_constraints(&self, mut keep: impl FnMut(&Constraint) -> bool) -> LinearProgram {
        LinearProgram {
            names: self.names.clone(),
            constraints: self.constraints.iter().filter(|c| keep(c)).cloned().collect(),
            objective: self.objective.clone(),
        }
    }

    /// Whether `values` satisfies every row and non-negativity exactly.
    pub fn is_satisfied_by(&self, values: &[Rat]) -> bool {
        values.len() == self.names.len()
            && values.iter().all(|v| *v >= Rat::zero())
            && self.constraints.iter().all(|c| c.is_satisfied(values))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub status: Status,
    /// One value per registered variable when optimal.
    pub values: Vec<Rat>,
    pub objective: Rat,
    /// Row indices of an irreducible infeasible subset when infeasible.
    pub conflict: Vec<usize>,
    /// Direction of unbounded descent when unbounded.
    pub ray: Vec<Rat>,
    pub pivots: usize,
}

impl Solution {
    pub fn value(&self, v: VarId) -> &Rat {
        &self.values[v.0]
    }

    pub fn conflict_tags<'a>(&self, lp: &'a LinearProgram) -> Vec<&'a str> {
        self.conflict
            .iter()
            .map(|&i| lp.constraints()[i].tag.as_str())
            .collect()
    }
}
