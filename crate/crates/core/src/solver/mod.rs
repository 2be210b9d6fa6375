//! Self-contained LP/MILP machinery: a bounded-variable primal simplex with
//! dual values, and a best-bound branch-and-bound wrapper for mixed-integer
//! programs. All clearing formulations in this crate reduce to these two
//! entry points.

mod basis;
mod branch_bound;
mod simplex;

pub use branch_bound::solve_milp;
pub use simplex::{solve_lp, solve_lp_with_bounds};

use thiserror::Error;

/// Infinity sentinel for unbounded variable sides.
pub const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Relation::Le => write!(f, "<="),
            Relation::Eq => write!(f, "="),
            Relation::Ge => write!(f, ">="),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    /// Sparse coefficients as (variable index, value) pairs.
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Minimization linear program over bounded variables.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Objective coefficient per variable (minimize).
    pub objective: Vec<f64>,
    /// Constant added to the objective value.
    pub objective_offset: f64,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64, obj: f64) -> usize {
        self.variables.push(Variable { name: name.into(), lower, upper });
        self.objective.push(obj);
        self.variables.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint { name: name.into(), terms, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.objective.len() != self.variables.len() {
            return Err(SolverError::InvalidProgram(format!(
                "objective has {} coefficients for {} variables",
                self.objective.len(),
                self.variables.len()
            )));
        }
        for (i, v) in self.variables.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(SolverError::InvalidProgram(format!(
                    "variable {} ({}) has invalid bounds [{}, {}]",
                    i, v.name, v.lower, v.upper
                )));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(SolverError::InvalidProgram(format!(
                    "constraint {} ({}) has non-finite rhs",
                    i, c.name
                )));
            }
            for &(j, v) in &c.terms {
                if j >= self.variables.len() {
                    return Err(SolverError::InvalidProgram(format!(
                        "constraint {} ({}) references undeclared variable {}",
                        i, c.name, j
                    )));
                }
                if !v.is_finite() {
                    return Err(SolverError::InvalidProgram(format!(
                        "constraint {} ({}) has non-finite coefficient on variable {}",
                        i, c.name, j
                    )));
                }
            }
        }
        Ok(())
    }

    /// Debug dump in LP text format for external cross-checking.
    pub fn to_lp_text(&self, integers: &[usize]) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "Minimize");
        let mut obj = String::from(" obj:");
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                let _ = write!(obj, " {} {}", sign_term(c), self.variables[j].name);
            }
        }
        if self.objective_offset != 0.0 {
            let _ = write!(obj, " {} __offset", sign_term(self.objective_offset));
        }
        let _ = writeln!(out, "{obj}");
        let _ = writeln!(out, "Subject To");
        for c in &self.constraints {
            let mut line = format!(" {}:", c.name);
            for &(j, v) in &c.terms {
                let _ = write!(line, " {} {}", sign_term(v), self.variables[j].name);
            }
            let _ = writeln!(out, "{} {} {}", line, c.relation, c.rhs);
        }
        let _ = writeln!(out, "Bounds");
        for v in &self.variables {
            let lo = if v.lower == f64::NEG_INFINITY { "-inf".to_string() } else { format!("{}", v.lower) };
            let hi = if v.upper == f64::INFINITY { "+inf".to_string() } else { format!("{}", v.upper) };
            let _ = writeln!(out, " {} <= {} <= {}", lo, v.name, hi);
        }
        if !integers.is_empty() {
            let _ = writeln!(out, "General");
            let names: Vec<&str> = integers.iter().map(|&j| self.variables[j].name.as_str()).collect();
            let _ = writeln!(out, " {}", names.join(" "));
        }
        let _ = writeln!(out, "End");
        out
    }
}

fn sign_term(v: f64) -> String {
    if v < 0.0 {
        format!("- {}", -v)
    } else {
        format!("+ {}", v)
    }
}

/// A linear program plus an integrality set (binaries via bounds [0, 1]).
#[derive(Debug, Clone)]
pub struct MixedIntegerProgram {
    pub lp: LinearProgram,
    /// Indices of variables restricted to integer values. Sorted, unique.
    pub integers: Vec<usize>,
}

impl MixedIntegerProgram {
    pub fn new(lp: LinearProgram, mut integers: Vec<usize>) -> Self {
        integers.sort_unstable();
        integers.dedup();
        MixedIntegerProgram { lp, integers }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        self.lp.validate()?;
        for &j in &self.integers {
            if j >= self.lp.variables.len() {
                return Err(SolverError::InvalidProgram(format!(
                    "integrality set references undeclared variable {j}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_lp_text(&self) -> String {
        self.lp.to_lp_text(&self.integers)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of an LP or MILP solve.
///
/// For non-optimal statuses `values` is empty and `objective` is `+inf`
/// (infeasible) or `-inf` (unbounded). Dual values and reduced costs are
/// populated for LP solves only.
#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    /// Shadow price per constraint: d(objective)/d(rhs).
    pub duals: Vec<f64>,
    /// Reduced cost per variable: d(objective)/d(active bound).
    pub reduced_costs: Vec<f64>,
    /// Certified lower bound on the optimum (equals `objective` for LPs).
    pub best_bound: f64,
}

impl Solution {
    pub fn infeasible(n_constraints: usize) -> Self {
        Solution {
            status: SolveStatus::Infeasible,
            values: Vec::new(),
            objective: f64::INFINITY,
            duals: vec![0.0; n_constraints],
            reduced_costs: Vec::new(),
            best_bound: f64::INFINITY,
        }
    }

    pub fn unbounded() -> Self {
        Solution {
            status: SolveStatus::Unbounded,
            values: Vec::new(),
            objective: f64::NEG_INFINITY,
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            best_bound: f64::NEG_INFINITY,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("no incumbent found within the limit")]
    NoIncumbentWithinLimit,
    #[error("invalid program: {0}")]
    InvalidProgram(String),
}

/// Tolerances shared by the simplex and branch-and-bound.
pub mod tol {
    /// Primal feasibility tolerance.
    pub const FEAS: f64 = 1e-9;
    /// Dual optimality tolerance.
    pub const OPT: f64 = 1e-9;
    /// Integer feasibility tolerance.
    pub const INT: f64 = 1e-6;
    /// Pivot magnitude below which a basis is declared singular.
    pub const PIVOT: f64 = 1e-11;
}
