//! Continuous linear programs in inequality form and a revised simplex
//! solver for them.

mod lpfile;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lpfile::write_lp_format;
pub use simplex::{solve_lp, solve_lp_with, PivotRule, SimplexOptions};

/// Default feasibility and optimality tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// One constraint row `sum coeffs[k].1 * x[coeffs[k].0] <relation> rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        Self { coeffs, relation, rhs }
    }

    pub fn le(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self::new(coeffs, Relation::Le, rhs)
    }

    pub fn ge(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self::new(coeffs, Relation::Ge, rhs)
    }

    pub fn eq(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self::new(coeffs, Relation::Eq, rhs)
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A maximization LP over `num_vars` bounded columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    /// Per-variable `(lower, upper)`; either side may be infinite.
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    /// An LP with `num_vars` columns, zero objective, no rows and bounds
    /// `[0, +inf)`.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); num_vars],
        }
    }

    pub fn add_row(&mut self, row: Row) -> usize {
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Checks shape and finiteness. Crossed bounds are allowed here and make
    /// the problem infeasible rather than malformed.
    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::Input(format!(
                "objective has {} entries, expected {}",
                self.objective.len(),
                self.num_vars
            )));
        }
        if self.bounds.len() != self.num_vars {
            return Err(Error::Input(format!(
                "bounds have {} entries, expected {}",
                self.bounds.len(),
                self.num_vars
            )));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(Error::Input(format!("objective coefficient {j} is not finite")));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::Input(format!("bounds of variable {j} are invalid: [{lo}, {hi}]")));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::Input(format!("row {r} has non-finite rhs")));
            }
            for &(j, a) in &row.coeffs {
                if j >= self.num_vars {
                    return Err(Error::Input(format!(
                        "row {r} references variable {j} but there are {}",
                        self.num_vars
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::Input(format!("row {r} has a non-finite coefficient on variable {j}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Meaningful only when `status` is `Optimal`.
    pub objective_value: f64,
    pub primal: Vec<f64>,
    /// Row duals of the final basis (one per row, zero for rows that were
    /// dropped as empty). Meaningful only when `Optimal`.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Residuals of a point against an [`LpProblem`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub max_row_violation: f64,
    pub max_bound_violation: f64,
    pub objective_value: f64,
}

impl ResidualReport {
    pub fn is_feasible(&self, tolerance: f64) -> bool {
        self.max_row_violation <= tolerance && self.max_bound_violation <= tolerance
    }
}

/// Reports the exact residuals of `primal` against `problem`.
pub fn check_solution(problem: &LpProblem, primal: &[f64]) -> Result<ResidualReport> {
    if primal.len() != problem.num_vars {
        return Err(Error::Input(format!(
            "point has {} entries, problem has {} variables",
            primal.len(),
            problem.num_vars
        )));
    }
    let max_row_violation = problem
        .rows
        .iter()
        .map(|r| r.violation(primal))
        .fold(0.0, f64::max);
    let max_bound_violation = problem
        .bounds
        .iter()
        .zip(primal)
        .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(0.0))
        .fold(0.0, f64::max);
    Ok(ResidualReport {
        max_row_violation,
        max_bound_violation,
        objective_value: problem.objective_value(primal),
    })
}
