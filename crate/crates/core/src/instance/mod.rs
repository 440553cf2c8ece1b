//! The MILP data model: `min c·x` subject to sparse linear rows, variable
//! bounds and integrality flags.
//!
//! Instances are always stored in minimization form. A maximization problem
//! keeps its negated objective and the [`Sense`] flag, which is only used to
//! report objective values in the caller's sign convention.

mod generate;
mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{
    generate_cap_facility_location, generate_combinatorial_auction, generate_set_covering, Family,
    FamilyParams,
};
pub use io::{instance_to_string, parse_instance, read_instance, write_instance, INSTANCE_SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

/// One sparse row `Σ a_j x_j  rel  rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub entries: Vec<(usize, f64)>,
    pub rel: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(entries: Vec<(usize, f64)>, rel: Relation, rhs: f64) -> Self {
        Self { entries, rel, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.entries.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.rel {
            Relation::Le => (act - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - act).max(0.0),
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpInstance {
    pub name: String,
    pub sense: Sense,
    pub num_vars: usize,
    pub num_cons: usize,
    /// Minimization cost vector (already negated for maximization problems).
    pub obj: Vec<f64>,
    pub cons: Vec<Constraint>,
    pub var_lb: Vec<f64>,
    pub var_ub: Vec<f64>,
    pub is_integer: Vec<bool>,
    pub seed: u64,
}

impl MilpInstance {
    /// Checks structural invariants: dimensions, index ranges and bound order.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars;
        if self.obj.len() != n
            || self.var_lb.len() != n
            || self.var_ub.len() != n
            || self.is_integer.len() != n
        {
            return Err(Error::invalid(format!(
                "instance `{}`: vector lengths do not match num_vars = {n}",
                self.name
            )));
        }
        if self.cons.len() != self.num_cons {
            return Err(Error::invalid(format!(
                "instance `{}`: {} rows but num_cons = {}",
                self.name,
                self.cons.len(),
                self.num_cons
            )));
        }
        for (i, row) in self.cons.iter().enumerate() {
            if let Some(&(j, _)) = row.entries.iter().find(|&&(j, _)| j >= n) {
                return Err(Error::invalid(format!(
                    "row {i} references variable {j} >= num_vars {n}"
                )));
            }
            if !row.rhs.is_finite() || row.entries.iter().any(|&(_, a)| !a.is_finite()) {
                return Err(Error::invalid(format!("row {i} has a non-finite coefficient")));
            }
        }
        for j in 0..n {
            if self.var_lb[j] > self.var_ub[j] {
                return Err(Error::invalid(format!(
                    "variable {j}: lower bound {} exceeds upper bound {}",
                    self.var_lb[j], self.var_ub[j]
                )));
            }
            if !self.obj[j].is_finite() {
                return Err(Error::invalid(format!("variable {j}: non-finite cost")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.obj.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Converts an internal (minimization) objective to the user's sense.
    pub fn reported_objective(&self, internal: f64) -> f64 {
        match self.sense {
            Sense::Minimize => internal,
            Sense::Maximize => -internal,
        }
    }

    pub fn num_integer(&self) -> usize {
        self.is_integer.iter().filter(|&&b| b).count()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .cons
            .iter()
            .map(|r| r.violation(x))
            .fold(0.0_f64, f64::max);
        let bounds = (0..self.num_vars)
            .map(|j| (self.var_lb[j] - x[j]).max(x[j] - self.var_ub[j]).max(0.0))
            .fold(0.0_f64, f64::max);
        rows.max(bounds)
    }

    pub fn is_feasible(&self, x: &[f64], feas_tol: f64, int_tol: f64) -> bool {
        self.max_violation(x) <= feas_tol
            && x.iter()
                .zip(&self.is_integer)
                .all(|(v, &int)| !int || crate::config::is_integral(*v, int_tol))
    }
}
