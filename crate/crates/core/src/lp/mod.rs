//! LP relaxations via a dense bounded-variable primal simplex.
//!
//! Every row gets a slack so that `A x + s = b`; slack bounds encode the row
//! relation. Rows whose slack cannot absorb the initial residual receive an
//! artificial column and phase 1 minimizes the artificial sum. Pricing is
//! Dantzig's rule; after `3 (m + n)` consecutive degenerate pivots the solver
//! switches to Bland's rule until the objective moves again.

mod certificate;
mod simplex;

pub use certificate::{check_lp_certificate, ViolationReport};
pub use simplex::{LpModel, WarmStart};

use crate::config::Tolerances;
use crate::error::Result;
use crate::instance::MilpInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Structural solution; empty unless optimal.
    pub x: Vec<f64>,
    /// `c·x` when optimal, `+inf` when infeasible, `-inf` when unbounded.
    pub objective: f64,
    pub iterations: usize,
    /// Integer variables whose value is fractional beyond the integrality tolerance.
    pub num_fractional: usize,
}

impl LpResult {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub(crate) fn infeasible(iterations: usize) -> Self {
        LpResult {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective: f64::INFINITY,
            iterations,
            num_fractional: 0,
        }
    }
}

/// Solves the LP relaxation of `inst` restricted to the box `[local_lb, local_ub]`.
///
/// Crossing bounds yield an infeasible result without running the simplex.
pub fn solve_lp(inst: &MilpInstance, local_lb: &[f64], local_ub: &[f64]) -> Result<LpResult> {
    LpModel::new(inst, Tolerances::DEFAULT).solve(local_lb, local_ub)
}
