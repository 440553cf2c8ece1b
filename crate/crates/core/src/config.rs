//! Numerical tolerances shared by the LP solver, the search and the metrics.

/// Central tolerance record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Primal feasibility of rows and bounds.
    pub feasibility: f64,
    /// Distance from the nearest integer below which a value counts as integral.
    pub integrality: f64,
    /// Objective comparisons (pruning, incumbent improvement).
    pub objective: f64,
    /// Smallest pivot magnitude the simplex accepts.
    pub pivot: f64,
    /// Reduced-cost optimality threshold.
    pub optimality: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        feasibility: 1e-7,
        integrality: 1e-6,
        objective: 1e-9,
        pivot: 1e-9,
        optimality: 1e-9,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Fractional part of `v` measured from the floor, with values within the
/// integrality tolerance of an integer mapped to zero.
pub fn fractional_part(v: f64, tol: f64) -> f64 {
    let f = v - v.floor();
    if f <= tol || f >= 1.0 - tol {
        0.0
    } else {
        f
    }
}

pub fn is_integral(v: f64, tol: f64) -> bool {
    (v - v.round()).abs() <= tol
}
