use super::LpResult;
use crate::instance::MilpInstance;

/// Primal feasibility report for an LP solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationReport {
    pub max_row_violation: f64,
    pub worst_row: Option<usize>,
    pub max_bound_violation: f64,
    pub worst_var: Option<usize>,
}

impl ViolationReport {
    pub fn within(&self, tol: f64) -> bool {
        self.max_row_violation <= tol && self.max_bound_violation <= tol
    }
}

/// Measures how far `res.x` is from satisfying the rows of `inst` and the
/// local box. Reporting only; never fails.
pub fn check_lp_certificate(
    inst: &MilpInstance,
    res: &LpResult,
    local_lb: &[f64],
    local_ub: &[f64],
) -> ViolationReport {
    let mut report = ViolationReport {
        max_row_violation: 0.0,
        worst_row: None,
        max_bound_violation: 0.0,
        worst_var: None,
    };
    if res.x.len() != inst.num_vars {
        return report;
    }
    for (i, row) in inst.cons.iter().enumerate() {
        let v = row.violation(&res.x);
        if v > report.max_row_violation {
            report.max_row_violation = v;
            report.worst_row = Some(i);
        }
    }
    for (j, &x) in res.x.iter().enumerate() {
        let v = (local_lb[j] - x).max(x - local_ub[j]).max(0.0);
        if v > report.max_bound_violation {
            report.max_bound_violation = v;
            report.worst_var = Some(j);
        }
    }
    report
}
