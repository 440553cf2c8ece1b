use boundlab::instance::MilpInstance;

use crate::lp::{tableau_simplex, DenseLp, LpOutcome};
use crate::OracleError;

pub const DEFAULT_MAX_BINARIES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationResult {
    /// Optimal objective in the instance's own sense; `None` if infeasible.
    pub objective: Option<f64>,
    pub assignment: Option<Vec<f64>>,
    /// Integer patterns that admitted a feasible completion.
    pub feasible_points: usize,
}

fn row_ok(act: f64, rel: boundlab::instance::Relation, rhs: f64) -> bool {
    use boundlab::instance::Relation::*;
    let tol = 1e-9 * (1.0 + rhs.abs());
    match rel {
        Le => act <= rhs + tol,
        Ge => act >= rhs - tol,
        Eq => (act - rhs).abs() <= tol,
    }
}

/// Exhaustive search over all 0/1 patterns of the integer variables. With
/// continuous variables, each pattern is completed by an LP over the
/// remaining variables; patterns whose LP is infeasible are skipped.
pub fn enumerate_binary_optimum(inst: &MilpInstance, max_binaries: usize) -> Result<EnumerationResult, OracleError> {
    let ints: Vec<usize> = (0..inst.num_vars).filter(|&j| inst.is_integer[j]).collect();
    if ints.len() > max_binaries {
        return Err(OracleError::TooLarge { what: "binaries", limit: max_binaries, found: ints.len() });
    }
    if let Some(&j) = ints.iter().find(|&&j| inst.var_lb[j] < 0.0 || inst.var_ub[j] > 1.0) {
        return Err(OracleError::Unsupported(format!("integer variable {j} is not binary")));
    }
    let has_continuous = ints.len() < inst.num_vars;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut feasible_points = 0;
    'patterns: for mask in 0u64..(1u64 << ints.len()) {
        let mut x = vec![0.0; inst.num_vars];
        for (k, &j) in ints.iter().enumerate() {
            let v = ((mask >> k) & 1) as f64;
            if v < inst.var_lb[j] || v > inst.var_ub[j] {
                continue 'patterns;
            }
            x[j] = v;
        }
        let (obj, x) = if has_continuous {
            let (mut lb, mut ub) = (inst.var_lb.clone(), inst.var_ub.clone());
            for &j in &ints {
                lb[j] = x[j];
                ub[j] = x[j];
            }
            match tableau_simplex(&DenseLp::relaxation(inst, &lb, &ub))? {
                LpOutcome::Optimal { objective, x } => (objective, x),
                LpOutcome::Infeasible => continue,
                LpOutcome::Unbounded => {
                    return Err(OracleError::Unsupported("continuous completion is unbounded".into()))
                }
            }
        } else {
            for r in &inst.cons {
                let act: f64 = r.entries.iter().map(|&(j, a)| a * x[j]).sum();
                if !row_ok(act, r.rel, r.rhs) {
                    continue 'patterns;
                }
            }
            (inst.obj.iter().zip(&x).map(|(c, v)| c * v).sum(), x)
        };
        feasible_points += 1;
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, x));
        }
    }
    Ok(match best {
        Some((obj, x)) => EnumerationResult {
            objective: Some(inst.reported_objective(obj)),
            assignment: Some(x),
            feasible_points,
        },
        None => EnumerationResult {
            objective: None,
            assignment: None,
            feasible_points,
        },
    })
}
