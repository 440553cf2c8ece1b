//! Full strong branching: probe both child LPs of every fractional candidate.

use super::pseudocost::{update_pseudocosts, Direction, PseudocostTable};
use crate::config::fractional_part;
use crate::error::Result;
use crate::lp::{LpModel, LpResult, LpStatus, WarmStart};

/// Floor applied to each child's gain in the product score.
pub const FSB_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct StrongBranch {
    pub var: usize,
    /// LP value of `var` at the node.
    pub value: f64,
    pub down: LpResult,
    pub up: LpResult,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FsbOutcome {
    /// The node contains no feasible point (both probes of some candidate
    /// are infeasible, or bound tightening emptied the node LP).
    Prune,
    /// Bound tightening made the node LP integral.
    Integral,
    Branch(StrongBranch),
}

/// A bound fixed at the node because one probe of a candidate was infeasible.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tightening {
    pub var: usize,
    pub lb: f64,
    pub ub: f64,
}

#[derive(Debug, Clone)]
pub struct FsbResult {
    pub outcome: FsbOutcome,
    /// Node LP after all tightenings (unchanged when none happened).
    pub node_lp: LpResult,
    /// Final tableaus of the chosen down and up probes.
    pub child_bases: [Option<WarmStart>; 2],
    pub tightenings: Vec<Tightening>,
    pub probes: usize,
    pub iterations: usize,
}

/// Integer variables whose LP value is fractional, in index order.
pub fn fractional_candidates(x: &[f64], is_integer: &[bool], int_tol: f64) -> Vec<usize> {
    x.iter()
        .zip(is_integer)
        .enumerate()
        .filter(|(_, (&v, &int))| int && fractional_part(v, int_tol) > 0.0)
        .map(|(j, _)| j)
        .collect()
}

fn probe(
    model: &LpModel,
    basis: Option<&WarmStart>,
    lb: &[f64],
    ub: &[f64],
) -> Result<(LpResult, Option<WarmStart>)> {
    match basis {
        Some(b) => model.resolve(b, lb, ub),
        None => Ok((model.solve(lb, ub)?, None)),
    }
}

fn product_score(down_gain: f64, up_gain: f64) -> f64 {
    down_gain.max(FSB_EPSILON) * up_gain.max(FSB_EPSILON)
}

/// Chooses the branching variable maximizing the product of child gains,
/// ties going to the smallest index.
///
/// `local_lb`/`local_ub` are the node's box; they are tightened in place when
/// a probe turns out infeasible, after which the node LP is re-solved and the
/// remaining candidates are probed again. Every feasible probe feeds the
/// pseudocost table. Probes are warm-started from `node_basis`, the node
/// LP's optimal tableau, when one is given.
pub fn branch_full_strong(
    model: &LpModel,
    local_lb: &mut [f64],
    local_ub: &mut [f64],
    node_lp: LpResult,
    node_basis: Option<WarmStart>,
    candidates: &[usize],
    is_integer: &[bool],
    table: &mut PseudocostTable,
) -> Result<FsbResult> {
    let int_tol = model.tolerances().integrality;
    let mut lp = node_lp;
    let mut basis = node_basis;
    let mut cands = candidates.to_vec();
    let mut tightenings = Vec::new();
    let mut probes = 0;
    let mut iterations = 0;
    loop {
        let mut best: Option<StrongBranch> = None;
        let mut best_bases = [None, None];
        let mut found: Vec<Tightening> = Vec::new();
        for &j in &cands {
            let value = lp.x[j];
            let (lo, hi) = (value.floor(), value.ceil());

            let saved_ub = local_ub[j];
            local_ub[j] = lo;
            let (down, down_basis) = probe(model, basis.as_ref(), local_lb, local_ub)?;
            local_ub[j] = saved_ub;

            let saved_lb = local_lb[j];
            local_lb[j] = hi;
            let (up, up_basis) = probe(model, basis.as_ref(), local_lb, local_ub)?;
            local_lb[j] = saved_lb;

            probes += 2;
            iterations += down.iterations + up.iterations;

            let down_dead = down.status == LpStatus::Infeasible;
            let up_dead = up.status == LpStatus::Infeasible;
            match (down_dead, up_dead) {
                (true, true) => {
                    return Ok(FsbResult {
                        outcome: FsbOutcome::Prune,
                        node_lp: lp,
                        child_bases: [None, None],
                        tightenings,
                        probes,
                        iterations,
                    })
                }
                (true, false) => {
                    found.push(Tightening {
                        var: j,
                        lb: hi,
                        ub: local_ub[j],
                    });
                    continue;
                }
                (false, true) => {
                    found.push(Tightening {
                        var: j,
                        lb: local_lb[j],
                        ub: lo,
                    });
                    continue;
                }
                (false, false) => {}
            }

            let gain = |child: &LpResult| {
                if child.is_optimal() {
                    (child.objective - lp.objective).max(0.0)
                } else {
                    0.0
                }
            };
            let (down_gain, up_gain) = (gain(&down), gain(&up));
            let frac = value - lo;
            update_pseudocosts(table, j, Direction::Down, down_gain, frac);
            update_pseudocosts(table, j, Direction::Up, up_gain, frac);
            let score = product_score(down_gain, up_gain);
            if best.as_ref().is_none_or(|b| score > b.score) {
                best = Some(StrongBranch {
                    var: j,
                    value,
                    down,
                    up,
                    score,
                });
                best_bases = [down_basis, up_basis];
            }
        }

        if found.is_empty() {
            let choice = best.expect("a nonempty candidate list without tightenings yields a choice");
            return Ok(FsbResult {
                outcome: FsbOutcome::Branch(choice),
                node_lp: lp,
                child_bases: best_bases,
                tightenings,
                probes,
                iterations,
            });
        }

        for t in &found {
            local_lb[t.var] = t.lb;
            local_ub[t.var] = t.ub;
        }
        tightenings.extend(found);
        let (relp, rebasis) = probe(model, basis.as_ref(), local_lb, local_ub)?;
        lp = relp;
        iterations += lp.iterations;
        if !lp.is_optimal() {
            return Ok(FsbResult {
                outcome: FsbOutcome::Prune,
                node_lp: lp,
                child_bases: [None, None],
                tightenings,
                probes,
                iterations,
            });
        }
        if basis.is_some() {
            basis = rebasis;
        }
        cands = fractional_candidates(&lp.x, is_integer, int_tol);
        if cands.is_empty() {
            return Ok(FsbResult {
                outcome: FsbOutcome::Integral,
                node_lp: lp,
                child_bases: [None, None],
                tightenings,
                probes,
                iterations,
            });
        }
    }
}
