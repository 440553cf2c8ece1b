//! Benchmark metrics and reports: per-run rows, primal-gap curves, distance
//! to the optimal node, win counts and permutation importance.

mod bench;
mod distance;
mod importance;
mod report;
mod wins;

use serde::{Deserialize, Serialize};

pub use bench::{metric_row, run_benchmark, BenchOptions, BenchResult, RunOutcome};
pub use distance::{distance_to_opt, distance_with, longest_common_run, LcsMode};
pub use importance::{permutation_importance, ImportanceRow, Position};
pub use report::{emit_report, load_report, ReportFiles, DISTANCE_CSV, GAP_CSV, IMPORTANCE_CSV, METRICS_CSV, WINS_CSV};
pub use wins::{count_wins, WinTable};

use crate::bnb::{BranchHistory, EventKind, SolveResult};

/// One solve of one instance by one selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub instance_id: String,
    pub selector: String,
    pub status: String,
    pub nodes: usize,
    pub bpb_nodes: usize,
    pub bpb_time: f64,
    pub solve_time: f64,
    /// Best objective known for the instance across all selectors, in the
    /// instance's own sense.
    pub optimum: Option<f64>,
    /// This run's final incumbent objective, in the instance's own sense.
    pub objective: Option<f64>,
}

/// `(nodes processed, primal gap)` after each processed node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCurve {
    pub instance_id: String,
    pub selector: String,
    pub samples: Vec<(usize, f64)>,
}

/// `(selection index, D)` for every selection up to the one that led to the
/// optimal incumbent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceTrace {
    pub instance_id: String,
    pub selector: String,
    pub samples: Vec<(usize, usize)>,
}

/// Relative distance of `pb` from `opt`; 1 without an incumbent.
pub fn primal_gap(pb: Option<f64>, opt: f64) -> f64 {
    let Some(pb) = pb else {
        return 1.0;
    };
    let scale = pb.abs().max(opt.abs());
    if (pb - opt).abs() <= 1e-9 * scale.max(1.0) || scale == 0.0 {
        return 0.0;
    }
    ((pb - opt).abs() / scale).clamp(0.0, 1.0)
}

/// Gap after each processed node, using the incumbent held once that node
/// was finished. `opt` is in minimization form.
pub fn gap_curve(res: &SolveResult, opt: f64) -> Vec<(usize, f64)> {
    let solved: Vec<usize> = res
        .event_log
        .iter()
        .enumerate()
        .filter(|(_, e)| e.kind == EventKind::NodeSolved)
        .map(|(i, _)| i)
        .collect();
    let final_pb = res.incumbent.as_ref().map(|_| res.incumbent_objective);
    solved
        .iter()
        .enumerate()
        .map(|(k, _)| {
            let pb = match solved.get(k + 1) {
                Some(&next) => res.event_log[next].pb,
                None => final_pb,
            };
            (k + 1, primal_gap(pb, opt))
        })
        .collect()
}

/// Distances of the selected nodes from `h_opt`, up to and including the
/// selection of `bpb_node`. Requires node records in the trace.
pub fn distance_trace(
    res: &SolveResult,
    bpb_node: usize,
    h_opt: &BranchHistory,
    mode: LcsMode,
) -> Vec<(usize, usize)> {
    let Some(trace) = res.trace.as_ref() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let selections = res.event_log.iter().filter(|e| e.kind == EventKind::Selected);
    for (k, e) in selections.enumerate() {
        let h = &trace.nodes[e.node_id].history;
        out.push((k, distance_with(h, h_opt, mode)));
        if e.node_id == bpb_node {
            break;
        }
    }
    out
}
