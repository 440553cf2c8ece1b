use std::sync::Arc;

use rayon::prelude::*;

use super::{distance_trace, gap_curve, DistanceTrace, GapCurve, LcsMode, MetricRow};
use crate::bnb::{solve, SolveLimits, SolveOptions, SolveResult, SolveStatus, TraceLevel};
use crate::clock::ClockKind;
use crate::error::{Error, Result};
use crate::instance::MilpInstance;
use crate::model::FusionEnsemble;
use crate::select::{PairScorer, Selector, SelectorKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    pub limits: SolveLimits,
    pub clock: ClockKind,
    /// Worker threads for the (instance, selector) cells.
    pub jobs: usize,
    pub lcs: LcsMode,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            limits: SolveLimits::default(),
            clock: ClockKind::Work,
            jobs: 1,
            lcs: LcsMode::Substring,
        }
    }
}

/// One cell of the benchmark matrix.
#[derive(Debug, Clone)]
pub enum RunOutcome {
    Solved(Box<SolveResult>),
    Failed(String),
}

/// Rows, curves and traces in instance-major, selector-minor order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchResult {
    pub rows: Vec<MetricRow>,
    pub curves: Vec<GapCurve>,
    pub traces: Vec<DistanceTrace>,
}

/// Builds the metric row of one finished solve. `optimum` is in the
/// instance's own sense.
pub fn metric_row(inst: &MilpInstance, selector: &str, res: &SolveResult, optimum: Option<f64>) -> MetricRow {
    MetricRow {
        instance_id: inst.name.clone(),
        selector: selector.to_string(),
        status: res.status.name().to_string(),
        nodes: res.nodes_processed,
        bpb_nodes: res.bpb_nodes,
        bpb_time: res.bpb_time,
        solve_time: res.solve_time,
        optimum,
        objective: res
            .has_incumbent()
            .then(|| inst.reported_objective(res.incumbent_objective)),
    }
}

fn run_cell(inst: &MilpInstance, kind: SelectorKind, opts: &BenchOptions, model: Option<&Arc<FusionEnsemble>>) -> RunOutcome {
    let selector = match kind {
        SelectorKind::Learned => match model {
            Some(m) => Selector::learned(m.clone() as Arc<dyn PairScorer>),
            None => return RunOutcome::Failed("no model for the learned selector".into()),
        },
        k => Selector::heuristic(k).expect("heuristic selector"),
    };
    let solve_opts = SolveOptions {
        limits: opts.limits,
        clock: opts.clock,
        trace: TraceLevel::Nodes,
        ..SolveOptions::default()
    };
    match solve(inst, selector, &solve_opts) {
        Ok(res) => RunOutcome::Solved(Box::new(res)),
        Err(e) => RunOutcome::Failed(e.to_string()),
    }
}

/// Runs every selector on every instance. Per-cell failures end up in the
/// row status; the batch itself only fails on bad arguments.
pub fn run_benchmark(
    instances: &[MilpInstance],
    selectors: &[SelectorKind],
    opts: &BenchOptions,
    model: Option<Arc<FusionEnsemble>>,
) -> Result<BenchResult> {
    if selectors.contains(&SelectorKind::Learned) && model.is_none() {
        return Err(Error::MissingModel(
            "the learned selector needs a model (pass --model)".into(),
        ));
    }
    if opts.jobs == 0 {
        return Err(Error::invalid("jobs must be at least 1"));
    }
    let cells: Vec<(usize, SelectorKind)> = (0..instances.len())
        .flat_map(|i| selectors.iter().map(move |&s| (i, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let outcomes: Vec<RunOutcome> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, s)| run_cell(&instances[i], s, opts, model.as_ref()))
            .collect()
    });

    let mut out = BenchResult::default();
    for (i, inst) in instances.iter().enumerate() {
        let cell = &outcomes[i * selectors.len()..(i + 1) * selectors.len()];
        // Best known objective: proven optima first, any incumbent otherwise.
        let solved = |proven: bool| {
            cell.iter()
                .filter_map(|o| match o {
                    RunOutcome::Solved(r) if r.has_incumbent() && (!proven || r.status == SolveStatus::Optimal) => {
                        Some(r.incumbent_objective)
                    }
                    _ => None,
                })
                .reduce(f64::min)
        };
        let best = solved(true).or_else(|| solved(false));
        for (o, kind) in cell.iter().zip(selectors) {
            let name = kind.name();
            match o {
                RunOutcome::Solved(res) => {
                    out.rows.push(metric_row(inst, name, res, best.map(|b| inst.reported_objective(b))));
                    out.curves.push(GapCurve {
                        instance_id: inst.name.clone(),
                        selector: name.into(),
                        // without any incumbent every gap is 1 whatever the optimum
                        samples: gap_curve(res, best.unwrap_or(0.0)),
                    });
                    let found_opt = best.is_some_and(|b| {
                        res.has_incumbent()
                            && (res.incumbent_objective - b).abs() <= 1e-6 * b.abs().max(1.0)
                    });
                    let samples = match (&res.bpb_history, res.bpb_node) {
                        (Some(h), Some(node)) if found_opt => distance_trace(res, node, h, opts.lcs),
                        _ => Vec::new(),
                    };
                    out.traces.push(DistanceTrace {
                        instance_id: inst.name.clone(),
                        selector: name.into(),
                        samples,
                    });
                }
                RunOutcome::Failed(msg) => {
                    out.rows.push(MetricRow {
                        instance_id: inst.name.clone(),
                        selector: name.into(),
                        status: format!("error: {msg}"),
                        nodes: 0,
                        bpb_nodes: 0,
                        bpb_time: 0.0,
                        solve_time: 0.0,
                        optimum: best.map(|b| inst.reported_objective(b)),
                        objective: None,
                    });
                    out.curves.push(GapCurve {
                        instance_id: inst.name.clone(),
                        selector: name.into(),
                        samples: Vec::new(),
                    });
                    out.traces.push(DistanceTrace {
                        instance_id: inst.name.clone(),
                        selector: name.into(),
                        samples: Vec::new(),
                    });
                }
            }
        }
    }
    Ok(out)
}
