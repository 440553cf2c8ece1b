//! Recomputes node selections from logged queue contents, and the order a
//! plain stack would visit a depth-first tree in.

use std::collections::{BTreeSet, HashMap};

use boundlab::bnb::{EventKind, SolveResult};

use crate::OracleError;

/// A queued node as logged at a selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoggedNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub lower_bound: f64,
    pub estimate: f64,
    pub score: Option<f64>,
}

/// Queue contents and incumbent value right before one pop.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueSnapshot {
    pub pb: Option<f64>,
    pub queue: Vec<LoggedNode>,
    /// What the live search popped.
    pub selected: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Dfs,
    Bfs,
    Bes,
    Learned,
}

/// Plunging parameters: children of the last node are preferred while
/// fewer than `max_depth` consecutive child pops happened and (once an
/// incumbent exists) their key is within `cutoff` of the way from the dual
/// bound to the incumbent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectorSpec {
    pub rule: Rule,
    pub max_depth: usize,
    pub cutoff: f64,
}

impl SelectorSpec {
    pub fn new(rule: Rule) -> Self {
        SelectorSpec {
            rule,
            max_depth: 10,
            cutoff: 0.25,
        }
    }
}

/// Rebuilds the snapshots of a solve run with a full trace. Refuses logs
/// whose selections and `Selected` events disagree.
pub fn snapshots_from_trace(res: &SolveResult) -> Result<Vec<QueueSnapshot>, OracleError> {
    let trace = res
        .trace
        .as_ref()
        .ok_or_else(|| OracleError::IncompleteLog("no trace recorded".into()))?;
    let selected: Vec<_> = res.event_log.iter().filter(|e| e.kind == EventKind::Selected).collect();
    if selected.len() != trace.selections.len() {
        return Err(OracleError::IncompleteLog(format!(
            "{} selection records for {} selected events",
            trace.selections.len(),
            selected.len()
        )));
    }
    let mut out = Vec::with_capacity(selected.len());
    for (ev, sel) in selected.iter().zip(&trace.selections) {
        if ev.node_id != sel.selected {
            return Err(OracleError::IncompleteLog(format!("selection {} does not match its event", sel.index)));
        }
        let queue = sel
            .queue
            .iter()
            .map(|&id| {
                let rec = trace
                    .nodes
                    .get(id)
                    .ok_or_else(|| OracleError::IncompleteLog(format!("node {id} has no record")))?;
                Ok(LoggedNode {
                    id,
                    parent: rec.input.parent,
                    depth: rec.input.depth,
                    lower_bound: rec.input.lower_bound,
                    estimate: rec.input.estimate,
                    score: rec.score,
                })
            })
            .collect::<Result<Vec<_>, OracleError>>()?;
        out.push(QueueSnapshot {
            pb: ev.pb,
            queue,
            selected: sel.selected,
        });
    }
    Ok(out)
}

/// The node each snapshot should have popped under `spec`.
pub fn replay_selection_oracle(snapshots: &[QueueSnapshot], spec: SelectorSpec) -> Result<Vec<usize>, OracleError> {
    let mut focus: Option<usize> = None;
    let mut plunged = 0usize;
    let mut picks = Vec::with_capacity(snapshots.len());
    for (k, snap) in snapshots.iter().enumerate() {
        if snap.queue.is_empty() {
            return Err(OracleError::IncompleteLog(format!("snapshot {k} has an empty queue")));
        }
        let db = snap
            .queue
            .iter()
            .map(|n| n.lower_bound)
            .fold(f64::INFINITY, f64::min)
            .min(snap.pb.unwrap_or(f64::INFINITY));
        let is_child = |n: &LoggedNode| focus.is_some() && n.parent == focus;
        let key = |n: &LoggedNode| match spec.rule {
            Rule::Bfs => n.lower_bound,
            _ => n.estimate,
        };
        let candidates: Vec<&LoggedNode> = match spec.rule {
            Rule::Learned => snap.queue.iter().collect(),
            Rule::Dfs => {
                let kids: Vec<_> = snap.queue.iter().filter(|n| is_child(n)).collect();
                if kids.is_empty() { snap.queue.iter().collect() } else { kids }
            }
            Rule::Bfs | Rule::Bes => {
                let kids: Vec<_> = snap
                    .queue
                    .iter()
                    .filter(|n| {
                        is_child(n)
                            && plunged < spec.max_depth
                            && snap.pb.is_none_or(|pb| key(n) <= db + spec.cutoff * (pb - db))
                    })
                    .collect();
                if kids.is_empty() { snap.queue.iter().collect() } else { kids }
            }
        };
        // smallest tuple wins: (policy value, lower bound, id)
        let value = |n: &LoggedNode| -> f64 {
            match spec.rule {
                Rule::Dfs => -(n.depth as f64),
                Rule::Bfs => n.lower_bound,
                Rule::Bes => n.estimate,
                Rule::Learned => -n.score.unwrap_or(f64::INFINITY),
            }
        };
        let pick = candidates
            .iter()
            .min_by(|a, b| {
                value(a)
                    .total_cmp(&value(b))
                    .then(a.lower_bound.total_cmp(&b.lower_bound))
                    .then(a.id.cmp(&b.id))
            })
            .expect("nonempty");
        plunged = if is_child(pick) { plunged + 1 } else { 0 };
        focus = Some(pick.id);
        picks.push(pick.id);
    }
    Ok(picks)
}

/// Visit order of a depth-first search driven by an explicit stack: the
/// children of a branched node are pushed so that the one with the smaller
/// (lower bound, id) is on top, and nodes pruned from the queue are dropped.
/// Requires a trace with node records.
pub fn dfs_stack_order(res: &SolveResult) -> Result<Vec<usize>, OracleError> {
    let trace = res
        .trace
        .as_ref()
        .ok_or_else(|| OracleError::IncompleteLog("no trace recorded".into()))?;
    let mut children: HashMap<usize, Vec<usize>> = HashMap::new();
    for (id, rec) in trace.nodes.iter().enumerate() {
        if let Some(p) = rec.input.parent {
            children.entry(p).or_default().push(id);
        }
    }
    let mut stack = vec![0usize];
    let mut dropped = BTreeSet::new();
    let mut order = Vec::new();
    for e in &res.event_log {
        match e.kind {
            EventKind::Selected => {
                while stack.last().is_some_and(|top| dropped.contains(top)) {
                    stack.pop();
                }
                let top = stack
                    .pop()
                    .ok_or_else(|| OracleError::IncompleteLog("selection from an empty stack".into()))?;
                order.push(top);
            }
            EventKind::Branched => {
                let mut kids = children.get(&e.node_id).cloned().unwrap_or_default();
                kids.sort_by(|&a, &b| {
                    let (la, lb) = (trace.nodes[a].input.lower_bound, trace.nodes[b].input.lower_bound);
                    lb.total_cmp(&la).then(b.cmp(&a))
                });
                stack.extend(kids);
            }
            EventKind::Pruned => {
                dropped.insert(e.node_id);
            }
            _ => {}
        }
    }
    Ok(order)
}
