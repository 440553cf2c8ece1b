//! Branch-and-bound search over LP relaxations.
//!
//! The queue is a flat list of open nodes; each selection scans it with the
//! active [`Selector`]. Branching is full strong branching. Incumbents come
//! only from nodes whose LP solution is integral.

mod branching;
mod events;
mod pseudocost;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use branching::{
    branch_full_strong, fractional_candidates, FsbOutcome, FsbResult, StrongBranch, Tightening,
    FSB_EPSILON,
};
pub use events::{read_event_log, replay_event_log, write_event_log, Event, EventKind, LogSummary};
pub use pseudocost::{node_estimate, update_pseudocosts, Direction, PseudocostTable};

use crate::clock::{ClockKind, SolveClock};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::features::{
    extract_features_with, BranchInfo, FeatureVector, Focus, NodeFeatureInput, TreeContext,
};
use crate::instance::MilpInstance;
use crate::lp::{LpModel, LpResult, LpStatus, WarmStart};
use crate::select::{PairScorer, PlungeState, QueuedView, Selector, SelectorKind};

/// One branching decision: `var <= bound` (down) or `var >= bound` (up).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub var: usize,
    pub dir: Direction,
    pub bound: f64,
}

/// Decisions on the path from the root to a node, root first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BranchHistory(pub Vec<Decision>);

impl BranchHistory {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.0
    }

    pub fn extended(&self, d: Decision) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(d);
        BranchHistory(v)
    }

    pub fn is_prefix_of(&self, other: &BranchHistory) -> bool {
        self.0.len() <= other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a == b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveLimits {
    pub node_limit: Option<usize>,
    /// Seconds on the active clock.
    pub time_limit: f64,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            node_limit: None,
            time_limit: 3600.0,
        }
    }
}

/// How much of the search tree to keep in the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceLevel {
    #[default]
    None,
    /// Static per-node records (history, bounds at creation, features).
    Nodes,
    /// Node records plus the queue contents at every selection.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub limits: SolveLimits,
    pub clock: ClockKind,
    pub trace: TraceLevel,
    pub tol: Tolerances,
    /// Reuse parent tableaus for strong-branching probes and child LPs.
    pub warm_start: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            limits: SolveLimits::default(),
            clock: ClockKind::Work,
            trace: TraceLevel::None,
            tol: Tolerances::DEFAULT,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NodeLimit,
    TimeLimit,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NodeLimit => "node-limit",
            SolveStatus::TimeLimit => "time-limit",
        }
    }
}

/// Everything known about a node once it exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub input: NodeFeatureInput,
    pub sibling: Option<usize>,
    pub history: BranchHistory,
    /// Pseudocosts of the branching variable at creation (branched, opposite).
    pub pseudocosts: (f64, f64),
    pub creation_features: FeatureVector,
    pub score: Option<f64>,
    /// Local box at creation (only with [`TraceLevel::Full`]).
    pub local_lb: Option<Vec<f64>>,
    pub local_ub: Option<Vec<f64>>,
    /// Bounds fixed by strong branching while processing this node.
    pub tightenings: Vec<Tightening>,
    /// LP objective when the node was processed.
    pub lp_objective: Option<f64>,
    /// Variable this node was split on, if it was branched.
    pub branched_on: Option<usize>,
}

impl NodeRecord {
    pub fn view(&self) -> QueuedView {
        QueuedView {
            id: self.input.id,
            parent: self.input.parent,
            depth: self.input.depth,
            lower_bound: self.input.lower_bound,
            estimate: self.input.estimate,
            score: self.score,
        }
    }
}

/// Queue contents and tree state at one selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub index: usize,
    /// Ids of all open nodes before the pop, in queue order.
    pub queue: Vec<usize>,
    pub selected: usize,
    pub ctx: TreeContext,
    pub plunge: PlungeState,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchTrace {
    /// Indexed by node id.
    pub nodes: Vec<NodeRecord>,
    pub selections: Vec<SelectionRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub incumbent: Option<Vec<f64>>,
    /// Minimization-form objective of the incumbent (`+inf` without one).
    pub incumbent_objective: f64,
    pub global_dual_bound: f64,
    pub root_bound: f64,
    pub root_integral: bool,
    pub nodes_processed: usize,
    pub nodes_created: usize,
    pub bpb_node: Option<usize>,
    /// Nodes processed when the best incumbent was found.
    pub bpb_nodes: usize,
    pub bpb_time: f64,
    pub solve_time: f64,
    pub lp_iterations: u64,
    pub event_log: Vec<Event>,
    pub trace: Option<SearchTrace>,
    /// History of the node where the best incumbent was found.
    pub bpb_history: Option<BranchHistory>,
}

impl SolveResult {
    pub fn has_incumbent(&self) -> bool {
        self.incumbent.is_some()
    }
}

/// Removes every node whose lower bound reaches the incumbent (within `tol`).
/// Returns the removed nodes in their queue order.
pub fn bound_and_prune<T>(
    queue: &mut Vec<T>,
    incumbent_objective: Option<f64>,
    lower_bound: impl Fn(&T) -> f64,
    tol: f64,
) -> Vec<T> {
    let Some(pb) = incumbent_objective else {
        return Vec::new();
    };
    let mut kept = Vec::with_capacity(queue.len());
    let mut pruned = Vec::new();
    for node in queue.drain(..) {
        if lower_bound(&node) >= pb - tol {
            pruned.push(node);
        } else {
            kept.push(node);
        }
    }
    *queue = kept;
    pruned
}

struct OpenNode {
    view: QueuedView,
    lb: Vec<f64>,
    ub: Vec<f64>,
    /// LP of this box already solved while strong branching at the parent.
    lp: Option<LpResult>,
    basis: Option<WarmStart>,
    history: BranchHistory,
}

struct Search<'a> {
    inst: &'a MilpInstance,
    model: LpModel,
    selector: Selector,
    scorer: Option<Arc<dyn PairScorer>>,
    opts: SolveOptions,
    clock: SolveClock,
    table: PseudocostTable,
    queue: Vec<OpenNode>,
    events: Vec<Event>,
    trace: Option<SearchTrace>,
    next_id: usize,
    nodes_processed: usize,
    max_depth: usize,
    root_bound: f64,
    root_integral: bool,
    pb: Option<f64>,
    incumbent: Option<Vec<f64>>,
    bpb_node: Option<usize>,
    bpb_nodes: usize,
    bpb_time: f64,
    bpb_history: Option<BranchHistory>,
    focus: Option<Focus>,
    /// Bound of the node currently being processed, if any.
    active_bound: Option<f64>,
    num_integer: usize,
}

/// Solves `inst` to optimality or until a limit is hit.
pub fn solve(inst: &MilpInstance, selector: Selector, opts: &SolveOptions) -> Result<SolveResult> {
    inst.validate()?;
    let scorer = selector.scorer().cloned();
    if selector.kind == SelectorKind::Learned && scorer.is_none() {
        return Err(Error::MissingModel(
            "the learned selector requires a trained model".into(),
        ));
    }
    let search = Search {
        inst,
        model: LpModel::new(inst, opts.tol),
        selector,
        scorer,
        opts: *opts,
        clock: SolveClock::start(opts.clock),
        table: PseudocostTable::new(inst.num_vars),
        queue: Vec::new(),
        events: Vec::new(),
        trace: match opts.trace {
            TraceLevel::None => None,
            _ => Some(SearchTrace::default()),
        },
        next_id: 0,
        nodes_processed: 0,
        max_depth: 0,
        root_bound: f64::NEG_INFINITY,
        root_integral: false,
        pb: None,
        incumbent: None,
        bpb_node: None,
        bpb_nodes: 0,
        bpb_time: 0.0,
        bpb_history: None,
        focus: None,
        active_bound: None,
        num_integer: inst.num_integer(),
    };
    search.run()
}

impl<'a> Search<'a> {
    fn tol(&self) -> f64 {
        self.opts.tol.objective
    }

    fn dual_bound(&self) -> Option<f64> {
        let open = self
            .queue
            .iter()
            .map(|n| n.view.lower_bound)
            .chain(self.active_bound)
            .fold(f64::INFINITY, f64::min);
        if open.is_finite() {
            // never report a dual bound above the incumbent
            Some(self.pb.map_or(open, |pb| open.min(pb)))
        } else if self.queue.is_empty() && self.active_bound.is_none() {
            self.pb
        } else {
            None
        }
    }

    fn log(&mut self, kind: EventKind, node_id: usize, depth: usize) {
        let db = self.dual_bound();
        self.events.push(Event {
            t: self.clock.elapsed(),
            kind,
            node_id,
            pb: self.pb,
            db: db.filter(|v| v.is_finite()),
            depth,
        });
    }

    fn tree_context(&self) -> TreeContext {
        TreeContext {
            pb: self.pb,
            db: self.dual_bound().unwrap_or(self.root_bound),
            db_root: if self.root_bound.is_finite() { self.root_bound } else { 0.0 },
            max_depth: self.max_depth,
            focus: self.focus,
            num_integer: self.num_integer,
        }
    }

    fn alloc_id(&mut self) -> usize {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn record_node(&mut self, rec: NodeRecord) {
        if let Some(trace) = self.trace.as_mut() {
            debug_assert_eq!(trace.nodes.len(), rec.input.id);
            trace.nodes.push(rec);
        }
    }

    fn node_record_mut(&mut self, id: usize) -> Option<&mut NodeRecord> {
        self.trace.as_mut().map(|t| &mut t.nodes[id])
    }

    fn run(mut self) -> Result<SolveResult> {
        let root_id = self.alloc_id();
        let root_view = QueuedView {
            id: root_id,
            parent: None,
            depth: 0,
            lower_bound: f64::NEG_INFINITY,
            estimate: f64::NEG_INFINITY,
            score: None,
        };
        let full = self.opts.trace == TraceLevel::Full;
        self.record_node(NodeRecord {
            input: NodeFeatureInput {
                id: root_id,
                parent: None,
                depth: 0,
                lower_bound: f64::NEG_INFINITY,
                estimate: f64::NEG_INFINITY,
                branch: None,
                parent_num_fractional: 0,
            },
            sibling: None,
            history: BranchHistory::default(),
            pseudocosts: (PseudocostTable::DEFAULT, PseudocostTable::DEFAULT),
            creation_features: FeatureVector([0.0; crate::features::FEATURE_DIM]),
            score: None,
            local_lb: full.then(|| self.inst.var_lb.clone()),
            local_ub: full.then(|| self.inst.var_ub.clone()),
            tightenings: Vec::new(),
            lp_objective: None,
            branched_on: None,
        });
        self.queue.push(OpenNode {
            view: root_view,
            lb: self.inst.var_lb.clone(),
            ub: self.inst.var_ub.clone(),
            lp: None,
            basis: None,
            history: BranchHistory::default(),
        });

        let status = loop {
            if self.queue.is_empty() {
                break if self.pb.is_some() {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::Infeasible
                };
            }
            if let Some(limit) = self.opts.limits.node_limit {
                if self.nodes_processed >= limit {
                    break SolveStatus::NodeLimit;
                }
            }
            if self.clock.elapsed() >= self.opts.limits.time_limit {
                break SolveStatus::TimeLimit;
            }
            let node = self.select();
            self.process(node)?;
        };

        let global_dual_bound = match status {
            SolveStatus::Optimal => self.pb.expect("optimal implies an incumbent"),
            SolveStatus::Infeasible => f64::INFINITY,
            _ => self.dual_bound().unwrap_or(f64::NEG_INFINITY),
        };
        Ok(SolveResult {
            status,
            incumbent_objective: self.pb.unwrap_or(f64::INFINITY),
            incumbent: self.incumbent,
            global_dual_bound,
            root_bound: self.root_bound,
            root_integral: self.root_integral,
            nodes_processed: self.nodes_processed,
            nodes_created: self.next_id,
            bpb_node: self.bpb_node,
            bpb_nodes: self.bpb_nodes,
            bpb_time: self.bpb_time,
            solve_time: self.clock.elapsed(),
            lp_iterations: self.clock.iterations(),
            event_log: self.events,
            trace: self.trace,
            bpb_history: self.bpb_history,
        })
    }

    fn select(&mut self) -> OpenNode {
        self.selector.plunge.pb = self.pb;
        self.selector.plunge.db = self.dual_bound().unwrap_or(f64::NEG_INFINITY);
        let views: Vec<QueuedView> = self.queue.iter().map(|n| n.view).collect();
        let idx = self.selector.select(&views).expect("queue is nonempty");
        if self.opts.trace == TraceLevel::Full {
            let ctx = self.tree_context();
            let plunge = self.selector.plunge;
            let trace = self.trace.as_mut().expect("full trace");
            let index = trace.selections.len();
            trace.selections.push(SelectionRecord {
                index,
                queue: views.iter().map(|v| v.id).collect(),
                selected: views[idx].id,
                ctx,
                plunge,
            });
        }
        let node = self.queue.remove(idx);
        self.active_bound = Some(node.view.lower_bound);
        self.selector.plunge.advance(&node.view);
        self.log(EventKind::Selected, node.view.id, node.view.depth);
        node
    }

    fn prune_open(&mut self) {
        let tol = self.tol();
        let pruned = bound_and_prune(&mut self.queue, self.pb, |n| n.view.lower_bound, tol);
        for n in pruned {
            self.log(EventKind::Pruned, n.view.id, n.view.depth);
        }
    }

    fn solve_box(&mut self, lb: &[f64], ub: &[f64]) -> Result<LpResult> {
        let res = self.model.solve(lb, ub)?;
        self.clock.charge(res.iterations);
        Ok(res)
    }

    fn finish_node(&mut self) {
        self.active_bound = None;
    }

    fn process(&mut self, mut node: OpenNode) -> Result<()> {
        let id = node.view.id;
        let depth = node.view.depth;
        let tol = self.tol();
        if let Some(pb) = self.pb {
            if node.view.lower_bound >= pb - tol {
                self.finish_node();
                self.log(EventKind::Pruned, id, depth);
                return Ok(());
            }
        }
        let parent = node.view.parent;
        self.focus = Some(Focus { id, parent });
        self.nodes_processed += 1;

        let (lp, basis) = match (node.lp.take(), node.basis.take()) {
            (Some(lp), Some(basis)) => (lp, Some(basis)),
            (Some(lp), None) if !self.opts.warm_start => (lp, None),
            _ => {
                let (lp, basis) = if self.opts.warm_start {
                    self.model.solve_with_basis(&node.lb, &node.ub)?
                } else {
                    (self.model.solve(&node.lb, &node.ub)?, None)
                };
                self.clock.charge(lp.iterations);
                (lp, basis)
            }
        };
        if !lp.is_optimal() {
            if lp.status == LpStatus::Unbounded {
                return Err(Error::invalid(format!(
                    "LP relaxation of node {id} is unbounded; bounded variables are required"
                )));
            }
            self.log(EventKind::NodeSolved, id, depth);
            self.finish_node();
            self.log(EventKind::Pruned, id, depth);
            return Ok(());
        }
        let bound = lp.objective.max(node.view.lower_bound);
        if id == 0 {
            self.root_bound = bound;
            self.root_integral = lp.num_fractional == 0;
        }
        if let Some(rec) = self.node_record_mut(id) {
            rec.lp_objective = Some(lp.objective);
        }
        self.active_bound = Some(bound);
        self.log(EventKind::NodeSolved, id, depth);

        if self.pb.is_some_and(|pb| bound >= pb - tol) {
            self.finish_node();
            self.log(EventKind::Pruned, id, depth);
            return Ok(());
        }
        if lp.num_fractional == 0 {
            self.try_incumbent(&lp.x, id, &node.history)?;
            self.finish_node();
            return Ok(());
        }

        let candidates =
            fractional_candidates(&lp.x, &self.inst.is_integer, self.opts.tol.integrality);
        let fsb = branch_full_strong(
            &self.model,
            &mut node.lb,
            &mut node.ub,
            lp,
            basis,
            &candidates,
            &self.inst.is_integer,
            &mut self.table,
        )?;
        self.clock.charge(fsb.iterations);
        if let Some(rec) = self.node_record_mut(id) {
            rec.tightenings = fsb.tightenings.clone();
        }
        let node_lp = fsb.node_lp;
        match fsb.outcome {
            FsbOutcome::Prune => {
                self.finish_node();
                self.log(EventKind::Pruned, id, depth);
                Ok(())
            }
            FsbOutcome::Integral => {
                let bound = node_lp.objective.max(bound);
                self.active_bound = Some(bound);
                if self.pb.is_some_and(|pb| bound >= pb - tol) {
                    self.finish_node();
                    self.log(EventKind::Pruned, id, depth);
                } else {
                    self.try_incumbent(&node_lp.x, id, &node.history)?;
                    self.finish_node();
                }
                Ok(())
            }
            FsbOutcome::Branch(choice) => {
                let bound = node_lp.objective.max(bound);
                self.active_bound = Some(bound);
                if self.pb.is_some_and(|pb| bound >= pb - tol) {
                    self.finish_node();
                    self.log(EventKind::Pruned, id, depth);
                    return Ok(());
                }
                self.branch(node, bound, node_lp.num_fractional, choice, fsb.child_bases)
            }
        }
    }

    fn branch(
        &mut self,
        node: OpenNode,
        bound: f64,
        parent_num_fractional: usize,
        choice: StrongBranch,
        bases: [Option<WarmStart>; 2],
    ) -> Result<()> {
        let parent_id = node.view.id;
        let depth = node.view.depth + 1;
        self.max_depth = self.max_depth.max(depth);
        let var = choice.var;
        let (lo, hi) = (choice.value.floor(), choice.value.ceil());
        let int_tol = self.opts.tol.integrality;
        let full = self.opts.trace == TraceLevel::Full;

        if let Some(rec) = self.node_record_mut(parent_id) {
            rec.branched_on = Some(var);
        }

        let down_id = self.alloc_id();
        let up_id = self.alloc_id();
        let mut children = Vec::with_capacity(2);
        let [down_basis, up_basis] = bases;
        for (id, sibling, dir, probe, basis) in [
            (down_id, up_id, Direction::Down, choice.down, down_basis),
            (up_id, down_id, Direction::Up, choice.up, up_basis),
        ] {
            let mut lb = node.lb.clone();
            let mut ub = node.ub.clone();
            let imposed = match dir {
                Direction::Down => {
                    ub[var] = lo;
                    lo
                }
                Direction::Up => {
                    lb[var] = hi;
                    hi
                }
            };
            let lower_bound = probe.objective.max(bound);
            let estimate = node_estimate(
                lower_bound,
                &probe.x,
                &self.inst.is_integer,
                &self.table,
                int_tol,
            );
            let input = NodeFeatureInput {
                id,
                parent: Some(parent_id),
                depth,
                lower_bound,
                estimate,
                branch: Some(BranchInfo {
                    var,
                    dir,
                    bound: imposed,
                    parent_value: choice.value,
                }),
                parent_num_fractional,
            };
            let history = node.history.extended(Decision {
                var,
                dir,
                bound: imposed,
            });
            children.push((input, sibling, lb, ub, (probe, basis), history));
        }

        // children are described relative to their parent as the focus
        let ctx = {
            let mut ctx = self.tree_context();
            let child_min = children
                .iter()
                .map(|c| c.0.lower_bound)
                .fold(f64::INFINITY, f64::min);
            let queue_min = self
                .queue
                .iter()
                .map(|n| n.view.lower_bound)
                .fold(f64::INFINITY, f64::min);
            ctx.db = child_min.min(queue_min);
            if let Some(pb) = self.pb {
                ctx.db = ctx.db.min(pb);
            }
            ctx
        };
        let feats: Vec<(FeatureVector, (f64, f64))> = children
            .iter()
            .map(|c| {
                let psi = (
                    self.table.get(var, c.0.branch.unwrap().dir),
                    self.table.get(var, c.0.branch.unwrap().dir.opposite()),
                );
                (extract_features_with(&c.0, &ctx, psi.0, psi.1), psi)
            })
            .collect();
        let scores = match &self.scorer {
            Some(s) => {
                let (a, b) = s.score_pair(&feats[0].0, &feats[1].0)?;
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "scorer returned ({a}, {b}) for children of node {parent_id}"
                    )));
                }
                [Some(a), Some(b)]
            }
            None => [None, None],
        };

        self.finish_node();
        for (k, (input, sibling, lb, ub, (probe, basis), history)) in children.into_iter().enumerate() {
            self.record_node(NodeRecord {
                input,
                sibling: Some(sibling),
                history: history.clone(),
                pseudocosts: feats[k].1,
                creation_features: feats[k].0,
                score: scores[k],
                local_lb: full.then(|| lb.clone()),
                local_ub: full.then(|| ub.clone()),
                tightenings: Vec::new(),
                lp_objective: None,
                branched_on: None,
            });
            self.queue.push(OpenNode {
                view: QueuedView {
                    id: input.id,
                    parent: input.parent,
                    depth: input.depth,
                    lower_bound: input.lower_bound,
                    estimate: input.estimate,
                    score: scores[k],
                },
                lb,
                ub,
                lp: Some(probe),
                basis,
                history,
            });
        }
        self.log(EventKind::Branched, parent_id, depth - 1);
        Ok(())
    }

    /// Accepts `x` as the new incumbent if its polished objective improves.
    fn try_incumbent(&mut self, x: &[f64], id: usize, history: &BranchHistory) -> Result<()> {
        let Some((point, value)) = self.polish(x)? else {
            return Ok(());
        };
        if self.pb.is_none_or(|pb| value < pb - self.tol()) {
            self.pb = Some(value);
            self.incumbent = Some(point);
            self.bpb_node = Some(id);
            self.bpb_nodes = self.nodes_processed;
            self.bpb_time = self.clock.elapsed();
            self.bpb_history = Some(history.clone());
            let depth = history.len();
            self.log(EventKind::Incumbent, id, depth);
            self.prune_open();
        }
        Ok(())
    }

    /// Rounds the integer variables and re-optimizes the continuous ones with
    /// the integers fixed, so equal integer assignments give equal objectives.
    fn polish(&mut self, x: &[f64]) -> Result<Option<(Vec<f64>, f64)>> {
        let inst = self.inst;
        let mut point: Vec<f64> = x
            .iter()
            .zip(&inst.is_integer)
            .map(|(&v, &int)| if int { v.round() } else { v })
            .collect();
        if self.num_integer < inst.num_vars {
            let mut lb = inst.var_lb.clone();
            let mut ub = inst.var_ub.clone();
            for j in 0..inst.num_vars {
                if inst.is_integer[j] {
                    lb[j] = point[j];
                    ub[j] = point[j];
                }
            }
            let fixed = self.solve_box(&lb, &ub)?;
            if !fixed.is_optimal() {
                return Ok(None);
            }
            point = fixed.x;
        }
        if inst.max_violation(&point) > self.opts.tol.feasibility * 10.0 {
            return Ok(None);
        }
        let value = inst.objective_value(&point);
        Ok(Some((point, value)))
    }
}

#[cfg(test)]
mod tests;
