//! Node-selection policies as priority functions. The queue always pops the
//! node with the greatest [`SelectorPriority`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Scores the two children created by one branching step.
pub trait PairScorer: Send + Sync {
    fn score_pair(&self, a: &FeatureVector, b: &FeatureVector) -> Result<(f64, f64)>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectorKind {
    Dfs,
    Bfs,
    Bes,
    Learned,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 4] = [
        SelectorKind::Dfs,
        SelectorKind::Bfs,
        SelectorKind::Bes,
        SelectorKind::Learned,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SelectorKind::Dfs => "dfs",
            SelectorKind::Bfs => "bfs",
            SelectorKind::Bes => "bes",
            SelectorKind::Learned => "learned",
        }
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SelectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dfs" => Ok(SelectorKind::Dfs),
            "bfs" => Ok(SelectorKind::Bfs),
            "bes" => Ok(SelectorKind::Bes),
            "learned" => Ok(SelectorKind::Learned),
            other => Err(Error::invalid(format!(
                "unknown selector `{other}` (expected dfs, bfs, bes or learned)"
            ))),
        }
    }
}

/// Total order used by the queue: preference tier, then policy key (larger
/// first), then lower bound (smaller first), then node id (smaller first).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SelectorPriority {
    /// Children of the focus node favoured by DFS or by plunging.
    pub preferred: bool,
    pub primary_key: f64,
    pub lower_bound: f64,
    pub id: usize,
}

impl Eq for SelectorPriority {}

impl Ord for SelectorPriority {
    fn cmp(&self, other: &Self) -> Ordering {
        self.preferred
            .cmp(&other.preferred)
            .then_with(|| self.primary_key.total_cmp(&other.primary_key))
            .then_with(|| other.lower_bound.total_cmp(&self.lower_bound))
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for SelectorPriority {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub const DEFAULT_MAX_PLUNGE_DEPTH: usize = 10;
pub const DEFAULT_PLUNGE_CUTOFF: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PlungeState {
    /// Node processed most recently.
    pub focus: Option<usize>,
    /// Consecutive child selections since the last jump elsewhere.
    pub depth: usize,
    pub max_plunge_depth: usize,
    pub cutoff_factor: f64,
    pub pb: Option<f64>,
    pub db: f64,
}

impl Default for PlungeState {
    fn default() -> Self {
        PlungeState {
            focus: None,
            depth: 0,
            max_plunge_depth: DEFAULT_MAX_PLUNGE_DEPTH,
            cutoff_factor: DEFAULT_PLUNGE_CUTOFF,
            pb: None,
            db: f64::NEG_INFINITY,
        }
    }
}

impl PlungeState {
    /// Records a selection; plunge depth grows while children of the focus are taken.
    pub fn advance(&mut self, selected: &QueuedView) {
        if self.focus.is_some() && selected.parent == self.focus {
            self.depth += 1;
        } else {
            self.depth = 0;
        }
        self.focus = Some(selected.id);
    }

    fn is_child(&self, node: &QueuedView) -> bool {
        self.focus.is_some() && node.parent == self.focus
    }

    fn plunge_eligible(&self, node: &QueuedView) -> bool {
        if !self.is_child(node) || self.depth >= self.max_plunge_depth {
            return false;
        }
        match self.pb {
            Some(pb) => node.estimate <= self.db + self.cutoff_factor * (pb - self.db),
            None => true,
        }
    }
}

/// What a selector sees of a queued node.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QueuedView {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub lower_bound: f64,
    pub estimate: f64,
    /// Learned pair score; absent for the root.
    pub score: Option<f64>,
}

pub fn priority_dfs(node: &QueuedView, plunge: &PlungeState) -> SelectorPriority {
    SelectorPriority {
        preferred: plunge.is_child(node),
        primary_key: node.depth as f64,
        lower_bound: node.lower_bound,
        id: node.id,
    }
}

pub fn priority_bfs(node: &QueuedView, plunge: &PlungeState) -> SelectorPriority {
    SelectorPriority {
        preferred: plunge.plunge_eligible(node),
        primary_key: -node.lower_bound,
        lower_bound: node.lower_bound,
        id: node.id,
    }
}

pub fn priority_bes(node: &QueuedView, plunge: &PlungeState) -> SelectorPriority {
    SelectorPriority {
        preferred: plunge.plunge_eligible(node),
        primary_key: -node.estimate,
        lower_bound: node.lower_bound,
        id: node.id,
    }
}

/// Learned priority: the static pair score; the root (no score) ranks first.
pub fn priority_learned(node: &QueuedView) -> SelectorPriority {
    SelectorPriority {
        preferred: false,
        primary_key: node.score.unwrap_or(f64::INFINITY),
        lower_bound: node.lower_bound,
        id: node.id,
    }
}

/// A node selector instance for one solve.
#[derive(Clone)]
pub struct Selector {
    pub kind: SelectorKind,
    pub plunge: PlungeState,
    scorer: Option<Arc<dyn PairScorer>>,
}

impl fmt::Debug for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Selector")
            .field("kind", &self.kind)
            .field("plunge", &self.plunge)
            .field("scorer", &self.scorer.is_some())
            .finish()
    }
}

impl Selector {
    /// Heuristic selector. Use [`Selector::learned`] for the learned policy.
    pub fn heuristic(kind: SelectorKind) -> Result<Self> {
        if kind == SelectorKind::Learned {
            return Err(Error::MissingModel(
                "the learned selector requires a trained model".into(),
            ));
        }
        Ok(Selector {
            kind,
            plunge: PlungeState::default(),
            scorer: None,
        })
    }

    pub fn learned(scorer: Arc<dyn PairScorer>) -> Self {
        Selector {
            kind: SelectorKind::Learned,
            plunge: PlungeState::default(),
            scorer: Some(scorer),
        }
    }

    pub fn scorer(&self) -> Option<&Arc<dyn PairScorer>> {
        self.scorer.as_ref()
    }

    pub fn priority(&self, node: &QueuedView) -> SelectorPriority {
        priority_of(self.kind, node, &self.plunge)
    }

    /// Index of the maximum-priority node in `queue`.
    pub fn select(&self, queue: &[QueuedView]) -> Option<usize> {
        queue
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| self.priority(a).cmp(&self.priority(b)))
            .map(|(i, _)| i)
    }
}

pub fn priority_of(kind: SelectorKind, node: &QueuedView, plunge: &PlungeState) -> SelectorPriority {
    match kind {
        SelectorKind::Dfs => priority_dfs(node, plunge),
        SelectorKind::Bfs => priority_bfs(node, plunge),
        SelectorKind::Bes => priority_bes(node, plunge),
        SelectorKind::Learned => priority_learned(node),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view(id: usize, parent: Option<usize>, depth: usize, lb: f64, est: f64) -> QueuedView {
        QueuedView {
            id,
            parent,
            depth,
            lower_bound: lb,
            estimate: est,
            score: None,
        }
    }

    fn focused(focus: usize) -> PlungeState {
        PlungeState {
            focus: Some(focus),
            ..PlungeState::default()
        }
    }

    fn pick(kind: SelectorKind, plunge: PlungeState, queue: &[QueuedView]) -> usize {
        let mut sel = Selector::heuristic(kind).unwrap();
        sel.plunge = plunge;
        queue[sel.select(queue).unwrap()].id
    }

    #[test]
    fn dfs_prefers_child_over_deeper_stranger() {
        let q = [view(10, Some(4), 5, 1.0, 1.0), view(11, Some(2), 9, 1.0, 1.0)];
        assert_eq!(pick(SelectorKind::Dfs, focused(4), &q), 10);
    }

    #[test]
    fn dfs_sibling_tie_goes_to_down_child() {
        let q = [view(12, Some(4), 5, 2.0, 2.0), view(13, Some(4), 5, 2.0, 2.0)];
        assert_eq!(pick(SelectorKind::Dfs, focused(4), &q), 12);
    }

    #[test]
    fn bfs_best_bound_and_tiebreak() {
        let q = [view(5, Some(1), 2, 4.0, 4.0), view(6, Some(2), 2, 3.0, 3.0)];
        assert_eq!(pick(SelectorKind::Bfs, PlungeState::default(), &q), 6);
        let q = [view(8, Some(1), 2, 3.0, 3.0), view(7, Some(2), 2, 3.0, 3.0)];
        assert_eq!(pick(SelectorKind::Bfs, PlungeState::default(), &q), 7);
    }

    #[test]
    fn bfs_plunges_into_child_within_cutoff() {
        let q = [view(5, Some(4), 3, 4.0, 4.0), view(6, Some(2), 2, 3.0, 3.0)];
        let mut p = focused(4);
        p.pb = Some(10.0);
        p.db = 3.0;
        // cutoff = 3 + 0.25 * 7 = 4.75 >= 4.0
        assert_eq!(pick(SelectorKind::Bfs, p, &q), 5);
        p.cutoff_factor = 0.1;
        assert_eq!(pick(SelectorKind::Bfs, p, &q), 6);
        p.cutoff_factor = 0.25;
        p.depth = p.max_plunge_depth;
        assert_eq!(pick(SelectorKind::Bfs, p, &q), 6);
    }

    #[test]
    fn bes_minimum_estimate() {
        let q = [view(1, Some(0), 1, 5.0, 7.1), view(2, Some(0), 1, 5.0, 6.9)];
        assert_eq!(pick(SelectorKind::Bes, PlungeState::default(), &q), 2);
        // integral sibling has estimate == bound
        let q = [view(1, Some(0), 1, 5.0, 5.0), view(2, Some(0), 1, 5.0, 5.4)];
        assert_eq!(pick(SelectorKind::Bes, PlungeState::default(), &q), 1);
    }

    #[test]
    fn learned_max_score_then_bound() {
        let mut a = view(1, Some(0), 1, 6.0, 6.0);
        let mut b = view(2, Some(0), 1, 5.0, 5.0);
        a.score = Some(0.91);
        b.score = Some(0.12);
        assert!(priority_learned(&a) > priority_learned(&b));
        a.score = Some(0.5);
        b.score = Some(0.5);
        assert!(priority_learned(&b) > priority_learned(&a));
        let root = view(0, None, 0, 0.0, 0.0);
        assert_eq!(priority_learned(&root).primary_key, f64::INFINITY);
    }

    #[test]
    fn learned_without_model_is_refused() {
        assert!(matches!(
            Selector::heuristic(SelectorKind::Learned),
            Err(Error::MissingModel(_))
        ));
    }

    #[test]
    fn plunge_depth_counts_consecutive_children() {
        let mut p = PlungeState::default();
        p.advance(&view(0, None, 0, 0.0, 0.0));
        p.advance(&view(1, Some(0), 1, 0.0, 0.0));
        p.advance(&view(3, Some(1), 2, 0.0, 0.0));
        assert_eq!(p.depth, 2);
        p.advance(&view(2, Some(0), 1, 0.0, 0.0));
        assert_eq!(p.depth, 0);
    }
}
