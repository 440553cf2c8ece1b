//! Fixed-width node descriptions fed to the learned scorer.
//!
//! Layout (schema version 1):
//!
//! | idx | name                  | definition |
//! |-----|-----------------------|------------|
//! | 0   | node_lowerbound_rel   | `(lb - db_root) / max(1, |db_root|)` |
//! | 1   | node_estimate_rel     | `(estimate - db_root) / max(1, |db_root|)` |
//! | 2   | node_depth_rel        | `depth / max(1, max depth so far)` |
//! | 3-5 | node_type             | one-hot child / sibling / other leaf |
//! | 6   | branch_frac           | fractional part of the branching variable at the parent |
//! | 7   | branch_bound_lp_diff  | `|imposed bound - parent LP value|` |
//! | 8   | pseudocost_dir        | pseudocost of the branching variable, branched direction |
//! | 9   | pseudocost_other      | pseudocost in the opposite direction |
//! | 10  | has_incumbent         | 0 / 1 |
//! | 11  | rel_gap               | `(pb - db) / max(|pb|, |db|, 1)`, 1 without incumbent |
//! | 12  | parent_frac_count_rel | parent's fractional count / integer variable count |
//! | 13  | lb_minus_db_rel       | `(lb - db) / max(1, pb - db)` clipped to `[0, 10]`, or `(lb - db) / max(1, |db|)` without incumbent |

use serde::{Deserialize, Serialize};

use crate::bnb::{Direction, PseudocostTable};
use crate::error::{Error, Result};

pub const FEATURE_DIM: usize = 14;
pub const FEATURE_SCHEMA_VERSION: u32 = 1;

pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "node_lowerbound_rel",
    "node_estimate_rel",
    "node_depth_rel",
    "node_type_child",
    "node_type_sibling",
    "node_type_other",
    "branch_frac",
    "branch_bound_lp_diff",
    "pseudocost_dir",
    "pseudocost_other",
    "has_incumbent",
    "rel_gap",
    "parent_frac_count_rel",
    "lb_minus_db_rel",
];

/// Heuristic node-selection rule features and the vector fields that carry them.
pub const HEURISTIC_FEATURE_MAP: [(&str, &[usize]); 6] = [
    ("Node_Lowerbound", &[0]),
    ("Node_Estimate", &[1]),
    ("Node_Depth", &[2]),
    ("Node_Type", &[3, 4, 5]),
    ("BranchVar_BoundLPDiff", &[7]),
    ("BranchVar_Pseudocost", &[8, 9]),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; FEATURE_DIM]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeType {
    Child,
    Sibling,
    OtherLeaf,
}

/// The branching decision that created a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchInfo {
    pub var: usize,
    pub dir: Direction,
    /// New bound imposed on `var`.
    pub bound: f64,
    /// Value of `var` in the parent's LP solution.
    pub parent_value: f64,
}

impl BranchInfo {
    pub fn frac(&self) -> f64 {
        self.parent_value - self.parent_value.floor()
    }
}

/// Per-node data the extractor needs; fixed once the node exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeFeatureInput {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub lower_bound: f64,
    pub estimate: f64,
    pub branch: Option<BranchInfo>,
    pub parent_num_fractional: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Focus {
    pub id: usize,
    pub parent: Option<usize>,
}

/// Search-tree state at extraction time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeContext {
    /// Incumbent objective (minimization form).
    pub pb: Option<f64>,
    /// Global dual bound.
    pub db: f64,
    /// Root LP bound.
    pub db_root: f64,
    pub max_depth: usize,
    /// Node processed last; `None` before the root is processed.
    pub focus: Option<Focus>,
    pub num_integer: usize,
}

pub fn node_type(node: &NodeFeatureInput, ctx: &TreeContext) -> NodeType {
    match ctx.focus {
        Some(f) if node.parent == Some(f.id) => NodeType::Child,
        Some(f) if node.parent.is_some() && node.parent == f.parent => NodeType::Sibling,
        _ => NodeType::OtherLeaf,
    }
}

/// Extracts the feature vector, looking up pseudocosts in `table`.
pub fn extract_features(
    node: &NodeFeatureInput,
    ctx: &TreeContext,
    table: &PseudocostTable,
) -> FeatureVector {
    let (dir, other) = match node.branch {
        Some(b) => (table.get(b.var, b.dir), table.get(b.var, b.dir.opposite())),
        None => (1.0, 1.0),
    };
    extract_features_with(node, ctx, dir, other)
}

/// Extraction with explicit pseudocosts for the branching variable.
pub fn extract_features_with(
    node: &NodeFeatureInput,
    ctx: &TreeContext,
    pseudocost_dir: f64,
    pseudocost_other: f64,
) -> FeatureVector {
    let root_scale = ctx.db_root.abs().max(1.0);
    let mut f = [0.0; FEATURE_DIM];
    f[0] = (node.lower_bound - ctx.db_root) / root_scale;
    f[1] = (node.estimate - ctx.db_root) / root_scale;
    f[2] = (node.depth as f64 / ctx.max_depth.max(1) as f64).clamp(0.0, 1.0);
    match node_type(node, ctx) {
        NodeType::Child => f[3] = 1.0,
        NodeType::Sibling => f[4] = 1.0,
        NodeType::OtherLeaf => f[5] = 1.0,
    }
    if let Some(b) = node.branch {
        f[6] = b.frac();
        f[7] = (b.bound - b.parent_value).abs();
    }
    f[8] = pseudocost_dir;
    f[9] = pseudocost_other;
    match ctx.pb {
        Some(pb) => {
            f[10] = 1.0;
            let scale = pb.abs().max(ctx.db.abs()).max(1.0);
            f[11] = ((pb - ctx.db) / scale).clamp(0.0, 1.0);
            f[13] = ((node.lower_bound - ctx.db) / (pb - ctx.db).max(1.0)).clamp(0.0, 10.0);
        }
        None => {
            f[11] = 1.0;
            f[13] = ((node.lower_bound - ctx.db) / ctx.db.abs().max(1.0)).clamp(0.0, 10.0);
        }
    }
    f[12] = (node.parent_num_fractional as f64 / ctx.num_integer.max(1) as f64).clamp(0.0, 1.0);
    for v in f.iter_mut() {
        if !v.is_finite() {
            *v = 0.0;
        }
    }
    FeatureVector(f)
}

/// Per-feature standardization statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub const STD_FLOOR: f64 = 1e-6;

impl NormStats {
    pub fn identity() -> Self {
        NormStats {
            mean: vec![0.0; FEATURE_DIM],
            std: vec![1.0; FEATURE_DIM],
        }
    }

    pub fn check_dim(&self) -> Result<()> {
        if self.mean.len() != FEATURE_DIM || self.std.len() != FEATURE_DIM {
            return Err(Error::invalid(format!(
                "normalization statistics have {}/{} entries, expected {FEATURE_DIM}",
                self.mean.len(),
                self.std.len()
            )));
        }
        if self.std.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::invalid("normalization std must be positive"));
        }
        Ok(())
    }
}

/// Mean and population standard deviation of each feature, std floored at
/// [`STD_FLOOR`].
pub fn fit_norm_stats<'a>(data: impl IntoIterator<Item = &'a FeatureVector>) -> NormStats {
    let mut count = 0usize;
    let mut mean = [0.0; FEATURE_DIM];
    let mut m2 = [0.0; FEATURE_DIM];
    // Welford
    for v in data {
        count += 1;
        for k in 0..FEATURE_DIM {
            let delta = v.0[k] - mean[k];
            mean[k] += delta / count as f64;
            m2[k] += delta * (v.0[k] - mean[k]);
        }
    }
    if count == 0 {
        return NormStats::identity();
    }
    NormStats {
        mean: mean.to_vec(),
        std: m2
            .iter()
            .map(|s| (s / count as f64).sqrt().max(STD_FLOOR))
            .collect(),
    }
}

pub fn standardize(v: &FeatureVector, stats: &NormStats) -> Result<FeatureVector> {
    stats.check_dim()?;
    let mut out = [0.0; FEATURE_DIM];
    for k in 0..FEATURE_DIM {
        out[k] = (v.0[k] - stats.mean[k]) / stats.std[k];
    }
    Ok(FeatureVector(out))
}
