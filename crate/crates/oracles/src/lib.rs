//! Brute-force reference implementations for tests. Nothing here calls the
//! solver it checks; `boundlab` types are used only as data.

pub mod enumerate;
pub mod lp;
pub mod replay;

pub use enumerate::{enumerate_binary_optimum, EnumerationResult, DEFAULT_MAX_BINARIES};
pub use lp::{tableau_simplex, vertex_enumeration, DenseLp, LpOutcome, MAX_VERTEX_VARS};
pub use replay::{
    dfs_stack_order, replay_selection_oracle, snapshots_from_trace, LoggedNode, QueueSnapshot, Rule,
    SelectorSpec,
};

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    TooLarge { what: &'static str, limit: usize, found: usize },
    Unsupported(String),
    IncompleteLog(String),
}

impl std::fmt::Display for OracleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleError::TooLarge { what, limit, found } => {
                write!(f, "refused: {found} {what} exceeds the limit of {limit}")
            }
            OracleError::Unsupported(m) => write!(f, "unsupported: {m}"),
            OracleError::IncompleteLog(m) => write!(f, "incomplete log: {m}"),
        }
    }
}

impl std::error::Error for OracleError {}
