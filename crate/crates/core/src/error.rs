use alloc::string::String;
use alloc::vec::Vec;

use crate::pattern::Violation;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("pattern is invalid ({} violation(s)): {}", .0.len(), first_violation(.0))]
    InvalidPattern(Vec<Violation>),

    #[error("panel `{panel}` has zero area")]
    DegeneratePanel { panel: String },

    #[error("shape mismatch for {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("assignment needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("numerical failure: {0}")]
    Numerical(&'static str),

    #[error("ground truth references node {node} but the graph has {count} nodes")]
    NodeOutOfRange { node: usize, count: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("panels `{a}` and `{b}` are not mergeable")]
    NotMergeable { a: String, b: String },

    #[error("merge failed: {0}")]
    MergeFailed(&'static str),

    #[error("stitch references edge {edge} of panel `{panel}` which was absorbed into a merged seam")]
    OrphanedStitch { panel: String, edge: usize },
}

fn first_violation(v: &[Violation]) -> String {
    use alloc::string::ToString;
    v.first().map(|x| x.to_string()).unwrap_or_default()
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}
