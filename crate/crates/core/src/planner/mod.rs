//! Grid graphs, per-edge signatures and the homology-augmented search.

mod candidates;
mod edges;
pub mod grid;
pub(crate) mod search;

use thiserror::Error;

use crate::invariant::EngineError;

pub use candidates::next_class_candidates;
pub use edges::{edge_signatures, EdgeSignatureCache};
pub use grid::{build_grid_graph, build_grid_graph_with, BoxRegion, GridGraph, GridSpec, Step};
pub use search::{
    augmented_search, ClassResult, Heuristic, SearchConfig, SearchMode, SearchOutcome,
};

/// Default integer-classification tolerance.
pub const DEFAULT_EPS_INT: f64 = 0.05;
/// Default augmented-vertex equality tolerance, `10 · ε_int`.
pub const DEFAULT_EPS_KEY: f64 = 0.5;
/// Default cap on augmented-vertex expansions.
pub const DEFAULT_BUDGET: u64 = 5_000_000;

#[derive(Debug, Error, Clone)]
pub enum PlannerError {
    #[error("invalid grid: {0}")]
    Spec(String),
    #[error("point {0:?} lies in a blocked cell")]
    Blocked(Vec<f64>),
    #[error("point {0:?} lies outside the grid bounds")]
    OutOfBounds(Vec<f64>),
    #[error("edge {edge} from {from:?} to {to:?}: {source}")]
    EdgeSingular {
        edge: u32,
        from: Vec<f64>,
        to: Vec<f64>,
        source: EngineError,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("no path from start to goal")]
    NoPath,
    #[error("expansion budget of {budget} exhausted after {} classes", .found.len())]
    BudgetExceeded {
        budget: u64,
        found: Vec<ClassResult>,
    },
    #[error("target class not reached within {budget} expansions")]
    TargetUnreachable { budget: u64 },
    #[error("target class not reachable: search space exhausted")]
    TargetAbsent,
}

impl PlannerError {
    pub fn is_singular(&self) -> bool {
        matches!(
            self,
            PlannerError::EdgeSingular { .. }
                | PlannerError::Engine(EngineError::SingularProximity { .. })
        )
    }
}
