//! Classes of trajectories relative to a subspace L: paths that end in L
//! are identified when their signatures differ by an element of the lattice
//! Q of cycle signatures inside L.

mod lattice;
mod search;

use thiserror::Error;

use crate::planner::PlannerError;

pub use lattice::{q_membership, QLattice, DEFAULT_EPS_Q};
pub use search::{
    auto_q, connected_quotient_search, quotient_augmented_search, QuotientClass, QuotientConfig,
    QuotientOutcome, Subspace,
};

#[derive(Debug, Error, Clone)]
pub enum QuotientError {
    #[error("vector has {found} entries, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("generator {index} has non-integral signature {values:?}")]
    NotIntegral { index: usize, values: Vec<f64> },
    #[error("integer overflow while reducing the lattice basis")]
    Overflow,
    #[error("goal vertex is not in L")]
    GoalOutsideL,
    #[error("start vertex lies inside L away from its boundary")]
    StartInsideL,
    #[error("L is not reachable from the start")]
    LUnreachable,
    #[error("the goal's component of L has no boundary vertices")]
    EmptyBoundary,
    #[error(transparent)]
    Planner(#[from] PlannerError),
}
