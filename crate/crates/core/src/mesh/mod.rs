//! Embedded simplicial chains in R^D.
//!
//! A [`Chain`] is a formal integer combination of oriented linear simplices.
//! Candidate cycles and obstacle skeletons are both chains; the samplers in
//! [`sample`] discretize spheres, tori and loops into closed chains.

mod chain;
pub mod geometry;
pub mod sample;
pub mod text;
mod validate;

pub use chain::{Chain, Point, Simplex};
pub use validate::{validate_skeleton_set, SkeletonSet, ValidationReport, Violation};

use thiserror::Error;

/// Default clearance below which two sets are considered touching.
pub const DEFAULT_SINGULAR_EPS: f64 = 1e-6;

/// Relative volume threshold for affine independence: a k-simplex is
/// degenerate when its k-volume is below `DEGENERACY_RATIO * diam^k`.
pub const DEGENERACY_RATIO: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("simplex has {found} vertices, expected {expected}")]
    VertexCount { expected: usize, found: usize },
    #[error("point has dimension {found}, expected {expected}")]
    PointDimension { expected: usize, found: usize },
    #[error("non-finite coordinate in point {0:?}")]
    NonFinite(Vec<f64>),
    #[error("degenerate simplex (vertices not affinely independent)")]
    Degenerate,
    #[error("zero coefficient in chain")]
    ZeroCoefficient,
    #[error("boundary of a 0-chain is undefined")]
    BoundaryOfPoints,
    #[error("ambient dimension {found} too small, need at least {required}")]
    AmbientTooSmall { required: usize, found: usize },
    #[error("axis {axis} out of range for ambient dimension {ambient}")]
    AxisOutOfRange { axis: usize, ambient: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("duplicate consecutive points at index {0}")]
    DuplicatePoint(usize),
    #[error("mesh text line {line}: {message}")]
    Parse { line: usize, message: String },
}
