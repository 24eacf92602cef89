//! Homology-class invariants of cycles in R^D punctured by closed obstacle
//! skeletons, and homology-aware graph search built on them.

pub mod combinatorics;
pub mod invariant;
pub mod lowdim;
pub mod mesh;
pub mod planner;
pub mod quadrature;
pub mod quotient;
