//! Scenario files, result bundles, plots and the `homolink` command.

pub mod results;
pub mod run;
pub mod scenario;
pub mod svg;

use std::path::PathBuf;

use homolink_core::invariant::EngineError;
use homolink_core::mesh::{MeshError, Violation};
use homolink_core::planner::PlannerError;
use homolink_core::quotient::QuotientError;
use thiserror::Error;

pub use run::{run, Command, RunOptions};
pub use scenario::{parse_scenario, Scenario};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Semantic { path: String, message: String },
    #[error("{}: {message}", .path.display())]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error("validation failed:\n{}", list(.0))]
    Validation(Vec<String>),
    #[error("{0}")]
    Usage(String),
}

fn list(items: &[String]) -> String {
    items
        .iter()
        .map(|s| format!("  - {s}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl From<Vec<Violation>> for CliError {
    fn from(v: Vec<Violation>) -> Self {
        CliError::Validation(v.iter().map(|x| x.to_string()).collect())
    }
}

impl CliError {
    /// Process exit status: 2 for invalid input geometry, 3 for a
    /// singular-proximity abort, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Engine(EngineError::SingularProximity { .. }) => 3,
            CliError::Planner(e) if e.is_singular() => 3,
            CliError::Quotient(QuotientError::Planner(e)) if e.is_singular() => 3,
            _ => 1,
        }
    }
}
