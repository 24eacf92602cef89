use std::path::Path;

use homolink_core::mesh::Violation;
use homolink_core::quadrature::QuadStats;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultBundle {
    pub schema_version: u32,
    pub command: String,
    pub scenario: String,
    pub skeletons: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub signatures: Vec<CandidateSignature>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<ClassRecord>,
    /// Hermite basis of Q, for quotient runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationSummary>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSignature {
    pub label: String,
    pub values: Vec<f64>,
    pub nearest_integers: Vec<i64>,
    pub max_integer_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassRecord {
    pub rank: usize,
    pub signature: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue: Option<Vec<i64>>,
    pub cost: f64,
    pub vertices: Vec<u32>,
    pub path: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationSummary {
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub closed_form: Vec<ClosedFormCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedFormCheck {
    pub skeleton: String,
    pub kind: String,
    pub points: usize,
    pub max_relative_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    pub quadrature: QuadStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expansions: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhausted: Option<bool>,
}

impl ResultBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// One row per path vertex: rank, step, then coordinates.
    pub fn paths_csv(&self) -> String {
        let d = self
            .classes
            .iter()
            .flat_map(|c| c.path.first())
            .map(Vec::len)
            .next()
            .unwrap_or(0);
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["rank".to_string(), "step".to_string()];
        header.extend((0..d).map(|i| format!("x{i}")));
        w.write_record(&header).expect("in-memory write");
        for c in &self.classes {
            for (step, p) in c.path.iter().enumerate() {
                let mut row = vec![c.rank.to_string(), step.to_string()];
                row.extend(p.iter().map(|x| format!("{x:?}")));
                w.write_record(&row).expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
