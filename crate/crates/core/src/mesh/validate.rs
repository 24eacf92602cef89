use std::fmt;

use serde::{Deserialize, Serialize};

use super::geometry::chain_distance;
use super::Chain;

/// Disjoint union of closed skeleton chains, one per obstacle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonSet {
    pub skeletons: Vec<Chain>,
    pub labels: Vec<String>,
}

impl SkeletonSet {
    pub fn new(skeletons: Vec<Chain>, labels: Vec<String>) -> Self {
        SkeletonSet { skeletons, labels }
    }

    /// Labels default to `S1`, `S2`, ...
    pub fn unlabeled(skeletons: Vec<Chain>) -> Self {
        let labels = (1..=skeletons.len()).map(|i| format!("S{i}")).collect();
        SkeletonSet { skeletons, labels }
    }

    pub fn len(&self) -> usize {
        self.skeletons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.skeletons.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        self.labels.get(i).map(String::as_str).unwrap_or("?")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    LabelCount {
        skeletons: usize,
        labels: usize,
    },
    Empty {
        label: String,
    },
    AmbientDimension {
        label: String,
        expected: usize,
        found: usize,
    },
    Dimension {
        label: String,
        expected: usize,
        found: usize,
    },
    NotACycle {
        label: String,
        boundary_terms: usize,
    },
    NotDisjoint {
        a: String,
        b: String,
        distance: f64,
    },
    BadCodimension {
        ambient: usize,
        codim: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LabelCount { skeletons, labels } => {
                write!(f, "{skeletons} skeletons but {labels} labels")
            }
            Violation::Empty { label } => write!(f, "skeleton {label} is empty"),
            Violation::AmbientDimension {
                label,
                expected,
                found,
            } => write!(
                f,
                "skeleton {label} lives in R^{found}, expected R^{expected}"
            ),
            Violation::Dimension {
                label,
                expected,
                found,
            } => write!(
                f,
                "skeleton {label} has dimension {found}, expected {expected}"
            ),
            Violation::NotACycle {
                label,
                boundary_terms,
            } => write!(
                f,
                "skeleton {label} is not a cycle ({boundary_terms} boundary terms)"
            ),
            Violation::NotDisjoint { a, b, distance } => {
                write!(
                    f,
                    "skeletons {a} and {b} are not disjoint (distance {distance:e})"
                )
            }
            Violation::BadCodimension { ambient, codim } => {
                write!(f, "codimension {codim} invalid in R^{ambient}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every skeleton is a closed `(d - n)`-chain in R^d and that
/// distinct skeletons stay more than `eps_sing` apart.
pub fn validate_skeleton_set(
    s: &SkeletonSet,
    d: usize,
    n: usize,
    eps_sing: f64,
) -> ValidationReport {
    let mut v = Vec::new();
    if n < 2 || n > d {
        v.push(Violation::BadCodimension {
            ambient: d,
            codim: n,
        });
        return ValidationReport { violations: v };
    }
    if s.labels.len() != s.skeletons.len() {
        v.push(Violation::LabelCount {
            skeletons: s.skeletons.len(),
            labels: s.labels.len(),
        });
    }
    let mut usable = vec![true; s.len()];
    for (i, c) in s.skeletons.iter().enumerate() {
        let label = s.label(i).to_string();
        if c.is_empty() {
            v.push(Violation::Empty { label });
            usable[i] = false;
            continue;
        }
        if c.ambient() != d {
            v.push(Violation::AmbientDimension {
                label: label.clone(),
                expected: d,
                found: c.ambient(),
            });
            usable[i] = false;
        }
        if c.dim() != d - n {
            v.push(Violation::Dimension {
                label: label.clone(),
                expected: d - n,
                found: c.dim(),
            });
        }
        if c.dim() > 0 {
            let b = c.boundary().map(|b| b.len()).unwrap_or(0);
            if b > 0 {
                v.push(Violation::NotACycle {
                    label,
                    boundary_terms: b,
                });
            }
        }
    }
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if !usable[i] || !usable[j] {
                continue;
            }
            let dist = chain_distance(&s.skeletons[i], &s.skeletons[j]);
            if dist <= eps_sing {
                v.push(Violation::NotDisjoint {
                    a: s.label(i).to_string(),
                    b: s.label(j).to_string(),
                    distance: dist,
                });
            }
        }
    }
    ValidationReport { violations: v }
}
