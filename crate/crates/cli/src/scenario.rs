use std::path::{Path, PathBuf};

use homolink_core::mesh::sample::{
    sample_circle, sample_polyline_loop, sample_sphere, sample_torus, Embedding, Orientation,
};
use homolink_core::mesh::text::read_chain;
use homolink_core::mesh::{Chain, Point, Simplex, SkeletonSet};
use homolink_core::planner::{
    BoxRegion, GridSpec, Heuristic, SearchConfig, DEFAULT_BUDGET, DEFAULT_EPS_INT, DEFAULT_EPS_KEY,
};
use homolink_core::quadrature::QuadConfig;
use homolink_core::quotient::{QuotientConfig, DEFAULT_EPS_Q};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// One scene description. See `schema/scenario.schema.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub skeletons: Vec<ShapeSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<ShapeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace: Option<SubspaceSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Worker threads; 0 uses the available parallelism.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub seed: u64,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Mode {
    Enumerate(usize),
    Target(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceSpec {
    /// Cells whose centers fall in one of these boxes belong to L.
    #[serde(default)]
    pub boxes: Vec<BoxRegion>,
    /// Explicit cell indices belonging to L.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<Vec<usize>>,
    /// Closed loops inside L whose signatures generate Q.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<Vec<Vec<f64>>>,
    /// Take Q from the cycle space of the L-subgraph instead.
    #[serde(default)]
    pub auto: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub eps_int: f64,
    pub eps_key: f64,
    pub eps_sing: f64,
    pub eps_q: f64,
    pub quad_order: usize,
    pub max_depth: usize,
    pub split_ratio: f64,
    pub budget: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let q = QuadConfig::default();
        Tolerances {
            eps_int: DEFAULT_EPS_INT,
            eps_key: DEFAULT_EPS_KEY,
            eps_sing: q.singular_eps,
            eps_q: DEFAULT_EPS_Q,
            quad_order: q.order,
            max_depth: q.max_depth,
            split_ratio: q.split_ratio,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl Tolerances {
    pub fn quad(&self) -> QuadConfig {
        QuadConfig {
            order: self.quad_order,
            max_depth: self.max_depth,
            split_ratio: self.split_ratio,
            singular_eps: self.eps_sing,
        }
    }

    pub fn search(&self) -> SearchConfig {
        SearchConfig {
            eps_key: self.eps_key,
            budget: self.budget,
            heuristic: Heuristic::EuclideanToGoal,
        }
    }

    pub fn quotient(&self) -> QuotientConfig {
        QuotientConfig {
            budget: self.budget,
            ..QuotientConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Point {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        at: Vec<f64>,
    },
    PolylineLoop {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        points: Vec<Vec<f64>>,
        #[serde(default = "yes")]
        closed: bool,
    },
    Circle {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        radius: f64,
        axes: Vec<usize>,
        origin: Vec<f64>,
        segments: usize,
        #[serde(default)]
        orientation: Orientation,
    },
    Sphere {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        radius: f64,
        axes: Vec<usize>,
        origin: Vec<f64>,
        resolution: [usize; 2],
        #[serde(default)]
        orientation: Orientation,
    },
    Torus {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
        axes: Vec<usize>,
        origin: Vec<f64>,
        resolution: [usize; 2],
        #[serde(default)]
        orientation: Orientation,
    },
    Mesh {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        file: PathBuf,
    },
}

fn yes() -> bool {
    true
}

impl ShapeSpec {
    pub fn label(&self) -> Option<&str> {
        match self {
            ShapeSpec::Point { label, .. }
            | ShapeSpec::PolylineLoop { label, .. }
            | ShapeSpec::Circle { label, .. }
            | ShapeSpec::Sphere { label, .. }
            | ShapeSpec::Torus { label, .. }
            | ShapeSpec::Mesh { label, .. } => label.as_deref(),
        }
    }

    /// Samples the shape as a chain in R^d. Mesh paths are relative to `base`.
    pub fn build(&self, d: usize, base: &Path) -> Result<Chain, CliError> {
        let chain = match self {
            ShapeSpec::Point { at, .. } => Chain::new(
                at.len(),
                0,
                vec![(Simplex::new(vec![Point(at.clone())])?, 1)],
            )?,
            ShapeSpec::PolylineLoop { points, closed, .. } => {
                let pts: Vec<Point> = points.iter().map(|p| Point(p.clone())).collect();
                sample_polyline_loop(&pts, *closed)?
            }
            ShapeSpec::Circle {
                radius,
                axes,
                origin,
                segments,
                orientation,
                ..
            } => sample_circle(
                *radius,
                &Embedding::new(d, axes.clone(), origin.clone())?,
                *segments,
                *orientation,
            )?,
            ShapeSpec::Sphere {
                radius,
                axes,
                origin,
                resolution,
                orientation,
                ..
            } => sample_sphere(
                *radius,
                &Embedding::new(d, axes.clone(), origin.clone())?,
                (resolution[0], resolution[1]),
                *orientation,
            )?,
            ShapeSpec::Torus {
                r,
                big_r,
                axes,
                origin,
                resolution,
                orientation,
                ..
            } => sample_torus(
                *r,
                *big_r,
                &Embedding::new(d, axes.clone(), origin.clone())?,
                (resolution[0], resolution[1]),
                *orientation,
            )?,
            ShapeSpec::Mesh { file, .. } => {
                let path = base.join(file);
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                read_chain(&text)?
            }
        };
        Ok(chain)
    }
}

/// Parses and checks a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_syntax() || inner.is_eof() {
            CliError::Syntax {
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        } else {
            CliError::Semantic {
                path,
                message: strip_position(&inner.to_string()),
            }
        }
    })?;
    s.check()?;
    Ok(s)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn semantic(path: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Semantic {
        path: path.into(),
        message: message.into(),
    }
}

impl Scenario {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes") + "\n"
    }

    fn check(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(semantic(
                "schema_version",
                format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        if self.n < 2 || self.n > self.d {
            return Err(semantic(
                "N",
                format!("need 2 <= N <= D, got N = {}, D = {}", self.n, self.d),
            ));
        }
        if self.skeletons.is_empty() {
            return Err(semantic("skeletons", "at least one skeleton is required"));
        }
        let point_dim = |path: String, p: &[f64]| {
            if p.len() != self.d {
                Err(semantic(
                    path,
                    format!("point has {} coordinates, D = {}", p.len(), self.d),
                ))
            } else {
                Ok(())
            }
        };
        if let Some(g) = &self.grid {
            if g.lower.len() != self.d {
                return Err(semantic(
                    "grid.lower",
                    format!("grid has dimension {}, D = {}", g.lower.len(), self.d),
                ));
            }
            g.validate().map_err(|e| semantic("grid", e.to_string()))?;
        }
        if let Some(p) = &self.start {
            point_dim("start".into(), p)?;
        }
        if let Some(p) = &self.goal {
            point_dim("goal".into(), p)?;
        }
        if let Some(Mode::Target(t)) = &self.mode {
            if t.len() != self.skeletons.len() {
                return Err(semantic(
                    "mode.target",
                    format!(
                        "target has {} entries for {} skeletons",
                        t.len(),
                        self.skeletons.len()
                    ),
                ));
            }
        }
        if let Some(Mode::Enumerate(0)) = &self.mode {
            return Err(semantic("mode.enumerate", "k must be at least 1"));
        }
        if let Some(s) = &self.subspace {
            if s.generators.is_empty() && !s.auto {
                return Err(semantic(
                    "subspace",
                    "give generator loops or set \"auto\": true",
                ));
            }
            if s.boxes.is_empty() && s.cells.is_empty() {
                return Err(semantic("subspace", "L is empty: give boxes or cells"));
            }
        }
        self.tolerances
            .quad()
            .validate()
            .map_err(|e| semantic("tolerances", e.to_string()))?;
        Ok(())
    }

    /// Samples all skeletons, checking that each has dimension D − N.
    pub fn skeleton_set(&self, base: &Path) -> Result<SkeletonSet, CliError> {
        let mut chains = Vec::new();
        let mut labels = Vec::new();
        for (i, s) in self.skeletons.iter().enumerate() {
            let c = s.build(self.d, base)?;
            self.check_chain(&format!("skeletons[{i}]"), &c, self.d - self.n)?;
            chains.push(c);
            labels.push(
                s.label()
                    .map(str::to_string)
                    .unwrap_or_else(|| format!("S{}", i + 1)),
            );
        }
        Ok(SkeletonSet::new(chains, labels))
    }

    /// Samples the candidate cycles, which have dimension N − 1.
    pub fn candidate_chains(&self, base: &Path) -> Result<Vec<(String, Chain)>, CliError> {
        self.candidates
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let c = s.build(self.d, base)?;
                self.check_chain(&format!("candidates[{i}]"), &c, self.n - 1)?;
                let label = s
                    .label()
                    .map(str::to_string)
                    .unwrap_or_else(|| format!("omega{}", i + 1));
                Ok((label, c))
            })
            .collect()
    }

    fn check_chain(&self, path: &str, c: &Chain, dim: usize) -> Result<(), CliError> {
        if c.ambient() != self.d {
            return Err(semantic(
                path,
                format!("lives in R^{}, D = {}", c.ambient(), self.d),
            ));
        }
        if c.dim() != dim {
            return Err(semantic(
                path,
                format!(
                    "dimension mismatch: has dimension {}, expected {dim}",
                    c.dim()
                ),
            ));
        }
        Ok(())
    }
}
