use serde::{Deserialize, Serialize};

use super::PlannerError;

/// Axis-aligned closed box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxRegion {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxRegion {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Cells per axis.
    pub resolution: Vec<usize>,
    /// A cell is blocked when its center lies in one of these boxes.
    #[serde(default)]
    pub blocked: Vec<BoxRegion>,
}

/// Uniform cell grid with one vertex per free cell (at the cell center) and
/// edges to every free cell in the surrounding `3^D − 1` block.
#[derive(Debug, Clone)]
pub struct GridGraph {
    d: usize,
    spec: GridSpec,
    cell_size: Vec<f64>,
    vertex_of_cell: Vec<Option<u32>>,
    cell_of_vertex: Vec<usize>,
    coords: Vec<f64>,
    offsets: Vec<usize>,
    adj: Vec<(u32, u32, bool)>,
    edges: Vec<(u32, u32)>,
    weights: Vec<f64>,
}

/// One directed step: neighbor vertex, undirected edge id, and whether the
/// step runs along the stored edge direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub to: u32,
    pub edge: u32,
    pub forward: bool,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), PlannerError> {
        let d = self.lower.len();
        if d == 0 || self.upper.len() != d || self.resolution.len() != d {
            return Err(PlannerError::Spec(format!(
                "grid bounds and resolution must share one dimension (got {}, {}, {})",
                self.lower.len(),
                self.upper.len(),
                self.resolution.len()
            )));
        }
        for i in 0..d {
            if !(self.upper[i] > self.lower[i])
                || !self.lower[i].is_finite()
                || !self.upper[i].is_finite()
            {
                return Err(PlannerError::Spec(format!(
                    "empty or non-finite extent on axis {i}"
                )));
            }
            if self.resolution[i] < 2 {
                return Err(PlannerError::Spec(format!(
                    "resolution on axis {i} must be at least 2"
                )));
            }
        }
        for (i, b) in self.blocked.iter().enumerate() {
            if b.lower.len() != d || b.upper.len() != d {
                return Err(PlannerError::Spec(format!(
                    "blocked box {i} has wrong dimension"
                )));
            }
        }
        Ok(())
    }
}

/// Builds the grid with the box list of `spec` as blocked predicate.
pub fn build_grid_graph(spec: &GridSpec) -> Result<GridGraph, PlannerError> {
    let boxes = spec.blocked.clone();
    build_grid_graph_with(spec, move |x| boxes.iter().any(|b| b.contains(x)))
}

/// Builds the grid with an arbitrary blocked-cell predicate on cell centers.
pub fn build_grid_graph_with(
    spec: &GridSpec,
    blocked: impl Fn(&[f64]) -> bool,
) -> Result<GridGraph, PlannerError> {
    spec.validate()?;
    let d = spec.lower.len();
    let cell_size: Vec<f64> = (0..d)
        .map(|i| (spec.upper[i] - spec.lower[i]) / spec.resolution[i] as f64)
        .collect();
    let total: usize = spec.resolution.iter().product();
    let mut vertex_of_cell = vec![None; total];
    let mut cell_of_vertex = Vec::new();
    let mut coords = Vec::new();
    let mut idx = vec![0usize; d];
    for (cell, slot) in vertex_of_cell.iter_mut().enumerate() {
        cell_index(cell, &spec.resolution, &mut idx);
        let c: Vec<f64> = (0..d)
            .map(|i| spec.lower[i] + (idx[i] as f64 + 0.5) * cell_size[i])
            .collect();
        if !blocked(&c) {
            *slot = Some(cell_of_vertex.len() as u32);
            cell_of_vertex.push(cell);
            coords.extend(c);
        }
    }
    let n_off = 3usize.pow(d as u32);
    let mut offsets = Vec::with_capacity(cell_of_vertex.len() + 1);
    let mut adj = Vec::new();
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    let mut edge_id: std::collections::HashMap<(u32, u32), u32> = Default::default();
    let mut nb = vec![0usize; d];
    for (v, &cell) in cell_of_vertex.iter().enumerate() {
        offsets.push(adj.len());
        cell_index(cell, &spec.resolution, &mut idx);
        'off: for o in 0..n_off {
            if o == n_off / 2 {
                continue;
            }
            let mut t = o;
            for i in 0..d {
                let delta = (t % 3) as isize - 1;
                t /= 3;
                let j = idx[i] as isize + delta;
                if j < 0 || j >= spec.resolution[i] as isize {
                    continue 'off;
                }
                nb[i] = j as usize;
            }
            let Some(u) = vertex_of_cell[flat_index(&nb, &spec.resolution)] else {
                continue;
            };
            let v = v as u32;
            let key = (v.min(u), v.max(u));
            let e = *edge_id.entry(key).or_insert_with(|| {
                edges.push(key);
                let (a, b) = (key.0 as usize, key.1 as usize);
                let w = (0..d)
                    .map(|i| (coords[a * d + i] - coords[b * d + i]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                weights.push(w);
                (edges.len() - 1) as u32
            });
            adj.push((u, e, v < u));
        }
    }
    offsets.push(adj.len());
    Ok(GridGraph {
        d,
        spec: spec.clone(),
        cell_size,
        vertex_of_cell,
        cell_of_vertex,
        coords,
        offsets,
        adj,
        edges,
        weights,
    })
}

/// Row-major with axis 0 fastest.
fn cell_index(mut cell: usize, res: &[usize], out: &mut [usize]) {
    for (o, r) in out.iter_mut().zip(res) {
        *o = cell % r;
        cell /= r;
    }
}

fn flat_index(idx: &[usize], res: &[usize]) -> usize {
    let mut f = 0;
    for i in (0..idx.len()).rev() {
        f = f * res[i] + idx[i];
    }
    f
}

impl GridGraph {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn vertex_count(&self) -> usize {
        self.cell_of_vertex.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn coords(&self, v: u32) -> &[f64] {
        &self.coords[v as usize * self.d..(v as usize + 1) * self.d]
    }

    /// Cell multi-index of a vertex.
    pub fn cell_of(&self, v: u32) -> Vec<usize> {
        let mut idx = vec![0; self.d];
        cell_index(
            self.cell_of_vertex[v as usize],
            &self.spec.resolution,
            &mut idx,
        );
        idx
    }

    pub fn steps(&self, v: u32) -> impl Iterator<Item = Step> + '_ {
        let (a, b) = (self.offsets[v as usize], self.offsets[v as usize + 1]);
        self.adj[a..b]
            .iter()
            .map(|&(to, edge, forward)| Step { to, edge, forward })
    }

    pub fn degree(&self, v: u32) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    /// Undirected edge endpoints, lower vertex id first.
    pub fn edge(&self, e: u32) -> (u32, u32) {
        self.edges[e as usize]
    }

    pub fn weight(&self, e: u32) -> f64 {
        self.weights[e as usize]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Vertex of the free cell containing `x`.
    pub fn locate(&self, x: &[f64]) -> Result<u32, PlannerError> {
        if x.len() != self.d {
            return Err(PlannerError::Spec(format!(
                "point has dimension {}, grid has {}",
                x.len(),
                self.d
            )));
        }
        let mut idx = vec![0; self.d];
        for i in 0..self.d {
            let t = ((x[i] - self.spec.lower[i]) / self.cell_size[i]).floor();
            if !(x[i] >= self.spec.lower[i] && x[i] <= self.spec.upper[i]) {
                return Err(PlannerError::OutOfBounds(x.to_vec()));
            }
            idx[i] = (t as usize).min(self.spec.resolution[i] - 1);
        }
        self.vertex_of_cell[flat_index(&idx, &self.spec.resolution)]
            .ok_or_else(|| PlannerError::Blocked(x.to_vec()))
    }

    /// Vertex at a cell multi-index, if that cell is free.
    pub fn vertex_at(&self, idx: &[usize]) -> Option<u32> {
        if idx.len() != self.d || idx.iter().zip(&self.spec.resolution).any(|(i, r)| i >= r) {
            return None;
        }
        self.vertex_of_cell[flat_index(idx, &self.spec.resolution)]
    }

    pub fn path_cost(&self, path: &[u32]) -> Option<f64> {
        let mut c = 0.0;
        for w in path.windows(2) {
            let s = self.steps(w[0]).find(|s| s.to == w[1])?;
            c += self.weight(s.edge);
        }
        Some(c)
    }
}
