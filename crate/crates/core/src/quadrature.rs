//! Collapsed tensor-product Gauss rules on the reference simplex and the
//! adaptive-subdivision settings used by the invariant integrals.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, OnceLock, RwLock};

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::DEFAULT_SINGULAR_EPS;

pub const MAX_DEPTH_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    /// Gauss points per reference direction.
    pub order: usize,
    /// Maximum number of bisections along one simplex-pair refinement path.
    pub max_depth: usize,
    /// A pair is refined while its larger diameter exceeds
    /// `split_ratio * (lower bound on the pair distance)`.
    pub split_ratio: f64,
    /// Node separations at or below this distance abort the integral.
    pub singular_eps: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            order: 4,
            max_depth: MAX_DEPTH_LIMIT,
            split_ratio: 0.5,
            singular_eps: DEFAULT_SINGULAR_EPS,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid quadrature config: {0}")]
pub struct QuadConfigError(pub String);

impl QuadConfig {
    pub fn validate(&self) -> Result<(), QuadConfigError> {
        if self.order < 1 {
            return Err(QuadConfigError("order must be at least 1".into()));
        }
        if self.max_depth > MAX_DEPTH_LIMIT {
            return Err(QuadConfigError(format!(
                "max_depth {} exceeds {MAX_DEPTH_LIMIT}",
                self.max_depth
            )));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio <= 1.0) {
            return Err(QuadConfigError(format!(
                "split_ratio {} not in (0, 1]",
                self.split_ratio
            )));
        }
        if !(self.singular_eps >= 0.0 && self.singular_eps.is_finite()) {
            return Err(QuadConfigError(format!(
                "singular_eps {} must be finite and non-negative",
                self.singular_eps
            )));
        }
        Ok(())
    }
}

/// Quadrature rule on the reference k-simplex `{t ≥ 0, Σt ≤ 1}`.
/// Nodes are stored as barycentric coordinates (k + 1 per node); weights sum
/// to `1/k!`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexRule {
    pub dim: usize,
    pub bary: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.bary[i * (self.dim + 1)..(i + 1) * (self.dim + 1)]
    }
}

/// Cached Duffy-collapsed Gauss–Legendre rule with `order^dim` nodes.
pub fn simplex_rule(dim: usize, order: usize) -> Arc<SimplexRule> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize), Arc<SimplexRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache
        .read()
        .unwrap_or_else(|e| e.into_inner())
        .get(&(dim, order))
    {
        return r.clone();
    }
    let r = Arc::new(build_rule(dim, order));
    cache
        .write()
        .unwrap_or_else(|e| e.into_inner())
        .insert((dim, order), r.clone());
    r
}

fn build_rule(dim: usize, order: usize) -> SimplexRule {
    if dim == 0 {
        return SimplexRule {
            dim,
            bary: vec![1.0],
            weights: vec![1.0],
        };
    }
    let gl = GaussLegendre::new(NonZeroUsize::new(order.max(1)).expect("order >= 1"));
    // Map [-1, 1] to [0, 1].
    let line: Vec<(f64, f64)> = gl
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    let n = line.len();
    let total = n.pow(dim as u32);
    let mut bary = Vec::with_capacity(total * (dim + 1));
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        // t_1 = ξ_1, t_i = ξ_i Π_{j<i} (1 − ξ_j); Jacobian Π_j (1 − ξ_j)^(dim − j).
        let mut t = vec![0.0; dim];
        let mut rest = 1.0;
        let mut w = 1.0;
        for i in 0..dim {
            let (xi, wi) = line[idx[i]];
            t[i] = xi * rest;
            w *= wi;
            w *= (1.0 - xi).powi((dim - 1 - i) as i32);
            rest *= 1.0 - xi;
        }
        bary.push(1.0 - t.iter().sum::<f64>());
        bary.extend_from_slice(&t);
        weights.push(w);
        for d in (0..dim).rev() {
            idx[d] += 1;
            if idx[d] < n {
                break;
            }
            idx[d] = 0;
        }
    }
    SimplexRule { dim, bary, weights }
}

/// Work counters for one integral.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadStats {
    pub pairs: u64,
    pub leaves: u64,
    pub subdivisions: u64,
    pub depth_limited: u64,
    pub max_depth: u32,
}

impl QuadStats {
    pub fn merge(&mut self, o: &QuadStats) {
        self.pairs += o.pairs;
        self.leaves += o.leaves;
        self.subdivisions += o.subdivisions;
        self.depth_limited += o.depth_limited;
        self.max_depth = self.max_depth.max(o.max_depth);
    }
}
