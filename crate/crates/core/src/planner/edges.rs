use crate::invariant::{Engine, EngineError};
use crate::mesh::{Chain, Point};
use crate::quadrature::QuadStats;

use super::{GridGraph, PlannerError};

/// Per-edge signature vectors, stored for the lower-to-higher vertex
/// direction. The reverse direction is the exact negation.
#[derive(Debug, Clone)]
pub struct EdgeSignatureCache {
    m: usize,
    forward: Vec<f64>,
    backward: Vec<f64>,
    stats: QuadStats,
}

impl EdgeSignatureCache {
    /// Cache for a graph with no skeletons.
    pub fn empty() -> Self {
        Self::from_forward(0, Vec::new())
    }

    /// Builds a cache from precomputed forward signatures.
    pub fn from_forward(m: usize, forward: Vec<f64>) -> Self {
        let backward = forward.iter().map(|v| -v).collect();
        EdgeSignatureCache {
            m,
            forward,
            backward,
            stats: QuadStats::default(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, edge: u32, forward: bool) -> &[f64] {
        let r = edge as usize * self.m..(edge as usize + 1) * self.m;
        if forward {
            &self.forward[r]
        } else {
            &self.backward[r]
        }
    }

    pub fn stats(&self) -> &QuadStats {
        &self.stats
    }

    /// Signature of a vertex path, summed in path order.
    pub fn path_signature(&self, g: &GridGraph, path: &[u32]) -> Option<Vec<f64>> {
        let mut c = vec![0.0; self.m];
        for w in path.windows(2) {
            let s = g.steps(w[0]).find(|s| s.to == w[1])?;
            for (a, b) in c.iter_mut().zip(self.get(s.edge, s.forward)) {
                *a += b;
            }
        }
        Some(c)
    }
}

/// Integrates every skeleton form over every straight grid edge.
pub fn edge_signatures(g: &GridGraph, engine: &Engine) -> Result<EdgeSignatureCache, PlannerError> {
    let fields = engine.fields();
    let Some(f) = fields.first() else {
        return Ok(EdgeSignatureCache::empty());
    };
    if f.ambient() != g.dim() || f.codim() != 2 {
        return Err(PlannerError::Spec(format!(
            "paths need skeletons of dimension D−2 in R^{}, engine is set up for D = {}, N = {}",
            g.dim(),
            f.ambient(),
            f.codim()
        )));
    }
    let m = fields.len();
    let chains: Vec<Chain> = (0..g.edge_count() as u32)
        .map(|e| {
            let (a, b) = g.edge(e);
            Chain::from_simplices(
                g.dim(),
                1,
                vec![vec![Point::from(g.coords(a)), Point::from(g.coords(b))]],
            )
            .expect("grid edges join distinct cell centers")
        })
        .collect();
    let mut forward = Vec::with_capacity(m * chains.len());
    let mut stats = QuadStats::default();
    for (e, r) in engine.signatures(&chains).into_iter().enumerate() {
        match r {
            Ok((sig, st)) => {
                forward.extend_from_slice(&sig.values);
                stats.merge(&st);
            }
            Err(source @ EngineError::SingularProximity { .. }) => {
                let (a, b) = g.edge(e as u32);
                return Err(PlannerError::EdgeSingular {
                    edge: e as u32,
                    from: g.coords(a).to_vec(),
                    to: g.coords(b).to_vec(),
                    source,
                });
            }
            Err(other) => return Err(other.into()),
        }
    }
    let mut cache = EdgeSignatureCache::from_forward(m, forward);
    cache.stats = stats;
    Ok(cache)
}
