use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{QLattice, QuotientError};
use crate::planner::search::{
    astar, check_vertices, finish, heuristic_to, result, Astar, Identify, State, Visit,
};
use crate::planner::{
    BoxRegion, ClassResult, EdgeSignatureCache, GridGraph, PlannerError, SearchMode, DEFAULT_BUDGET,
};

/// The vertices of the grid that belong to L.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    member: Vec<bool>,
}

impl Subspace {
    pub fn from_mask(member: Vec<bool>) -> Self {
        Subspace { member }
    }

    pub fn from_predicate(g: &GridGraph, f: impl Fn(&[f64]) -> bool) -> Self {
        Subspace {
            member: (0..g.vertex_count() as u32)
                .map(|v| f(g.coords(v)))
                .collect(),
        }
    }

    /// Vertices whose cell centers lie in one of the boxes.
    pub fn from_boxes(g: &GridGraph, boxes: &[BoxRegion]) -> Self {
        Self::from_predicate(g, |x| boxes.iter().any(|b| b.contains(x)))
    }

    pub fn contains(&self, v: u32) -> bool {
        self.member.get(v as usize).copied().unwrap_or(false)
    }

    pub fn mask(&self) -> &[bool] {
        &self.member
    }

    pub fn vertices(&self) -> Vec<u32> {
        (0..self.member.len() as u32)
            .filter(|&v| self.member[v as usize])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuotientConfig {
    pub budget: u64,
    /// Edges inside L cost this fraction of their mean weight.
    pub eps_w_factor: f64,
}

impl Default for QuotientConfig {
    fn default() -> Self {
        QuotientConfig {
            budget: DEFAULT_BUDGET,
            eps_w_factor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientClass {
    #[serde(flatten)]
    pub result: ClassResult,
    /// Canonical residue of `c − c_first` modulo Q.
    pub residue: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientOutcome {
    pub classes: Vec<QuotientClass>,
    pub expansions: u64,
    pub exhausted: bool,
}

/// Augmented vertices at the same base vertex are equal when their
/// signatures differ by an element of Q. Keys are taken relative to the
/// first signature seen at each vertex.
struct QIdentify<'a> {
    q: &'a QLattice,
    reference: Vec<Option<Vec<f64>>>,
    map: HashMap<(u32, Vec<i64>), usize>,
}

impl<'a> QIdentify<'a> {
    fn new(q: &'a QLattice, n: usize) -> Self {
        QIdentify {
            q,
            reference: vec![None; n],
            map: HashMap::new(),
        }
    }

    fn key(&self, v: u32, c: &[f64]) -> Option<Vec<i64>> {
        let r = self.reference[v as usize].as_ref()?;
        Some(residue(self.q, c, r))
    }
}

fn residue(q: &QLattice, c: &[f64], base: &[f64]) -> Vec<i64> {
    let z: Vec<i64> = c
        .iter()
        .zip(base)
        .map(|(a, b)| (a - b).round() as i64)
        .collect();
    q.reduce_integer(&z)
}

impl Identify for QIdentify<'_> {
    fn find(&self, _: &[State], v: u32, c: &[f64]) -> Option<usize> {
        let k = self.key(v, c)?;
        self.map.get(&(v, k)).copied()
    }

    fn insert(&mut self, states: &[State], id: usize) {
        let s = &states[id];
        if self.reference[s.v as usize].is_none() {
            self.reference[s.v as usize] = Some(s.c.clone());
        }
        let k = self.key(s.v, &s.c).expect("reference set");
        self.map.insert((s.v, k), id);
    }

    fn update(&mut self, states: &[State], id: usize, old: &[f64]) {
        let v = states[id].v;
        let old_key = self.key(v, old).expect("reference set");
        let new_key = self.key(v, &states[id].c).expect("reference set");
        if old_key != new_key {
            self.map.remove(&(v, old_key));
            self.map.insert((v, new_key), id);
        }
    }
}

fn collapsed_weights(g: &GridGraph, l: &Subspace, factor: f64) -> (Vec<f64>, f64) {
    let inside: Vec<usize> = (0..g.edge_count())
        .filter(|&e| {
            let (a, b) = g.edge(e as u32);
            l.contains(a) && l.contains(b)
        })
        .collect();
    let pool: Vec<f64> = if inside.is_empty() {
        g.weights().to_vec()
    } else {
        inside.iter().map(|&e| g.weight(e as u32)).collect()
    };
    let eps_w = factor * pool.iter().sum::<f64>() / pool.len().max(1) as f64;
    let mut w = g.weights().to_vec();
    for e in inside {
        w[e] = eps_w;
    }
    (w, eps_w)
}

fn check_subspace(g: &GridGraph, l: &Subspace, start: u32, goal: u32) -> Result<(), QuotientError> {
    check_vertices(g, start, goal)?;
    if l.mask().len() != g.vertex_count() {
        return Err(PlannerError::Spec("subspace mask does not match the grid".into()).into());
    }
    if !l.contains(goal) {
        return Err(QuotientError::GoalOutsideL);
    }
    Ok(())
}

fn wrap(
    out: Result<crate::planner::SearchOutcome, PlannerError>,
    residues: Vec<Vec<i64>>,
) -> Result<QuotientOutcome, QuotientError> {
    let out = out?;
    Ok(QuotientOutcome {
        classes: out
            .classes
            .into_iter()
            .zip(residues)
            .map(|(result, residue)| QuotientClass { result, residue })
            .collect(),
        expansions: out.expansions,
        exhausted: out.exhausted,
    })
}

/// First `k` classes of paths from `start` to `goal ∈ L`, with paths
/// identified modulo Q. Edges inside L get a near-zero weight and the
/// heuristic is the Euclidean distance to L.
pub fn quotient_augmented_search(
    g: &GridGraph,
    cache: &EdgeSignatureCache,
    q: &QLattice,
    l: &Subspace,
    start: u32,
    goal: u32,
    k: usize,
    cfg: &QuotientConfig,
) -> Result<QuotientOutcome, QuotientError> {
    check_subspace(g, l, start, goal)?;
    check_q(q, cache)?;
    if k == 0 {
        return Err(PlannerError::Spec("k must be at least 1".into()).into());
    }
    let (weights, _) = collapsed_weights(g, l, cfg.eps_w_factor);
    let h = heuristic_to(g, &l.vertices());
    let a = Astar {
        g,
        cache,
        weights: &weights,
        h: &h,
        start,
        allowed: None,
        budget: cfg.budget,
    };
    let mut ident = QIdentify::new(q, g.vertex_count());
    let mut classes = Vec::new();
    let mut residues = Vec::new();
    let mut base: Option<Vec<f64>> = None;
    let (end, expansions) = astar(&a, &mut ident, |states, id| {
        if states[id].v != goal {
            return Visit::Expand;
        }
        let c = &states[id].c;
        let b = base.get_or_insert_with(|| c.clone());
        residues.push(residue(q, c, b));
        classes.push(result(states, id, classes.len()));
        if classes.len() >= k {
            Visit::Stop
        } else {
            Visit::Expand
        }
    });
    let out = finish(
        &SearchMode::EnumerateK(k),
        classes,
        end,
        expansions,
        cfg.budget,
    );
    wrap(out, residues)
}

fn check_q(q: &QLattice, cache: &EdgeSignatureCache) -> Result<(), QuotientError> {
    if q.m() != cache.m() {
        return Err(QuotientError::Dimension {
            expected: cache.m(),
            found: q.m(),
        });
    }
    Ok(())
}

/// Shortest-path tree inside L from `root`: parent links and the signature
/// of the tree path from the root to each reached vertex.
struct Tree {
    parent: Vec<u32>,
    p: Vec<Option<Vec<f64>>>,
}

fn tree_in_l(g: &GridGraph, cache: &EdgeSignatureCache, l: &Subspace, root: u32) -> Tree {
    let n = g.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![u32::MAX; n];
    let mut p: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut done = vec![false; n];
    dist[root as usize] = 0.0;
    p[root as usize] = Some(vec![0.0; cache.m()]);
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((Dist(0.0), root)));
    while let Some(Reverse((Dist(d), v))) = heap.pop() {
        if done[v as usize] {
            continue;
        }
        done[v as usize] = true;
        let pv = p[v as usize].clone().expect("reached");
        for s in g.steps(v) {
            let u = s.to as usize;
            if !l.contains(s.to) || done[u] {
                continue;
            }
            let nd = d + g.weight(s.edge);
            if nd < dist[u] {
                dist[u] = nd;
                parent[u] = v;
                p[u] = Some(
                    pv.iter()
                        .zip(cache.get(s.edge, s.forward))
                        .map(|(a, b)| a + b)
                        .collect(),
                );
                heap.push(Reverse((Dist(nd), s.to)));
            }
        }
    }
    Tree { parent, p }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Dist {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// Two-phase search whose paths leave L at most once: a Dijkstra tree
/// inside L from the goal gives `p(v)` for each boundary vertex, then a
/// search outside L from `start` stops at boundary vertices, where the
/// class of `{v, c}` is that of `c − p(v)`.
///
/// Reported costs are those of the part outside L.
pub fn connected_quotient_search(
    g: &GridGraph,
    cache: &EdgeSignatureCache,
    q: &QLattice,
    l: &Subspace,
    start: u32,
    goal: u32,
    k: usize,
    cfg: &QuotientConfig,
) -> Result<QuotientOutcome, QuotientError> {
    check_subspace(g, l, start, goal)?;
    check_q(q, cache)?;
    if k == 0 {
        return Err(PlannerError::Spec("k must be at least 1".into()).into());
    }
    let tree = tree_in_l(g, cache, l, goal);
    let n = g.vertex_count();
    let boundary: Vec<bool> = (0..n as u32)
        .map(|v| tree.p[v as usize].is_some() && g.steps(v).any(|s| !l.contains(s.to)))
        .collect();
    let targets: Vec<u32> = (0..n as u32).filter(|&v| boundary[v as usize]).collect();
    if targets.is_empty() {
        return Err(QuotientError::EmptyBoundary);
    }
    if l.contains(start) && !boundary[start as usize] {
        return Err(QuotientError::StartInsideL);
    }
    let allowed: Vec<bool> = (0..n).map(|v| !l.mask()[v] || boundary[v]).collect();
    let h = heuristic_to(g, &targets);
    let a = Astar {
        g,
        cache,
        weights: g.weights(),
        h: &h,
        start,
        allowed: Some(&allowed),
        budget: cfg.budget,
    };
    let mut ident = QIdentify::new(q, n);
    let mut classes: Vec<ClassResult> = Vec::new();
    let mut residues = Vec::new();
    let mut seen = HashSet::new();
    let mut base: Option<Vec<f64>> = None;
    let (end, expansions) = astar(&a, &mut ident, |states, id| {
        let s = &states[id];
        if !boundary[s.v as usize] {
            return Visit::Expand;
        }
        let p = tree.p[s.v as usize]
            .as_ref()
            .expect("boundary vertices are in the tree");
        let total: Vec<f64> = s.c.iter().zip(p).map(|(a, b)| a - b).collect();
        let b = base.get_or_insert_with(|| total.clone());
        let r = residue(q, &total, b);
        if seen.insert(r.clone()) {
            let mut path = State::path(states, id);
            let mut v = s.v;
            while v != goal {
                v = tree.parent[v as usize];
                path.push(v);
            }
            classes.push(ClassResult {
                rank: classes.len(),
                signature: total,
                path,
                cost: s.g,
            });
            residues.push(r);
            if classes.len() >= k {
                return Visit::Stop;
            }
        }
        Visit::Terminal
    });
    let out = finish(
        &SearchMode::EnumerateK(k),
        classes,
        end,
        expansions,
        cfg.budget,
    );
    match out {
        Err(PlannerError::NoPath) => Err(QuotientError::LUnreachable),
        other => wrap(other, residues),
    }
}

/// Q generated by the fundamental cycles of a spanning forest of the
/// L-subgraph.
pub fn auto_q(
    g: &GridGraph,
    cache: &EdgeSignatureCache,
    l: &Subspace,
    eps_int: f64,
) -> Result<QLattice, QuotientError> {
    let n = g.vertex_count();
    let m = cache.m();
    let mut p: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut tree_edge = vec![false; g.edge_count()];
    for root in l.vertices() {
        if p[root as usize].is_some() {
            continue;
        }
        p[root as usize] = Some(vec![0.0; m]);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let pv = p[v as usize].clone().expect("visited");
            for s in g.steps(v) {
                if l.contains(s.to) && p[s.to as usize].is_none() {
                    p[s.to as usize] = Some(
                        pv.iter()
                            .zip(cache.get(s.edge, s.forward))
                            .map(|(a, b)| a + b)
                            .collect(),
                    );
                    tree_edge[s.edge as usize] = true;
                    queue.push_back(s.to);
                }
            }
        }
    }
    let mut gens = Vec::new();
    for e in 0..g.edge_count() as u32 {
        let (a, b) = g.edge(e);
        if tree_edge[e as usize] || !l.contains(a) || !l.contains(b) {
            continue;
        }
        let (pa, pb) = (
            p[a as usize].as_ref().unwrap(),
            p[b as usize].as_ref().unwrap(),
        );
        let cyc: Vec<f64> = pa
            .iter()
            .zip(cache.get(e, true))
            .zip(pb)
            .map(|((x, y), z)| x + y - z)
            .collect();
        gens.push(cyc);
    }
    let mut uniq: Vec<Vec<i64>> = Vec::new();
    for (i, c) in gens.iter().enumerate() {
        let r: Vec<i64> = c.iter().map(|x| x.round() as i64).collect();
        if c.iter()
            .zip(&r)
            .any(|(x, z)| !((x - *z as f64).abs() <= eps_int))
        {
            return Err(QuotientError::NotIntegral {
                index: i,
                values: c.clone(),
            });
        }
        if r.iter().any(|&x| x != 0) && !uniq.contains(&r) {
            uniq.push(r);
        }
    }
    QLattice::from_integer(m, &uniq)
}
