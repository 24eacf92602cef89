use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::{EdgeSignatureCache, GridGraph, PlannerError, DEFAULT_BUDGET, DEFAULT_EPS_KEY};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    EnumerateK(usize),
    TargetClass(Vec<f64>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    #[default]
    EuclideanToGoal,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub eps_key: f64,
    pub budget: u64,
    pub heuristic: Heuristic,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            eps_key: DEFAULT_EPS_KEY,
            budget: DEFAULT_BUDGET,
            heuristic: Heuristic::EuclideanToGoal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassResult {
    /// Zero-based discovery rank.
    pub rank: usize,
    pub signature: Vec<f64>,
    pub path: Vec<u32>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub classes: Vec<ClassResult>,
    pub expansions: u64,
    /// The reachable part of the augmented graph was used up before the
    /// requested number of classes was found.
    pub exhausted: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct State {
    pub v: u32,
    pub c: Vec<f64>,
    pub g: f64,
    pub parent: u32,
    pub closed: bool,
}

const NO_PARENT: u32 = u32::MAX;

impl State {
    pub fn path(states: &[State], mut id: usize) -> Vec<u32> {
        let mut p = vec![states[id].v];
        while states[id].parent != NO_PARENT {
            id = states[id].parent as usize;
            p.push(states[id].v);
        }
        p.reverse();
        p
    }
}

/// Decides when two augmented vertices are the same.
pub(crate) trait Identify {
    fn find(&self, states: &[State], v: u32, c: &[f64]) -> Option<usize>;
    fn insert(&mut self, states: &[State], id: usize);
    /// Called after `states[id].c` changed from `old`.
    fn update(&mut self, states: &[State], id: usize, old: &[f64]);
}

/// Equality within `eps` in the max norm, found through buckets of width
/// `eps` and a scan of the neighboring buckets.
pub(crate) struct KeyedIdentify {
    eps: f64,
    buckets: HashMap<(u32, Vec<i64>), Vec<usize>>,
    around: Vec<Vec<i64>>,
}

impl KeyedIdentify {
    pub fn new(m: usize, eps: f64) -> Self {
        let mut around = vec![vec![]];
        for _ in 0..m {
            around = around
                .into_iter()
                .flat_map(|a| {
                    (-1..=1).map(move |d| {
                        let mut b = a.clone();
                        b.push(d);
                        b
                    })
                })
                .collect();
        }
        KeyedIdentify {
            eps,
            buckets: HashMap::new(),
            around,
        }
    }

    fn bucket(&self, c: &[f64]) -> Vec<i64> {
        c.iter().map(|x| (x / self.eps).round() as i64).collect()
    }
}

impl Identify for KeyedIdentify {
    fn find(&self, states: &[State], v: u32, c: &[f64]) -> Option<usize> {
        let b = self.bucket(c);
        let mut key = (v, b.clone());
        for off in &self.around {
            for (k, (x, d)) in key.1.iter_mut().zip(b.iter().zip(off)) {
                *k = x + d;
            }
            if let Some(ids) = self.buckets.get(&key) {
                for &id in ids {
                    let s = &states[id].c;
                    if s.iter().zip(c).all(|(a, b)| (a - b).abs() < self.eps) {
                        return Some(id);
                    }
                }
            }
        }
        None
    }

    fn insert(&mut self, states: &[State], id: usize) {
        let key = (states[id].v, self.bucket(&states[id].c));
        self.buckets.entry(key).or_default().push(id);
    }

    fn update(&mut self, states: &[State], id: usize, old: &[f64]) {
        let old_key = (states[id].v, self.bucket(old));
        let new_key = (states[id].v, self.bucket(&states[id].c));
        if old_key != new_key {
            if let Some(ids) = self.buckets.get_mut(&old_key) {
                ids.retain(|&i| i != id);
            }
            self.buckets.entry(new_key).or_default().push(id);
        }
    }
}

struct Entry {
    f: f64,
    g: f64,
    c: Box<[f64]>,
    v: u32,
    id: u32,
}

impl Ord for Entry {
    // Reversed so that BinaryHeap pops the smallest (f, c, v, id).
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.total_cmp(&self.f)
            .then_with(|| {
                for (a, b) in o.c.iter().zip(self.c.iter()) {
                    match a.total_cmp(b) {
                        Ordering::Equal => {}
                        x => return x,
                    }
                }
                Ordering::Equal
            })
            .then_with(|| o.v.cmp(&self.v))
            .then_with(|| o.id.cmp(&self.id))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl PartialEq for Entry {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Entry {}

pub(crate) enum Visit {
    Expand,
    Terminal,
    Stop,
}

pub(crate) struct Astar<'a> {
    pub g: &'a GridGraph,
    pub cache: &'a EdgeSignatureCache,
    pub weights: &'a [f64],
    pub h: &'a [f64],
    pub start: u32,
    /// Vertices that may be entered.
    pub allowed: Option<&'a [bool]>,
    pub budget: u64,
}

pub(crate) enum AstarEnd {
    Stopped,
    Exhausted,
    Budget,
}

/// Best-first search over augmented vertices. `visit` sees each state once,
/// in nondecreasing `f` order, when it is closed.
pub(crate) fn astar(
    a: &Astar<'_>,
    ident: &mut dyn Identify,
    mut visit: impl FnMut(&[State], usize) -> Visit,
) -> (AstarEnd, u64) {
    let m = a.cache.m();
    let mut states = vec![State {
        v: a.start,
        c: vec![0.0; m],
        g: 0.0,
        parent: NO_PARENT,
        closed: false,
    }];
    ident.insert(&states, 0);
    let mut open = BinaryHeap::new();
    open.push(Entry {
        f: a.h[a.start as usize],
        g: 0.0,
        c: vec![0.0; m].into(),
        v: a.start,
        id: 0,
    });
    let mut expansions = 0u64;
    let mut nc = vec![0.0; m];
    while let Some(e) = open.pop() {
        let id = e.id as usize;
        if states[id].closed || e.g > states[id].g {
            continue;
        }
        if expansions >= a.budget {
            return (AstarEnd::Budget, expansions);
        }
        expansions += 1;
        states[id].closed = true;
        match visit(&states, id) {
            Visit::Stop => return (AstarEnd::Stopped, expansions),
            Visit::Terminal => continue,
            Visit::Expand => {}
        }
        let v = states[id].v;
        for step in a.g.steps(v) {
            if let Some(al) = a.allowed {
                if !al[step.to as usize] {
                    continue;
                }
            }
            let ng = states[id].g + a.weights[step.edge as usize];
            for ((o, x), d) in nc
                .iter_mut()
                .zip(&states[id].c)
                .zip(a.cache.get(step.edge, step.forward))
            {
                *o = x + d;
            }
            let target = match ident.find(&states, step.to, &nc) {
                Some(t) => {
                    if states[t].closed || ng >= states[t].g {
                        continue;
                    }
                    let old = std::mem::replace(&mut states[t].c, nc.clone());
                    states[t].g = ng;
                    states[t].parent = id as u32;
                    ident.update(&states, t, &old);
                    t
                }
                None => {
                    states.push(State {
                        v: step.to,
                        c: nc.clone(),
                        g: ng,
                        parent: id as u32,
                        closed: false,
                    });
                    let t = states.len() - 1;
                    ident.insert(&states, t);
                    t
                }
            };
            open.push(Entry {
                f: ng + a.h[step.to as usize],
                g: ng,
                c: nc.clone().into(),
                v: step.to,
                id: target as u32,
            });
        }
    }
    (AstarEnd::Exhausted, expansions)
}

pub(crate) fn heuristic_to(g: &GridGraph, targets: &[u32]) -> Vec<f64> {
    (0..g.vertex_count() as u32)
        .map(|v| {
            let x = g.coords(v);
            targets
                .iter()
                .map(|&t| {
                    x.iter()
                        .zip(g.coords(t))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// A* over the augmented graph from `{start, 0}`.
///
/// `EnumerateK(k)` returns the first `k` goal classes in cost order; if the
/// augmented graph runs out first, the classes found so far are returned
/// with `exhausted` set.
pub fn augmented_search(
    g: &GridGraph,
    cache: &EdgeSignatureCache,
    start: u32,
    goal: u32,
    mode: &SearchMode,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, PlannerError> {
    let m = cache.m();
    check_vertices(g, start, goal)?;
    if let SearchMode::TargetClass(t) = mode {
        if t.len() != m {
            return Err(PlannerError::Spec(format!(
                "target signature has {} entries, scene has {m} skeletons",
                t.len()
            )));
        }
    }
    if let SearchMode::EnumerateK(0) = mode {
        return Err(PlannerError::Spec("k must be at least 1".into()));
    }
    let h = match cfg.heuristic {
        Heuristic::EuclideanToGoal => heuristic_to(g, &[goal]),
        Heuristic::Zero => vec![0.0; g.vertex_count()],
    };
    let a = Astar {
        g,
        cache,
        weights: g.weights(),
        h: &h,
        start,
        allowed: None,
        budget: cfg.budget,
    };
    let mut ident = KeyedIdentify::new(m, cfg.eps_key);
    let mut classes = Vec::new();
    let (end, expansions) = astar(&a, &mut ident, |states, id| {
        let s = &states[id];
        if s.v != goal {
            return Visit::Expand;
        }
        match mode {
            SearchMode::EnumerateK(k) => {
                classes.push(result(states, id, classes.len()));
                if classes.len() >= *k {
                    Visit::Stop
                } else {
                    Visit::Expand
                }
            }
            SearchMode::TargetClass(t) => {
                if s.c.iter().zip(t).all(|(a, b)| (a - b).abs() < cfg.eps_key) {
                    classes.push(result(states, id, 0));
                    Visit::Stop
                } else {
                    classes.push(result(states, id, classes.len()));
                    Visit::Expand
                }
            }
        }
    });
    finish(mode, classes, end, expansions, cfg.budget)
}

pub(crate) fn check_vertices(g: &GridGraph, start: u32, goal: u32) -> Result<(), PlannerError> {
    let n = g.vertex_count() as u32;
    if start >= n || goal >= n {
        return Err(PlannerError::Spec(format!(
            "vertex id out of range (graph has {n})"
        )));
    }
    Ok(())
}

pub(crate) fn result(states: &[State], id: usize, rank: usize) -> ClassResult {
    ClassResult {
        rank,
        signature: states[id].c.clone(),
        path: State::path(states, id),
        cost: states[id].g,
    }
}

/// Maps the end of a search to the public outcome. In target mode
/// `classes` holds every goal class seen, the hit last.
pub(crate) fn finish(
    mode: &SearchMode,
    mut classes: Vec<ClassResult>,
    end: AstarEnd,
    expansions: u64,
    budget: u64,
) -> Result<SearchOutcome, PlannerError> {
    match (mode, end) {
        (SearchMode::EnumerateK(_), AstarEnd::Stopped) => Ok(SearchOutcome {
            classes,
            expansions,
            exhausted: false,
        }),
        (SearchMode::EnumerateK(_), AstarEnd::Exhausted) if !classes.is_empty() => {
            Ok(SearchOutcome {
                classes,
                expansions,
                exhausted: true,
            })
        }
        (SearchMode::EnumerateK(_), AstarEnd::Budget) => Err(PlannerError::BudgetExceeded {
            budget,
            found: classes,
        }),
        (SearchMode::TargetClass(_), AstarEnd::Stopped) => {
            let hit = classes.pop().expect("target hit recorded");
            Ok(SearchOutcome {
                classes: vec![hit],
                expansions,
                exhausted: false,
            })
        }
        (SearchMode::TargetClass(_), AstarEnd::Budget) => {
            Err(PlannerError::TargetUnreachable { budget })
        }
        (SearchMode::TargetClass(_), AstarEnd::Exhausted) if !classes.is_empty() => {
            Err(PlannerError::TargetAbsent)
        }
        (_, AstarEnd::Exhausted) => Err(PlannerError::NoPath),
    }
}
