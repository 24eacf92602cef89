#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use homolink_core::mesh::{Chain, Point, Simplex};
use homolink_core::planner::{EdgeSignatureCache, GridGraph};

pub fn point_chain(p: &[f64]) -> Chain {
    Chain::new(
        p.len(),
        0,
        vec![(Simplex::new(vec![Point(p.to_vec())]).unwrap(), 1)],
    )
    .unwrap()
}

/// Signature of a fixed path from `start` to every vertex (BFS tree in
/// vertex and step order).
pub fn reference_signatures(
    g: &GridGraph,
    cache: &EdgeSignatureCache,
    start: u32,
) -> Vec<Option<Vec<f64>>> {
    let mut r: Vec<Option<Vec<f64>>> = vec![None; g.vertex_count()];
    r[start as usize] = Some(vec![0.0; cache.m()]);
    let mut q = VecDeque::from([start]);
    while let Some(v) = q.pop_front() {
        let rv = r[v as usize].clone().unwrap();
        for s in g.steps(v) {
            if r[s.to as usize].is_none() {
                r[s.to as usize] = Some(
                    rv.iter()
                        .zip(cache.get(s.edge, s.forward))
                        .map(|(a, b)| a + b)
                        .collect(),
                );
                q.push_back(s.to);
            }
        }
    }
    r
}

pub fn lattice_offset(c: &[f64], r: &[f64]) -> Vec<i64> {
    c.iter()
        .zip(r)
        .map(|(a, b)| (a - b).round() as i64)
        .collect()
}

#[derive(PartialEq)]
struct Item(f64, Vec<i64>, u32);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0)
            .then_with(|| o.1.cmp(&self.1))
            .then_with(|| o.2.cmp(&self.2))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Dijkstra over the explicit product of the grid with the integer lattice
/// `{z : |z|_∞ ≤ bound}`. Each directed edge shifts `z` by the rounded
/// mismatch between its signature and the reference signatures. Returns
/// the goal classes (as offsets from the goal's reference) in cost order.
pub fn product_dijkstra(
    g: &GridGraph,
    cache: &EdgeSignatureCache,
    start: u32,
    goal: u32,
    bound: i64,
    want: usize,
) -> Vec<(Vec<i64>, f64)> {
    let r = reference_signatures(g, cache, start);
    let m = cache.m();
    let mut dist: HashMap<(u32, Vec<i64>), f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert((start, vec![0; m]), 0.0);
    heap.push(Item(0.0, vec![0; m], start));
    let mut out = Vec::new();
    while let Some(Item(d, z, v)) = heap.pop() {
        if dist.get(&(v, z.clone())).is_some_and(|&x| x < d) {
            continue;
        }
        if v == goal {
            out.push((z.clone(), d));
            if out.len() == want {
                break;
            }
        }
        let rv = r[v as usize].as_ref().unwrap();
        for s in g.steps(v) {
            let ru = r[s.to as usize].as_ref().unwrap();
            let nz: Vec<i64> = (0..m)
                .map(|i| z[i] + (rv[i] + cache.get(s.edge, s.forward)[i] - ru[i]).round() as i64)
                .collect();
            if nz.iter().any(|x| x.abs() > bound) {
                continue;
            }
            let nd = d + g.weight(s.edge);
            let key = (s.to, nz.clone());
            if dist.get(&key).map_or(true, |&x| nd < x) {
                dist.insert(key, nd);
                heap.push(Item(nd, nz, s.to));
            }
        }
    }
    out
}
