//! The linking-type invariant of an (N−1)-cycle around a (D−N)-skeleton.
//!
//! For a candidate simplex σ and a skeleton simplex τ the pulled-back
//! integrand is
//!
//! ```text
//! (−1)^(D−N) Σ_k Σ_ρ (−1)^(k+1) sgn(ρ) G_k(x − x′) det(J_τ[ρ_l]) det(J_σ[ρ_r])
//! ```
//!
//! with ρ ranging over `part^(D−N)` of the index set without `k`, and
//! `G_k(s) = s_k / (A_(D−1) |s|^D)`. Linear simplices have constant
//! Jacobians, so per pair only the vector `∫∫ s / |s|^D` needs quadrature.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{partitions_without, OrderedPartition};
use crate::mesh::geometry::{bounding_ball, det_in_place, dist, simplex_distance};
use crate::mesh::{Chain, Simplex, SkeletonSet};
use crate::quadrature::{simplex_rule, QuadConfig, QuadConfigError, QuadStats, SimplexRule};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("singular proximity: distance {distance:e}{}", location(.skeleton, .sigma, .tau))]
    SingularProximity {
        distance: f64,
        skeleton: Option<String>,
        sigma: Option<usize>,
        tau: Option<usize>,
    },
    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid (D, N) = ({d}, {n}): need 2 <= N <= D <= {MAX_DIM}")]
    Codimension { d: usize, n: usize },
    #[error("index {k} out of range 1..={d}")]
    Index { k: usize, d: usize },
    #[error(transparent)]
    Config(#[from] QuadConfigError),
    #[error("thread pool: {0}")]
    Threads(String),
}

fn location(skeleton: &Option<String>, sigma: &Option<usize>, tau: &Option<usize>) -> String {
    let mut s = String::new();
    if let Some(l) = skeleton {
        s += &format!(" to skeleton {l}");
    }
    if let Some(i) = sigma {
        s += &format!(", candidate simplex {i}");
    }
    if let Some(j) = tau {
        s += &format!(", skeleton simplex {j}");
    }
    s
}

impl EngineError {
    fn singular(distance: f64) -> Self {
        EngineError::SingularProximity {
            distance,
            skeleton: None,
            sigma: None,
            tau: None,
        }
    }

    fn with_skeleton(self, label: &str) -> Self {
        match self {
            EngineError::SingularProximity {
                distance,
                sigma,
                tau,
                ..
            } => EngineError::SingularProximity {
                distance,
                skeleton: Some(label.to_string()),
                sigma,
                tau,
            },
            e => e,
        }
    }
}

/// Signature values, one per skeleton.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signature {
    pub values: Vec<f64>,
}

impl Signature {
    pub fn zeros(m: usize) -> Self {
        Signature {
            values: vec![0.0; m],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn rounded(&self) -> Vec<i64> {
        self.values.iter().map(|v| v.round() as i64).collect()
    }

    /// Largest distance of an entry to its nearest integer.
    pub fn integer_residual(&self) -> f64 {
        self.values
            .iter()
            .map(|v| (v - v.round()).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_integral(&self, eps: f64) -> bool {
        self.integer_residual() <= eps
    }
}

/// `A_(D−1) = D π^(D/2) / Γ(D/2 + 1)`, the area of the unit sphere in R^D.
pub fn unit_sphere_volume(d: usize) -> f64 {
    use std::f64::consts::PI;
    // Γ(D/2 + 1) by the recurrence Γ(x + 1) = x Γ(x) from Γ(1) or Γ(1/2).
    let mut gamma = if d % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if d % 2 == 0 { 1.0 } else { 0.5 };
    let target = d as f64 / 2.0 + 1.0;
    while x < target - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    d as f64 * PI.powf(d as f64 / 2.0) / gamma
}

/// `G_k(s) = s_k / (A_(D−1) |s|^D)` with one-based `k`.
pub fn g_k(s: &[f64], k: usize, singular_eps: f64) -> Result<f64, EngineError> {
    let d = s.len();
    if k == 0 || k > d {
        return Err(EngineError::Index { k, d });
    }
    let r2: f64 = s.iter().map(|x| x * x).sum();
    if r2.sqrt() <= singular_eps {
        return Err(EngineError::singular(r2.sqrt()));
    }
    Ok(s[k - 1] / (unit_sphere_volume(d) * pow_d(r2, d)))
}

/// `|s|^D` from `|s|^2`.
#[inline]
fn pow_d(r2: f64, d: usize) -> f64 {
    let h = r2.powi((d / 2) as i32);
    if d % 2 == 0 {
        h
    } else {
        h * r2.sqrt()
    }
}

/// One term of the expanded integrand: `sign · det(J_τ[left]) · det(J_σ[right])`
/// contributes to component `k` (zero-based).
#[derive(Debug, Clone)]
struct Term {
    k: usize,
    sign: f64,
    left: usize,
    right: usize,
}

/// Index bookkeeping for one `(D, N)`.
#[derive(Debug)]
struct Plan {
    /// Zero-based row subsets of size D−N (skeleton minors), lexicographic.
    left_sets: Vec<Vec<usize>>,
    /// Zero-based row subsets of size N−1 (candidate minors), lexicographic.
    right_sets: Vec<Vec<usize>>,
    terms: Vec<Term>,
}

fn subsets(d: usize, w: usize) -> Vec<Vec<usize>> {
    let all: Vec<usize> = (0..d).collect();
    crate::combinatorics::partitions(&all, w)
        .expect("w <= d")
        .into_iter()
        .map(|p| p.left)
        .collect()
}

fn plan(d: usize, n: usize) -> Arc<Plan> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize), Arc<Plan>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.read().unwrap_or_else(|e| e.into_inner()).get(&(d, n)) {
        return p.clone();
    }
    let w = d - n;
    let left_sets = subsets(d, w);
    let right_sets = subsets(d, n - 1);
    let rank =
        |sets: &Vec<Vec<usize>>, s: &[usize]| sets.iter().position(|x| x == s).expect("subset");
    let global = if w % 2 == 0 { 1.0 } else { -1.0 };
    let mut terms = Vec::new();
    for k in 1..=d {
        let k_sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
        for rho in partitions_without(d, k, w).expect("w <= d - 1").iter() {
            let l: Vec<usize> = rho.left.iter().map(|i| i - 1).collect();
            let r: Vec<usize> = rho.right.iter().map(|i| i - 1).collect();
            terms.push(Term {
                k: k - 1,
                sign: global * k_sign * f64::from(rho.sign),
                left: rank(&left_sets, &l),
                right: rank(&right_sets, &r),
            });
        }
    }
    let p = Arc::new(Plan {
        left_sets,
        right_sets,
        terms,
    });
    cache
        .write()
        .unwrap_or_else(|e| e.into_inner())
        .insert((d, n), p.clone());
    p
}

/// `det(J[rows])` where the columns of `J` are `v_i − v_0`.
fn minor(verts: &[f64], d: usize, rows: &[usize]) -> f64 {
    let k = rows.len();
    if k == 0 {
        return 1.0;
    }
    let mut m = vec![0.0; k * k];
    for (r, &row) in rows.iter().enumerate() {
        for c in 0..k {
            m[r * k + c] = verts[(c + 1) * d + row] - verts[row];
        }
    }
    det_in_place(&mut m, k)
}

fn flatten(s: &Simplex) -> Vec<f64> {
    s.vertices()
        .iter()
        .flat_map(|p| p.coords().iter().copied())
        .collect()
}

/// A simplex (or a bisected piece of one) with its quadrature nodes placed.
#[derive(Debug, Clone)]
struct Piece {
    verts: Vec<f64>,
    center: Vec<f64>,
    radius: f64,
    diam: f64,
    longest: (usize, usize),
    scale: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Piece {
    fn new(verts: Vec<f64>, d: usize, scale: f64, rule: &SimplexRule) -> Self {
        let nv = verts.len() / d;
        let vs: Vec<&[f64]> = verts.chunks(d).collect();
        let (center, radius) = bounding_ball(&vs);
        let mut diam = 0.0;
        let mut longest = (0, 0);
        for a in 0..nv {
            for b in a + 1..nv {
                let l = dist(vs[a], vs[b]);
                if l > diam {
                    diam = l;
                    longest = (a, b);
                }
            }
        }
        let mut nodes = vec![0.0; rule.len() * d];
        for i in 0..rule.len() {
            let out = &mut nodes[i * d..(i + 1) * d];
            for (b, v) in rule.node(i).iter().zip(&vs) {
                for (o, x) in out.iter_mut().zip(v.iter()) {
                    *o += b * x;
                }
            }
        }
        let weights = rule.weights.iter().map(|w| w * scale).collect();
        Piece {
            verts,
            center,
            radius,
            diam,
            longest,
            scale,
            nodes,
            weights,
        }
    }

    /// Bisects the longest edge. Both halves keep the parent orientation and
    /// carry half its Jacobian.
    fn split(&self, d: usize, rule: &SimplexRule) -> (Piece, Piece) {
        let (a, b) = self.longest;
        let mid: Vec<f64> = (0..d)
            .map(|t| 0.5 * (self.verts[a * d + t] + self.verts[b * d + t]))
            .collect();
        let mut v1 = self.verts.clone();
        v1[b * d..(b + 1) * d].copy_from_slice(&mid);
        let mut v2 = self.verts.clone();
        v2[a * d..(a + 1) * d].copy_from_slice(&mid);
        (
            Piece::new(v1, d, 0.5 * self.scale, rule),
            Piece::new(v2, d, 0.5 * self.scale, rule),
        )
    }
}

#[derive(Debug, Clone)]
struct Cell {
    coef: f64,
    minors: Vec<f64>,
    piece: Piece,
}

/// A chain with quadrature nodes and Jacobian minors precomputed.
#[derive(Debug, Clone)]
pub struct PreparedChain {
    d: usize,
    dim: usize,
    cells: Vec<Cell>,
}

impl PreparedChain {
    fn new(c: &Chain, row_sets: &[Vec<usize>], order: usize) -> Self {
        let d = c.ambient();
        let rule = simplex_rule(c.dim(), order);
        let cells = c
            .terms()
            .iter()
            .map(|(s, coef)| {
                let verts = flatten(s);
                let minors = row_sets.iter().map(|r| minor(&verts, d, r)).collect();
                Cell {
                    coef: *coef as f64,
                    minors,
                    piece: Piece::new(verts, d, 1.0, &rule),
                }
            })
            .collect();
        PreparedChain {
            d,
            dim: c.dim(),
            cells,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Adaptive evaluation of `∫_a ∫_b s / |s|^D` with `s = x_a − x_b`.
struct Integrator<'q> {
    d: usize,
    q: &'q QuadConfig,
    rule_a: Arc<SimplexRule>,
    rule_b: Arc<SimplexRule>,
}

impl Integrator<'_> {
    fn integrate(
        &self,
        a: &Piece,
        b: &Piece,
        depth: usize,
        acc: &mut [f64],
        st: &mut QuadStats,
    ) -> Result<(), f64> {
        let gap = dist(&a.center, &b.center) - a.radius - b.radius;
        let big = a.diam.max(b.diam);
        if big > self.q.split_ratio * gap.max(0.0) {
            if depth < self.q.max_depth {
                st.subdivisions += 1;
                if a.diam >= b.diam {
                    let (a1, a2) = a.split(self.d, &self.rule_a);
                    self.integrate(&a1, b, depth + 1, acc, st)?;
                    self.integrate(&a2, b, depth + 1, acc, st)?;
                } else {
                    let (b1, b2) = b.split(self.d, &self.rule_b);
                    self.integrate(a, &b1, depth + 1, acc, st)?;
                    self.integrate(a, &b2, depth + 1, acc, st)?;
                }
                return Ok(());
            }
            st.depth_limited += 1;
            if gap <= self.q.singular_eps {
                let va: Vec<&[f64]> = a.verts.chunks(self.d).collect();
                let vb: Vec<&[f64]> = b.verts.chunks(self.d).collect();
                let exact = simplex_distance(&va, &vb);
                if exact <= self.q.singular_eps {
                    return Err(exact);
                }
            }
        }
        st.leaves += 1;
        st.max_depth = st.max_depth.max(depth as u32);
        self.leaf(a, b, acc)
    }

    fn leaf(&self, a: &Piece, b: &Piece, acc: &mut [f64]) -> Result<(), f64> {
        match self.d {
            2 => leaf_fixed::<2>(a, b, self.q.singular_eps, acc),
            3 => leaf_fixed::<3>(a, b, self.q.singular_eps, acc),
            4 => leaf_fixed::<4>(a, b, self.q.singular_eps, acc),
            5 => leaf_fixed::<5>(a, b, self.q.singular_eps, acc),
            d => leaf_dyn(d, a, b, self.q.singular_eps, acc),
        }
    }
}

fn leaf_fixed<const D: usize>(a: &Piece, b: &Piece, eps: f64, acc: &mut [f64]) -> Result<(), f64> {
    let eps2 = eps * eps;
    let mut local = [0.0f64; D];
    for (xa, wa) in a.nodes.chunks_exact(D).zip(&a.weights) {
        let xa: &[f64; D] = xa.try_into().expect("chunk of D");
        for (xb, wb) in b.nodes.chunks_exact(D).zip(&b.weights) {
            let xb: &[f64; D] = xb.try_into().expect("chunk of D");
            let mut s = [0.0f64; D];
            let mut r2 = 0.0;
            for t in 0..D {
                s[t] = xa[t] - xb[t];
                r2 += s[t] * s[t];
            }
            if r2 <= eps2 {
                return Err(r2.sqrt());
            }
            let f = wa * wb / pow_d(r2, D);
            for t in 0..D {
                local[t] += f * s[t];
            }
        }
    }
    for t in 0..D {
        acc[t] += local[t];
    }
    Ok(())
}

fn leaf_dyn(d: usize, a: &Piece, b: &Piece, eps: f64, acc: &mut [f64]) -> Result<(), f64> {
    let eps2 = eps * eps;
    let mut s = [0.0f64; MAX_DIM];
    let mut local = [0.0f64; MAX_DIM];
    for (xa, wa) in a.nodes.chunks_exact(d).zip(&a.weights) {
        for (xb, wb) in b.nodes.chunks_exact(d).zip(&b.weights) {
            let mut r2 = 0.0;
            for t in 0..d {
                s[t] = xa[t] - xb[t];
                r2 += s[t] * s[t];
            }
            if r2 <= eps2 {
                return Err(r2.sqrt());
            }
            let f = wa * wb / pow_d(r2, d);
            for t in 0..d {
                local[t] += f * s[t];
            }
        }
    }
    for t in 0..d {
        acc[t] += local[t];
    }
    Ok(())
}

/// The (N−1)-form dual to one skeleton, ready to be integrated.
#[derive(Debug, Clone)]
pub struct FormField {
    d: usize,
    n: usize,
    quad: QuadConfig,
    plan: Arc<Plan>,
    skeleton: PreparedChain,
    inv_area: f64,
}

impl FormField {
    pub fn new(
        skeleton: &Chain,
        d: usize,
        n: usize,
        quad: QuadConfig,
    ) -> Result<Self, EngineError> {
        quad.validate()?;
        if n < 2 || n > d || d > MAX_DIM {
            return Err(EngineError::Codimension { d, n });
        }
        if skeleton.ambient() != d {
            return Err(EngineError::DimensionMismatch {
                what: "skeleton ambient dimension",
                expected: d,
                found: skeleton.ambient(),
            });
        }
        if skeleton.dim() != d - n {
            return Err(EngineError::DimensionMismatch {
                what: "skeleton dimension",
                expected: d - n,
                found: skeleton.dim(),
            });
        }
        let plan = plan(d, n);
        let prepared = PreparedChain::new(skeleton, &plan.left_sets, quad.order);
        Ok(FormField {
            d,
            n,
            quad,
            skeleton: prepared,
            plan,
            inv_area: 1.0 / unit_sphere_volume(d),
        })
    }

    pub fn ambient(&self) -> usize {
        self.d
    }

    pub fn codim(&self) -> usize {
        self.n
    }

    pub fn quad(&self) -> &QuadConfig {
        &self.quad
    }

    fn integrator(&self, cand_dim: usize) -> Integrator<'_> {
        Integrator {
            d: self.d,
            q: &self.quad,
            rule_a: simplex_rule(cand_dim, self.quad.order),
            rule_b: simplex_rule(self.d - self.n, self.quad.order),
        }
    }

    fn point_piece(&self, x: &[f64]) -> Result<Piece, EngineError> {
        if x.len() != self.d {
            return Err(EngineError::DimensionMismatch {
                what: "point dimension",
                expected: self.d,
                found: x.len(),
            });
        }
        Ok(Piece::new(x.to_vec(), self.d, 1.0, &simplex_rule(0, 1)))
    }

    /// `∫_τ s / |s|^D dτ` (no minors) for every skeleton simplex.
    fn point_integrals(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, EngineError> {
        let p = self.point_piece(x)?;
        let integ = self.integrator(0);
        let mut st = QuadStats::default();
        self.skeleton
            .cells
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let mut v = vec![0.0; self.d];
                integ
                    .integrate(&p, &c.piece, 0, &mut v, &mut st)
                    .map_err(|dist| EngineError::SingularProximity {
                        distance: dist,
                        skeleton: None,
                        sigma: None,
                        tau: Some(j),
                    })?;
                Ok(v)
            })
            .collect()
    }

    /// `U^k_ρ(x) = (−1)^(k+1) sgn(ρ) ∫_S G_k(x − x′) dx′_(ρ_l)` with
    /// one-based `k` and `ρ` drawn from `part^(D−N)` of the index set without `k`.
    pub fn u_k_rho(&self, x: &[f64], k: usize, rho: &OrderedPartition) -> Result<f64, EngineError> {
        if k == 0 || k > self.d {
            return Err(EngineError::Index { k, d: self.d });
        }
        if rho.left.len() != self.d - self.n {
            return Err(EngineError::DimensionMismatch {
                what: "partition left width",
                expected: self.d - self.n,
                found: rho.left.len(),
            });
        }
        if let Some(&bad) = rho.left.iter().find(|&&i| i == 0 || i > self.d || i == k) {
            return Err(EngineError::Index { k: bad, d: self.d });
        }
        let rows: Vec<usize> = rho.left.iter().map(|i| i - 1).collect();
        let ints = self.point_integrals(x)?;
        let mut total = 0.0;
        for (c, v) in self.skeleton.cells.iter().zip(&ints) {
            total += c.coef * minor(&c.piece.verts, self.d, &rows) * v[k - 1];
        }
        let k_sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
        Ok(k_sign * f64::from(rho.sign) * total * self.inv_area)
    }

    /// Coefficients of the form at `x`: `ψ = Σ_I ψ_I dx_I` over ascending
    /// one-based index sets `I` of size N−1.
    pub fn psi_coefficients(&self, x: &[f64]) -> Result<Vec<(Vec<usize>, f64)>, EngineError> {
        let ints = self.point_integrals(x)?;
        let mut psi = vec![0.0; self.plan.right_sets.len()];
        for (c, v) in self.skeleton.cells.iter().zip(&ints) {
            for t in &self.plan.terms {
                psi[t.right] += t.sign * c.coef * c.minors[t.left] * v[t.k];
            }
        }
        Ok(self
            .plan
            .right_sets
            .iter()
            .zip(psi)
            .map(|(set, v)| (set.iter().map(|i| i + 1).collect(), v * self.inv_area))
            .collect())
    }

    pub fn prepare(&self, omega: &Chain) -> Result<PreparedChain, EngineError> {
        if omega.ambient() != self.d {
            return Err(EngineError::DimensionMismatch {
                what: "candidate ambient dimension",
                expected: self.d,
                found: omega.ambient(),
            });
        }
        if omega.dim() != self.n - 1 {
            return Err(EngineError::DimensionMismatch {
                what: "candidate dimension",
                expected: self.n - 1,
                found: omega.dim(),
            });
        }
        Ok(PreparedChain::new(
            omega,
            &self.plan.right_sets,
            self.quad.order,
        ))
    }

    /// Contribution of candidate cell `i` against the whole skeleton.
    fn cell_contribution(
        &self,
        omega: &PreparedChain,
        i: usize,
        integ: &Integrator<'_>,
    ) -> Result<(f64, QuadStats), EngineError> {
        let sigma = &omega.cells[i];
        let mut st = QuadStats::default();
        let mut total = 0.0;
        let mut v = [0.0f64; MAX_DIM];
        let mut ck = [0.0f64; MAX_DIM];
        for (j, tau) in self.skeleton.cells.iter().enumerate() {
            ck[..self.d].iter_mut().for_each(|c| *c = 0.0);
            for t in &self.plan.terms {
                ck[t.k] += t.sign * tau.minors[t.left] * sigma.minors[t.right];
            }
            if ck[..self.d].iter().all(|&c| c == 0.0) {
                continue;
            }
            v[..self.d].iter_mut().for_each(|x| *x = 0.0);
            st.pairs += 1;
            integ
                .integrate(&sigma.piece, &tau.piece, 0, &mut v[..self.d], &mut st)
                .map_err(|dist| EngineError::SingularProximity {
                    distance: dist,
                    skeleton: None,
                    sigma: Some(i),
                    tau: Some(j),
                })?;
            let pair: f64 = (0..self.d).map(|k| ck[k] * v[k]).sum();
            total += sigma.coef * tau.coef * pair;
        }
        Ok((total * self.inv_area, st))
    }

    fn check_prepared(&self, omega: &PreparedChain) -> Result<(), EngineError> {
        if omega.d != self.d || (!omega.is_empty() && omega.dim != self.n - 1) {
            return Err(EngineError::DimensionMismatch {
                what: "prepared candidate dimension",
                expected: self.n - 1,
                found: omega.dim,
            });
        }
        Ok(())
    }

    /// `φ_S(ω)` on the calling thread.
    pub fn phi_prepared(&self, omega: &PreparedChain) -> Result<(f64, QuadStats), EngineError> {
        self.check_prepared(omega)?;
        let integ = self.integrator(self.n - 1);
        let mut total = 0.0;
        let mut st = QuadStats::default();
        for i in 0..omega.len() {
            let (v, s) = self.cell_contribution(omega, i, &integ)?;
            total += v;
            st.merge(&s);
        }
        Ok((total, st))
    }

    /// `φ_S(ω)` with candidate simplices spread over the current rayon pool.
    /// Per-simplex results are summed in index order, so the value does not
    /// depend on the number of threads.
    pub fn phi_prepared_par(&self, omega: &PreparedChain) -> Result<(f64, QuadStats), EngineError> {
        self.check_prepared(omega)?;
        let integ = self.integrator(self.n - 1);
        let parts: Vec<Result<(f64, QuadStats), EngineError>> = (0..omega.len())
            .into_par_iter()
            .map(|i| self.cell_contribution(omega, i, &integ))
            .collect();
        let mut total = 0.0;
        let mut st = QuadStats::default();
        for p in parts {
            let (v, s) = p?;
            total += v;
            st.merge(&s);
        }
        Ok((total, st))
    }

    pub fn phi(&self, omega: &Chain) -> Result<f64, EngineError> {
        Ok(self.phi_prepared(&self.prepare(omega)?)?.0)
    }
}

/// `φ_S(ω)` for a single skeleton chain.
pub fn phi_s(
    omega: &Chain,
    skeleton: &Chain,
    d: usize,
    n: usize,
    quad: QuadConfig,
) -> Result<f64, EngineError> {
    FormField::new(skeleton, d, n, quad)?.phi(omega)
}

/// `(φ_S1(ω), ..., φ_Sm(ω))` on the calling thread.
pub fn phi_vector(
    omega: &Chain,
    set: &SkeletonSet,
    d: usize,
    n: usize,
    quad: QuadConfig,
) -> Result<Signature, EngineError> {
    Ok(Engine::new(set, d, n, quad, 1)?.signature(omega)?.0)
}

/// Pulled-back integrand at barycentric nodes `t` on σ and `u` on τ, i.e. the
/// value whose integral over the reference simplices gives the pair's
/// contribution to `φ`.
pub fn pair_integrand(
    sigma: &Simplex,
    tau: &Simplex,
    t: &[f64],
    u: &[f64],
    singular_eps: f64,
) -> Result<f64, EngineError> {
    let d = sigma.ambient();
    let n = sigma.dim() + 1;
    if tau.ambient() != d || tau.dim() + n != d || n < 2 {
        return Err(EngineError::DimensionMismatch {
            what: "skeleton simplex dimension",
            expected: d.saturating_sub(n),
            found: tau.dim(),
        });
    }
    if t.len() != sigma.dim() + 1 || u.len() != tau.dim() + 1 {
        return Err(EngineError::DimensionMismatch {
            what: "barycentric coordinate count",
            expected: sigma.dim() + 1,
            found: t.len(),
        });
    }
    let p = plan(d, n);
    let vs = flatten(sigma);
    let vt = flatten(tau);
    let ms: Vec<f64> = p.right_sets.iter().map(|r| minor(&vs, d, r)).collect();
    let mt: Vec<f64> = p.left_sets.iter().map(|r| minor(&vt, d, r)).collect();
    let at = |verts: &[f64], b: &[f64]| -> Vec<f64> {
        (0..d)
            .map(|k| {
                b.iter()
                    .enumerate()
                    .map(|(i, w)| w * verts[i * d + k])
                    .sum()
            })
            .collect()
    };
    let x = at(&vs, t);
    let xp = at(&vt, u);
    let s: Vec<f64> = x.iter().zip(&xp).map(|(a, b)| a - b).collect();
    let mut total = 0.0;
    for term in &p.terms {
        total += term.sign * g_k(&s, term.k + 1, singular_eps)? * mt[term.left] * ms[term.right];
    }
    Ok(total)
}

fn pool(threads: usize) -> Result<Arc<rayon::ThreadPool>, EngineError> {
    static POOLS: OnceLock<RwLock<HashMap<usize, Arc<rayon::ThreadPool>>>> = OnceLock::new();
    let pools = POOLS.get_or_init(Default::default);
    if let Some(p) = pools
        .read()
        .unwrap_or_else(|e| e.into_inner())
        .get(&threads)
    {
        return Ok(p.clone());
    }
    let p = Arc::new(
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| EngineError::Threads(e.to_string()))?,
    );
    pools
        .write()
        .unwrap_or_else(|e| e.into_inner())
        .insert(threads, p.clone());
    Ok(p)
}

/// One form field per skeleton plus a worker pool. `threads == 0` uses the
/// available parallelism.
pub struct Engine {
    fields: Vec<FormField>,
    labels: Vec<String>,
    pool: Arc<rayon::ThreadPool>,
}

impl Engine {
    pub fn new(
        set: &SkeletonSet,
        d: usize,
        n: usize,
        quad: QuadConfig,
        threads: usize,
    ) -> Result<Self, EngineError> {
        let fields = set
            .skeletons
            .iter()
            .enumerate()
            .map(|(i, s)| FormField::new(s, d, n, quad).map_err(|e| e.with_skeleton(set.label(i))))
            .collect::<Result<Vec<_>, _>>()?;
        let labels = (0..set.len()).map(|i| set.label(i).to_string()).collect();
        Ok(Engine {
            fields,
            labels,
            pool: pool(threads)?,
        })
    }

    pub fn fields(&self) -> &[FormField] {
        &self.fields
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Signature of one chain, parallel over its simplices.
    pub fn signature(&self, omega: &Chain) -> Result<(Signature, QuadStats), EngineError> {
        let mut values = Vec::with_capacity(self.fields.len());
        let mut st = QuadStats::default();
        let Some(first) = self.fields.first() else {
            return Ok((Signature::zeros(0), st));
        };
        let prepared = first.prepare(omega)?;
        for (f, label) in self.fields.iter().zip(&self.labels) {
            let (v, s) = self
                .pool
                .install(|| f.phi_prepared_par(&prepared))
                .map_err(|e| e.with_skeleton(label))?;
            values.push(v);
            st.merge(&s);
        }
        Ok((Signature { values }, st))
    }

    /// Signatures of many small chains, parallel over chains.
    pub fn signatures(&self, omegas: &[Chain]) -> Vec<Result<(Signature, QuadStats), EngineError>> {
        self.pool.install(|| {
            omegas
                .par_iter()
                .map(|omega| {
                    let mut values = Vec::with_capacity(self.fields.len());
                    let mut st = QuadStats::default();
                    for (f, label) in self.fields.iter().zip(&self.labels) {
                        let p = f.prepare(omega)?;
                        let (v, s) = f.phi_prepared(&p).map_err(|e| e.with_skeleton(label))?;
                        values.push(v);
                        st.merge(&s);
                    }
                    Ok((Signature { values }, st))
                })
                .collect()
        })
    }
}
