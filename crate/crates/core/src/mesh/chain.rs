use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::geometry::gram_volume;
use super::{MeshError, DEGENERACY_RATIO};

/// A point of R^D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Exact identity key used to match shared vertices across simplices.
    /// `-0.0` and `0.0` map to the same key.
    pub(crate) fn key(&self) -> Vec<u64> {
        self.0.iter().map(|x| (x + 0.0).to_bits()).collect()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Point(v.to_vec())
    }
}

/// An oriented linear simplex; orientation is the vertex order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Simplex {
    vertices: Vec<Point>,
}

impl Simplex {
    /// Builds a simplex, checking coordinates and affine independence.
    pub fn new(vertices: Vec<Point>) -> Result<Self, MeshError> {
        let Some(first) = vertices.first() else {
            return Err(MeshError::VertexCount {
                expected: 1,
                found: 0,
            });
        };
        let ambient = first.dim();
        for p in &vertices {
            if p.dim() != ambient {
                return Err(MeshError::PointDimension {
                    expected: ambient,
                    found: p.dim(),
                });
            }
            if p.0.iter().any(|x| !x.is_finite()) {
                return Err(MeshError::NonFinite(p.0.clone()));
            }
        }
        let k = vertices.len() - 1;
        if k > ambient {
            return Err(MeshError::Degenerate);
        }
        let s = Simplex { vertices };
        if k > 0 {
            let diam = s.diameter();
            if diam == 0.0
                || gram_volume(&s.edge_vectors(), k) <= DEGENERACY_RATIO * diam.powi(k as i32)
            {
                return Err(MeshError::Degenerate);
            }
        }
        Ok(s)
    }

    pub(crate) fn new_unchecked(vertices: Vec<Point>) -> Self {
        Simplex { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Geometric dimension k (vertex count minus one).
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn ambient(&self) -> usize {
        self.vertices[0].dim()
    }

    /// Edge vectors `v_i - v_0`, flattened column-major (k columns of length D).
    pub fn edge_vectors(&self) -> Vec<f64> {
        let v0 = &self.vertices[0].0;
        self.vertices[1..]
            .iter()
            .flat_map(|v| v.0.iter().zip(v0).map(|(a, b)| a - b))
            .collect()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.distance(b));
            }
        }
        d
    }

    pub fn reversed(&self) -> Simplex {
        let mut v = self.vertices.clone();
        if v.len() >= 2 {
            v.swap(0, 1);
        }
        Simplex { vertices: v }
    }
}

/// A formal integer combination of oriented simplices of a common dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    ambient: usize,
    dim: usize,
    terms: Vec<(Simplex, i64)>,
}

impl Chain {
    pub fn new(ambient: usize, dim: usize, terms: Vec<(Simplex, i64)>) -> Result<Self, MeshError> {
        for (s, c) in &terms {
            if *c == 0 {
                return Err(MeshError::ZeroCoefficient);
            }
            if s.dim() != dim {
                return Err(MeshError::VertexCount {
                    expected: dim + 1,
                    found: s.vertices.len(),
                });
            }
            if s.ambient() != ambient {
                return Err(MeshError::PointDimension {
                    expected: ambient,
                    found: s.ambient(),
                });
            }
        }
        Ok(Chain {
            ambient,
            dim,
            terms,
        })
    }

    pub fn empty(ambient: usize, dim: usize) -> Self {
        Chain {
            ambient,
            dim,
            terms: Vec::new(),
        }
    }

    /// Convenience: unit coefficients on simplices given as vertex lists.
    pub fn from_simplices(
        ambient: usize,
        dim: usize,
        simplices: Vec<Vec<Point>>,
    ) -> Result<Self, MeshError> {
        let terms = simplices
            .into_iter()
            .map(|v| Simplex::new(v).map(|s| (s, 1)))
            .collect::<Result<Vec<_>, _>>()?;
        Chain::new(ambient, dim, terms)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Simplex, i64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn negated(&self) -> Chain {
        Chain {
            ambient: self.ambient,
            dim: self.dim,
            terms: self.terms.iter().map(|(s, c)| (s.clone(), -c)).collect(),
        }
    }

    /// Formal sum, keeping both term lists (no cancellation).
    pub fn concat(&self, other: &Chain) -> Result<Chain, MeshError> {
        if other.dim != self.dim {
            return Err(MeshError::VertexCount {
                expected: self.dim + 1,
                found: other.dim + 1,
            });
        }
        if other.ambient != self.ambient {
            return Err(MeshError::PointDimension {
                expected: self.ambient,
                found: other.ambient,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Chain {
            ambient: self.ambient,
            dim: self.dim,
            terms,
        })
    }

    /// Simplicial boundary. Facets are identified by the exact bit pattern of
    /// their vertex coordinates, so shared vertices must be shared points.
    pub fn boundary(&self) -> Result<Chain, MeshError> {
        if self.dim == 0 {
            return Err(MeshError::BoundaryOfPoints);
        }
        let mut acc: BTreeMap<Vec<Vec<u64>>, (i64, Simplex)> = BTreeMap::new();
        for (simplex, coef) in &self.terms {
            for skip in 0..=self.dim {
                let facet: Vec<Point> = simplex
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, p)| p.clone())
                    .collect();
                let face_sign = if skip % 2 == 0 { 1 } else { -1 };
                let (key, sorted, parity) = canonical_facet(facet);
                let entry = acc
                    .entry(key)
                    .or_insert_with(|| (0, Simplex::new_unchecked(sorted)));
                entry.0 += coef * face_sign * parity;
            }
        }
        let terms = acc
            .into_values()
            .filter(|(c, _)| *c != 0)
            .map(|(c, s)| (s, c))
            .collect();
        Ok(Chain {
            ambient: self.ambient,
            dim: self.dim - 1,
            terms,
        })
    }

    /// True when the boundary cancels exactly. 0-chains count as cycles.
    pub fn is_cycle(&self) -> bool {
        match self.boundary() {
            Ok(b) => b.is_empty(),
            Err(_) => true,
        }
    }

    /// All vertices of all terms, with repetition.
    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.terms.iter().flat_map(|(s, _)| s.vertices.iter())
    }
}

/// Sorts facet vertices by identity key and returns the permutation parity.
fn canonical_facet(vertices: Vec<Point>) -> (Vec<Vec<u64>>, Vec<Point>, i64) {
    let keys: Vec<Vec<u64>> = vertices.iter().map(Point::key).collect();
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let parity = permutation_sign(&order);
    let sorted_keys = order.iter().map(|&i| keys[i].clone()).collect();
    let sorted = order.iter().map(|&i| vertices[i].clone()).collect();
    (sorted_keys, sorted, parity)
}

pub(crate) fn permutation_sign(order: &[usize]) -> i64 {
    let mut inversions = 0usize;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if order[i] > order[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point(c.to_vec())
    }

    #[test]
    fn segment_boundary_is_end_minus_start() {
        let c = Chain::from_simplices(2, 1, vec![vec![p(&[0.0, 0.0]), p(&[1.0, 0.0])]]).unwrap();
        let b = c.boundary().unwrap();
        assert_eq!(b.dim(), 0);
        assert_eq!(b.len(), 2);
        let mut found = b
            .terms()
            .iter()
            .map(|(s, c)| (s.vertices()[0].0.clone(), *c))
            .collect::<Vec<_>>();
        found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert_eq!(found, vec![(vec![0.0, 0.0], -1), (vec![1.0, 0.0], 1)]);
    }

    #[test]
    fn triangle_loop_is_cycle() {
        let a = p(&[0.0, 0.0]);
        let b = p(&[1.0, 0.0]);
        let c = p(&[0.0, 1.0]);
        let chain = Chain::from_simplices(
            2,
            1,
            vec![vec![a.clone(), b.clone()], vec![b, c.clone()], vec![c, a]],
        )
        .unwrap();
        assert!(chain.boundary().unwrap().is_empty());
    }

    #[test]
    fn boundary_of_boundary_of_triangle_vanishes() {
        let t = Chain::from_simplices(
            3,
            2,
            vec![vec![
                p(&[0.0, 0.0, 0.0]),
                p(&[1.0, 0.0, 0.0]),
                p(&[0.0, 1.0, 0.0]),
            ]],
        )
        .unwrap();
        let b = t.boundary().unwrap();
        assert_eq!(b.len(), 3);
        assert!(b.boundary().unwrap().is_empty());
    }

    #[test]
    fn negative_zero_matches_positive_zero() {
        let chain = Chain::from_simplices(
            2,
            1,
            vec![
                vec![p(&[0.0, 0.0]), p(&[1.0, 0.0])],
                vec![p(&[1.0, 0.0]), p(&[-0.0, 0.0])],
            ],
        )
        .unwrap();
        assert!(chain.is_cycle());
    }

    #[test]
    fn degenerate_simplices_rejected() {
        let err = Simplex::new(vec![p(&[0.0, 0.0]), p(&[1.0, 1.0]), p(&[2.0, 2.0])]);
        assert_eq!(err, Err(MeshError::Degenerate));
        let err = Simplex::new(vec![p(&[1.0, 1.0]), p(&[1.0, 1.0])]);
        assert_eq!(err, Err(MeshError::Degenerate));
    }

    #[test]
    fn zero_coefficient_rejected() {
        let s = Simplex::new(vec![p(&[0.0, 0.0]), p(&[1.0, 0.0])]).unwrap();
        assert_eq!(
            Chain::new(2, 1, vec![(s, 0)]),
            Err(MeshError::ZeroCoefficient)
        );
    }

    #[test]
    fn boundary_of_points_is_an_error() {
        let c = Chain::from_simplices(2, 0, vec![vec![p(&[0.0, 0.0])]]).unwrap();
        assert_eq!(c.boundary(), Err(MeshError::BoundaryOfPoints));
        assert!(c.is_cycle());
    }
}
