//! Closed forms for D ≤ 3: the residue 1-form, the Biot–Savart field of a
//! polygonal wire and the Coulomb flux form, plus exact integrals of them
//! over polygonal cycles and triangulated surfaces.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::geometry::simplex_distance;
use crate::mesh::Chain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormKind {
    /// D = 2, N = 2.
    Residue,
    /// D = 3, N = 2.
    BiotSavart,
    /// D = 3, N = 3.
    GaussFlux,
}

impl ClosedFormKind {
    pub fn for_dims(d: usize, n: usize) -> Option<Self> {
        match (d, n) {
            (2, 2) => Some(ClosedFormKind::Residue),
            (3, 2) => Some(ClosedFormKind::BiotSavart),
            (3, 3) => Some(ClosedFormKind::GaussFlux),
            _ => None,
        }
    }

    pub fn dims(self) -> (usize, usize) {
        match self {
            ClosedFormKind::Residue => (2, 2),
            ClosedFormKind::BiotSavart => (3, 2),
            ClosedFormKind::GaussFlux => (3, 3),
        }
    }

    /// Rearranges general-engine coefficients `(I, ψ_I)` (one-based, ascending
    /// `I`) into the vector layout of the closed form: `(dx1, dx2)`,
    /// `(dx1, dx2, dx3)`, or `(dx2∧dx3, dx3∧dx1, dx1∧dx2)`.
    pub fn from_psi(self, psi: &[(Vec<usize>, f64)]) -> Vec<f64> {
        let get = |set: &[usize]| {
            psi.iter()
                .find(|(i, _)| i == set)
                .map(|(_, v)| *v)
                .unwrap_or(0.0)
        };
        match self {
            ClosedFormKind::Residue => vec![get(&[1]), get(&[2])],
            ClosedFormKind::BiotSavart => vec![get(&[1]), get(&[2]), get(&[3])],
            ClosedFormKind::GaussFlux => vec![get(&[2, 3]), -get(&[1, 3]), get(&[1, 2])],
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LowDimError {
    #[error("evaluation point within {distance:e} of the source")]
    Coincident { distance: f64 },
    #[error("expected a {expected}, got a {found}")]
    Shape {
        expected: &'static str,
        found: String,
    },
}

fn shape(c: &Chain, ambient: usize, dim: usize, expected: &'static str) -> Result<(), LowDimError> {
    if c.ambient() != ambient || c.dim() != dim {
        return Err(LowDimError::Shape {
            expected,
            found: format!("{}-chain in R^{}", c.dim(), c.ambient()),
        });
    }
    Ok(())
}

/// `(1/2π) (−(x2 − s2), x1 − s1) / |x − s|²`, the coefficients of `dx1, dx2`.
pub fn residue_form(x: [f64; 2], s: [f64; 2]) -> Result<[f64; 2], LowDimError> {
    let (a, b) = (x[0] - s[0], x[1] - s[1]);
    let r2 = a * a + b * b;
    if r2 == 0.0 {
        return Err(LowDimError::Coincident { distance: 0.0 });
    }
    let f = 1.0 / (2.0 * PI * r2);
    Ok([-b * f, a * f])
}

/// `(1/4π) (x − s) / |x − s|³`, paired with `(dx2∧dx3, dx3∧dx1, dx1∧dx2)`.
pub fn gauss_flux_form(x: [f64; 3], s: [f64; 3]) -> Result<[f64; 3], LowDimError> {
    let r = sub(x, s);
    let n = norm(r);
    if n == 0.0 {
        return Err(LowDimError::Coincident { distance: 0.0 });
    }
    let f = 1.0 / (4.0 * PI * n * n * n);
    Ok([r[0] * f, r[1] * f, r[2] * f])
}

/// Field of a unit current along a polygonal wire (a 1-chain in R^3),
/// `(1/4π) ∫ dl′ × (x − x′) / |x − x′|³`, summed in closed form per segment.
pub fn biot_savart_field(
    x: [f64; 3],
    wire: &Chain,
    singular_eps: f64,
) -> Result<[f64; 3], LowDimError> {
    shape(wire, 3, 1, "1-chain in R^3")?;
    let mut b = [0.0; 3];
    for (seg, coef) in wire.terms() {
        let v = seg.vertices();
        let p = [v[0].0[0], v[0].0[1], v[0].0[2]];
        let q = [v[1].0[0], v[1].0[1], v[1].0[2]];
        let dseg = simplex_distance(&[&x[..]], &[&p[..], &q[..]]);
        if dseg <= singular_eps {
            return Err(LowDimError::Coincident { distance: dseg });
        }
        let u = sub(q, p);
        let r1 = sub(x, p);
        let r2 = sub(x, q);
        let c = cross(u, r1);
        let h2 = dot(c, c);
        // On the wire's line but off the segment: the field vanishes.
        if h2 <= 1e-30 * dot(u, u) * dot(r1, r1) {
            continue;
        }
        let f = (dot(u, r1) / norm(r1) - dot(u, r2) / norm(r2)) / (4.0 * PI * h2) * *coef as f64;
        for t in 0..3 {
            b[t] += f * c[t];
        }
    }
    Ok(b)
}

/// Winding number of a closed 1-chain in R^2 around `s`, exact for
/// polygons: the sum of signed segment angles over 2π.
pub fn winding_number(loop_: &Chain, s: [f64; 2]) -> Result<f64, LowDimError> {
    shape(loop_, 2, 1, "1-chain in R^2")?;
    let mut total = 0.0;
    for (seg, coef) in loop_.terms() {
        let v = seg.vertices();
        let a = [v[0].0[0] - s[0], v[0].0[1] - s[1]];
        let b = [v[1].0[0] - s[0], v[1].0[1] - s[1]];
        let d = simplex_distance(&[&s[..]], &[v[0].coords(), v[1].coords()]);
        if d == 0.0 {
            return Err(LowDimError::Coincident { distance: d });
        }
        let ang = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
        total += *coef as f64 * ang;
    }
    Ok(total / (2.0 * PI))
}

/// Flux of the Coulomb field of a unit charge at `s` through a triangulated
/// surface (2-chain in R^3): signed solid angles over 4π.
pub fn solid_angle_flux(surface: &Chain, s: [f64; 3]) -> Result<f64, LowDimError> {
    shape(surface, 3, 2, "2-chain in R^3")?;
    let mut total = 0.0;
    for (tri, coef) in surface.terms() {
        let v = tri.vertices();
        let p = |i: usize| sub([v[i].0[0], v[i].0[1], v[i].0[2]], s);
        let (r1, r2, r3) = (p(0), p(1), p(2));
        let (l1, l2, l3) = (norm(r1), norm(r2), norm(r3));
        if l1 == 0.0 || l2 == 0.0 || l3 == 0.0 {
            return Err(LowDimError::Coincident { distance: 0.0 });
        }
        let num = dot(r1, cross(r2, r3));
        let den = l1 * l2 * l3 + dot(r1, r2) * l3 + dot(r1, r3) * l2 + dot(r2, r3) * l1;
        total += *coef as f64 * 2.0 * num.atan2(den);
    }
    Ok(total / (4.0 * PI))
}

/// Gauss linking number of two closed polygonal 1-chains in R^3,
/// `(1/4π) ∮∮ (a − b)·(da × db) / |a − b|³`, exact per segment pair via the
/// quadrilateral solid-angle formula.
pub fn gauss_linking_number(a: &Chain, b: &Chain) -> Result<f64, LowDimError> {
    shape(a, 3, 1, "1-chain in R^3")?;
    shape(b, 3, 1, "1-chain in R^3")?;
    let pt = |p: &crate::mesh::Point| [p.0[0], p.0[1], p.0[2]];
    let mut total = 0.0;
    for (sa, ca) in a.terms() {
        let (p1, p2) = (pt(&sa.vertices()[0]), pt(&sa.vertices()[1]));
        for (sb, cb) in b.terms() {
            let (p3, p4) = (pt(&sb.vertices()[0]), pt(&sb.vertices()[1]));
            let w = segment_pair_solid_angle(p1, p2, p3, p4)?;
            total += (*ca * *cb) as f64 * w;
        }
    }
    Ok(total / (4.0 * PI))
}

/// Signed solid angle swept by segment `p1p2` seen from segment `p3p4`
/// (zero for coplanar pairs). Equals `∫∫ (x − y)·(dx × dy) / |x − y|³`.
fn segment_pair_solid_angle(
    p1: [f64; 3],
    p2: [f64; 3],
    p3: [f64; 3],
    p4: [f64; 3],
) -> Result<f64, LowDimError> {
    let r13 = sub(p3, p1);
    let r14 = sub(p4, p1);
    let r23 = sub(p3, p2);
    let r24 = sub(p4, p2);
    let unit = |v: [f64; 3]| {
        let n = norm(v);
        if n == 0.0 {
            None
        } else {
            Some([v[0] / n, v[1] / n, v[2] / n])
        }
    };
    let triple = dot(cross(sub(p4, p3), sub(p2, p1)), r13);
    if triple == 0.0 {
        if [r13, r14, r23, r24].iter().any(|v| norm(*v) == 0.0) {
            return Err(LowDimError::Coincident { distance: 0.0 });
        }
        return Ok(0.0);
    }
    let (Some(n1), Some(n2), Some(n3), Some(n4)) = (
        unit(cross(r13, r14)),
        unit(cross(r14, r24)),
        unit(cross(r24, r23)),
        unit(cross(r23, r13)),
    ) else {
        return Ok(0.0);
    };
    let asin = |x: f64| x.clamp(-1.0, 1.0).asin();
    let omega = asin(dot(n1, n2)) + asin(dot(n2, n3)) + asin(dot(n3, n4)) + asin(dot(n4, n1));
    Ok(omega * triple.signum())
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
