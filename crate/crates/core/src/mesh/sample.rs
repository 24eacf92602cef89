//! Parametric samplers producing closed chains.
//!
//! Every sampler builds each grid vertex once and reuses it, so adjacent
//! simplices share bit-identical points and boundaries cancel exactly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Chain, MeshError, Point, Simplex};

/// Where a low-dimensional parametric shape lives in R^D: local coordinate
/// `i` is written to ambient axis `axes[i]`, then `origin` is added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub ambient: usize,
    pub axes: Vec<usize>,
    pub origin: Vec<f64>,
}

impl Embedding {
    pub fn new(ambient: usize, axes: Vec<usize>, origin: Vec<f64>) -> Result<Self, MeshError> {
        let e = Embedding {
            ambient,
            axes,
            origin,
        };
        e.check(0)?;
        Ok(e)
    }

    /// The first `k` coordinate axes, origin at zero.
    pub fn standard(ambient: usize, k: usize) -> Self {
        Embedding {
            ambient,
            axes: (0..k.min(ambient)).collect(),
            origin: vec![0.0; ambient],
        }
    }

    fn check(&self, local_dim: usize) -> Result<(), MeshError> {
        if self.axes.len() < local_dim {
            return Err(MeshError::InvalidParameter(format!(
                "embedding needs {local_dim} axes, got {}",
                self.axes.len()
            )));
        }
        if self.ambient < self.axes.len() {
            return Err(MeshError::AmbientTooSmall {
                required: self.axes.len(),
                found: self.ambient,
            });
        }
        if self.origin.len() != self.ambient {
            return Err(MeshError::PointDimension {
                expected: self.ambient,
                found: self.origin.len(),
            });
        }
        for (i, &a) in self.axes.iter().enumerate() {
            if a >= self.ambient {
                return Err(MeshError::AxisOutOfRange {
                    axis: a,
                    ambient: self.ambient,
                });
            }
            if self.axes[..i].contains(&a) {
                return Err(MeshError::InvalidParameter(format!(
                    "axis {a} used twice in embedding"
                )));
            }
        }
        Ok(())
    }

    fn place(&self, local: &[f64]) -> Point {
        let mut x = self.origin.clone();
        for (&a, v) in self.axes.iter().zip(local) {
            x[a] += v;
        }
        Point(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Forward,
    Reversed,
}

impl Orientation {
    fn apply(self, mut v: Vec<Point>) -> Vec<Point> {
        if self == Orientation::Reversed {
            v.swap(0, 1);
        }
        v
    }
}

/// Triangulated 2-sphere of radius `radius`:
/// `(R cosθ cosφ, R cosθ sinφ, R sinθ)` on the first three embedding axes,
/// `θ` split into `n_theta` bands and `φ` into `n_phi` steps. Bands touching
/// the poles become triangle fans.
///
/// `Forward` follows the parameter order `(θ, φ)`, whose normal
/// `∂θ × ∂φ` points inward; `Reversed` gives the outward orientation.
pub fn sample_sphere(
    radius: f64,
    embedding: &Embedding,
    res: (usize, usize),
    orientation: Orientation,
) -> Result<Chain, MeshError> {
    embedding.check(3)?;
    let (nt, np) = res;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(MeshError::InvalidParameter(format!(
            "sphere radius {radius}"
        )));
    }
    if nt < 3 || np < 3 {
        return Err(MeshError::InvalidParameter(format!(
            "sphere resolution {nt}x{np}, need at least 3x3"
        )));
    }
    let at = |theta: f64, phi: f64| {
        embedding.place(&[
            radius * theta.cos() * phi.cos(),
            radius * theta.cos() * phi.sin(),
            radius * theta.sin(),
        ])
    };
    let south = embedding.place(&[0.0, 0.0, -radius]);
    let north = embedding.place(&[0.0, 0.0, radius]);
    // rings[i - 1] holds band boundary i, for i in 1..nt.
    let rings: Vec<Vec<Point>> = (1..nt)
        .map(|i| {
            let theta = -PI / 2.0 + PI * i as f64 / nt as f64;
            (0..np)
                .map(|j| at(theta, 2.0 * PI * j as f64 / np as f64))
                .collect()
        })
        .collect();
    // Quad (a, b, c, d) = ((i, j), (i+1, j), (i+1, j+1), (i, j+1)) split into
    // (a, b, c) and (a, c, d); at the poles one of the two collapses.
    let mut tris = Vec::with_capacity(2 * np * (nt - 1));
    for j in 0..np {
        let j1 = (j + 1) % np;
        tris.push(vec![
            south.clone(),
            rings[0][j].clone(),
            rings[0][j1].clone(),
        ]);
    }
    for i in 0..nt - 2 {
        let (lo, hi) = (&rings[i], &rings[i + 1]);
        for j in 0..np {
            let j1 = (j + 1) % np;
            tris.push(vec![lo[j].clone(), hi[j].clone(), hi[j1].clone()]);
            tris.push(vec![lo[j].clone(), hi[j1].clone(), lo[j1].clone()]);
        }
    }
    let top = &rings[nt - 2];
    for j in 0..np {
        let j1 = (j + 1) % np;
        tris.push(vec![top[j].clone(), north.clone(), top[j1].clone()]);
    }
    build(embedding.ambient, 2, tris, orientation)
}

/// Triangulated torus with tube radius `r` and center-line radius `big_r`:
/// `((R + r cosφ) cosθ − (R + r), (R + r cosφ) sinθ, r sinφ)` on the first
/// three embedding axes. The shift puts the outermost point of the tube at
/// the embedding origin. Each grid quad is split along the same diagonal.
///
/// `Forward` follows the parameter order `(θ, φ)`; its normal points away
/// from the tube's center line.
pub fn sample_torus(
    r: f64,
    big_r: f64,
    embedding: &Embedding,
    res: (usize, usize),
    orientation: Orientation,
) -> Result<Chain, MeshError> {
    embedding.check(3)?;
    let (nt, np) = res;
    if !(r > 0.0 && big_r > r && big_r.is_finite()) {
        return Err(MeshError::InvalidParameter(format!(
            "torus radii need R > r > 0, got r={r}, R={big_r}"
        )));
    }
    if nt < 3 || np < 3 {
        return Err(MeshError::InvalidParameter(format!(
            "torus resolution {nt}x{np}, need at least 3x3"
        )));
    }
    let grid: Vec<Vec<Point>> = (0..nt)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / nt as f64;
            (0..np)
                .map(|j| {
                    let phi = 2.0 * PI * j as f64 / np as f64;
                    let w = big_r + r * phi.cos();
                    embedding.place(&[
                        w * theta.cos() - (big_r + r),
                        w * theta.sin(),
                        r * phi.sin(),
                    ])
                })
                .collect()
        })
        .collect();
    let mut tris = Vec::with_capacity(2 * nt * np);
    for i in 0..nt {
        let i1 = (i + 1) % nt;
        for j in 0..np {
            let j1 = (j + 1) % np;
            let a = &grid[i][j];
            let b = &grid[i1][j];
            let c = &grid[i1][j1];
            let d = &grid[i][j1];
            tris.push(vec![a.clone(), b.clone(), c.clone()]);
            tris.push(vec![a.clone(), c.clone(), d.clone()]);
        }
    }
    build(embedding.ambient, 2, tris, orientation)
}

/// Polyline through `points`; with `closed` the last point connects back to
/// the first.
pub fn sample_polyline_loop(points: &[Point], closed: bool) -> Result<Chain, MeshError> {
    if points.len() < 2 {
        return Err(MeshError::InvalidParameter(format!(
            "polyline needs at least 2 points, got {}",
            points.len()
        )));
    }
    let ambient = points[0].dim();
    let n = points.len();
    for i in 0..n {
        if points[i].key() == points[(i + 1) % n].key() && (closed || i + 1 < n) {
            return Err(MeshError::DuplicatePoint(i));
        }
    }
    if closed && n < 3 {
        return Err(MeshError::InvalidParameter(
            "closed polyline needs at least 3 points".into(),
        ));
    }
    let segs = if closed { n } else { n - 1 };
    let simplices = (0..segs)
        .map(|i| vec![points[i].clone(), points[(i + 1) % n].clone()])
        .collect();
    build(ambient, 1, simplices, Orientation::Forward)
}

/// Regular `n`-gon inscribed in the circle of radius `radius` on the first
/// two embedding axes, counterclockwise in those axes.
pub fn sample_circle(
    radius: f64,
    embedding: &Embedding,
    n: usize,
    orientation: Orientation,
) -> Result<Chain, MeshError> {
    embedding.check(2)?;
    if !(radius > 0.0 && radius.is_finite()) || n < 3 {
        return Err(MeshError::InvalidParameter(format!(
            "circle radius {radius} with {n} segments"
        )));
    }
    let pts: Vec<Point> = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            embedding.place(&[radius * t.cos(), radius * t.sin()])
        })
        .collect();
    let c = sample_polyline_loop(&pts, true)?;
    Ok(match orientation {
        Orientation::Forward => c,
        Orientation::Reversed => c.negated(),
    })
}

fn build(
    ambient: usize,
    dim: usize,
    simplices: Vec<Vec<Point>>,
    orientation: Orientation,
) -> Result<Chain, MeshError> {
    let terms = simplices
        .into_iter()
        .map(|v| Simplex::new(orientation.apply(v)).map(|s| (s, 1)))
        .collect::<Result<Vec<_>, _>>()?;
    Chain::new(ambient, dim, terms)
}
