//! Small dense linear algebra and distance queries on simplices.

use super::Chain;

/// Determinant of an n×n row-major matrix by partial-pivot elimination.
/// The slice is overwritten.
pub fn det_in_place(m: &mut [f64], n: usize) -> f64 {
    debug_assert_eq!(m.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * n + col].abs();
        for r in col + 1..n {
            let v = m[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        let d = m[col * n + col];
        det *= d;
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            if f != 0.0 {
                for c in col..n {
                    m[r * n + c] -= f * m[col * n + c];
                }
            }
        }
    }
    det
}

pub fn det(m: &[f64], n: usize) -> f64 {
    let mut tmp = m.to_vec();
    det_in_place(&mut tmp, n)
}

/// k-volume of the parallelotope spanned by `k` column vectors stored
/// contiguously (`edges.len() == k * D`).
pub fn gram_volume(edges: &[f64], k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let d = edges.len() / k;
    let mut g = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let v: f64 = (0..d).map(|t| edges[i * d + t] * edges[j * d + t]).sum();
            g[i * k + j] = v;
            g[j * k + i] = v;
        }
    }
    det_in_place(&mut g, k).max(0.0).sqrt()
}

/// Solves the symmetric system `a x = b` (n×n, row-major) by elimination.
/// Returns `None` when the system is numerically singular.
pub fn solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return if n == 0 { Some(Vec::new()) } else { None };
    }
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col].abs() <= 1e-13 * scale {
            return None;
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            x.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col] / d;
            if f != 0.0 {
                for c in col..n {
                    m[r * n + c] -= f * m[col * n + c];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for (i, xi) in x.iter_mut().enumerate() {
        *xi /= m[i * n + i];
    }
    Some(x)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Centroid and circumscribing radius about the centroid.
pub fn bounding_ball(vertices: &[&[f64]]) -> (Vec<f64>, f64) {
    let d = vertices[0].len();
    let inv = 1.0 / vertices.len() as f64;
    let mut c = vec![0.0; d];
    for v in vertices {
        for (ci, vi) in c.iter_mut().zip(v.iter()) {
            *ci += vi * inv;
        }
    }
    let r = vertices.iter().map(|v| dist(v, &c)).fold(0.0, f64::max);
    (c, r)
}

/// Exact Euclidean distance between two simplices given by vertex lists.
///
/// Every pair of faces is tried: the closest points of the two affine hulls
/// are accepted when both lie inside their faces. Vertex pairs always qualify,
/// so the result is an upper bound in the worst case and exact otherwise.
pub fn simplex_distance(a: &[&[f64]], b: &[&[f64]]) -> f64 {
    let mut best = f64::INFINITY;
    let na = a.len();
    let nb = b.len();
    for ma in 1u32..(1 << na) {
        let fa: Vec<&[f64]> = (0..na)
            .filter(|i| ma & (1 << i) != 0)
            .map(|i| a[i])
            .collect();
        for mb in 1u32..(1 << nb) {
            let fb: Vec<&[f64]> = (0..nb)
                .filter(|i| mb & (1 << i) != 0)
                .map(|i| b[i])
                .collect();
            if let Some(d) = face_distance(&fa, &fb) {
                best = best.min(d);
            }
        }
    }
    best
}

/// Minimum distance between the supports of two chains.
pub fn chain_distance(a: &Chain, b: &Chain) -> f64 {
    fn balls(c: &Chain) -> Vec<(Vec<&[f64]>, Vec<f64>, f64)> {
        c.terms()
            .iter()
            .map(|(s, _)| {
                let v: Vec<&[f64]> = s.vertices().iter().map(|p| p.coords()).collect();
                let (c, r) = bounding_ball(&v);
                (v, c, r)
            })
            .collect()
    }
    let ba = balls(a);
    let bb = balls(b);
    let mut best = f64::INFINITY;
    for (va, ca, ra) in &ba {
        for (vb, cb, rb) in &bb {
            if dist(ca, cb) - ra - rb >= best {
                continue;
            }
            best = best.min(simplex_distance(va, vb));
        }
    }
    best
}

fn face_distance(fa: &[&[f64]], fb: &[&[f64]]) -> Option<f64> {
    let d = fa[0].len();
    let ka = fa.len() - 1;
    let kb = fb.len() - 1;
    let n = ka + kb;
    if n == 0 {
        return Some(dist(fa[0], fb[0]));
    }
    // Columns: p_i - p_0 for the first face, -(q_j - q_0) for the second.
    let mut cols = Vec::with_capacity(n * d);
    for p in &fa[1..] {
        cols.extend(p.iter().zip(fa[0]).map(|(x, y)| x - y));
    }
    for q in &fb[1..] {
        cols.extend(q.iter().zip(fb[0]).map(|(x, y)| y - x));
    }
    let r: Vec<f64> = fb[0].iter().zip(fa[0]).map(|(x, y)| x - y).collect();
    let mut ata = vec![0.0; n * n];
    let mut atb = vec![0.0; n];
    for i in 0..n {
        let ci = &cols[i * d..(i + 1) * d];
        for j in i..n {
            let cj = &cols[j * d..(j + 1) * d];
            let v: f64 = ci.iter().zip(cj).map(|(x, y)| x * y).sum();
            ata[i * n + j] = v;
            ata[j * n + i] = v;
        }
        atb[i] = ci.iter().zip(&r).map(|(x, y)| x * y).sum();
    }
    let z = solve(&ata, &atb, n)?;
    const TOL: f64 = 1e-12;
    let inside = |w: &[f64]| w.iter().all(|&x| x >= -TOL) && w.iter().sum::<f64>() <= 1.0 + TOL;
    if !inside(&z[..ka]) || !inside(&z[ka..]) {
        return None;
    }
    let mut diff: Vec<f64> = r.iter().map(|x| -x).collect();
    for i in 0..n {
        for t in 0..d {
            diff[t] += z[i] * cols[i * d + t];
        }
    }
    Some(norm(&diff))
}
