//! Plain-text mesh interchange.
//!
//! ```text
//! D k m
//! x_1 ... x_D        (m vertex lines)
//! i_0 ... i_k coef   (one line per simplex, to end of file)
//! ```
//!
//! Vertex indices are zero-based. Blank lines and lines starting with `#`
//! are ignored. Coordinates are written with 17 significant digits.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Chain, MeshError, Point, Simplex};

pub fn write_chain(c: &Chain) -> String {
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut verts: Vec<&Point> = Vec::new();
    let mut rows: Vec<(Vec<usize>, i64)> = Vec::with_capacity(c.len());
    for (s, coef) in c.terms() {
        let ids = s
            .vertices()
            .iter()
            .map(|p| {
                *index.entry(p.key()).or_insert_with(|| {
                    verts.push(p);
                    verts.len() - 1
                })
            })
            .collect();
        rows.push((ids, *coef));
    }
    let mut out = format!("{} {} {}\n", c.ambient(), c.dim(), verts.len());
    for p in verts {
        let line: Vec<String> = p.0.iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    for (ids, coef) in rows {
        for i in ids {
            let _ = write!(out, "{i} ");
        }
        let _ = writeln!(out, "{coef}");
    }
    out
}

pub fn read_chain(text: &str) -> Result<Chain, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line: usize, message: String| MeshError::Parse { line, message };

    let (hl, header) = lines
        .next()
        .ok_or_else(|| err(1, "missing header".into()))?;
    let h: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| err(hl, format!("header: {e}")))?;
    let [d, k, m] = h[..] else {
        return Err(err(hl, "header must be `D k m`".into()));
    };
    if k > d {
        return Err(err(
            hl,
            format!("simplex dimension {k} exceeds ambient {d}"),
        ));
    }

    let mut verts = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| err(hl, format!("expected {m} vertex lines")))?;
        let coords: Vec<f64> = l
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| err(ln, format!("coordinate: {e}")))?;
        if coords.len() != d {
            return Err(err(
                ln,
                format!("expected {d} coordinates, got {}", coords.len()),
            ));
        }
        verts.push(Point(coords));
    }

    let mut terms = Vec::new();
    for (ln, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != k + 2 {
            return Err(err(
                ln,
                format!("expected {} indices and a coefficient", k + 1),
            ));
        }
        let coef: i64 = toks[k + 1]
            .parse()
            .map_err(|e| err(ln, format!("coefficient: {e}")))?;
        let mut vs = Vec::with_capacity(k + 1);
        for t in &toks[..=k] {
            let i: usize = t.parse().map_err(|e| err(ln, format!("index: {e}")))?;
            let p = verts
                .get(i)
                .ok_or_else(|| err(ln, format!("vertex index {i} out of range")))?;
            vs.push(p.clone());
        }
        let s = Simplex::new(vs).map_err(|e| err(ln, e.to_string()))?;
        terms.push((s, coef));
    }
    Chain::new(d, k, terms)
}
