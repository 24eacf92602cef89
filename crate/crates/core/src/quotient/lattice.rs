use serde::{Deserialize, Serialize};

use super::QuotientError;

/// Default membership tolerance.
pub const DEFAULT_EPS_Q: f64 = 0.05;

/// An integer lattice Q ⊂ Z^m kept in row Hermite normal form: pivot
/// columns strictly increase, pivots are positive, and entries above a
/// pivot lie in `[0, pivot)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QLattice {
    m: usize,
    basis: Vec<Vec<i64>>,
    pivots: Vec<usize>,
    eps_q: f64,
}

impl QLattice {
    /// The zero lattice.
    pub fn trivial(m: usize) -> Self {
        QLattice {
            m,
            basis: Vec::new(),
            pivots: Vec::new(),
            eps_q: DEFAULT_EPS_Q,
        }
    }

    /// Lattice spanned by integer generators, which may be dependent.
    pub fn from_integer(m: usize, generators: &[Vec<i64>]) -> Result<Self, QuotientError> {
        for g in generators {
            if g.len() != m {
                return Err(QuotientError::Dimension {
                    expected: m,
                    found: g.len(),
                });
            }
        }
        let rows: Vec<Vec<i128>> = generators
            .iter()
            .map(|g| g.iter().map(|&x| x as i128).collect())
            .collect();
        let (basis, pivots) = hermite(rows, m)?;
        Ok(QLattice {
            m,
            basis,
            pivots,
            eps_q: DEFAULT_EPS_Q,
        })
    }

    /// Lattice spanned by measured cycle signatures. Each entry must lie
    /// within `eps_int` of an integer.
    pub fn from_signatures(
        m: usize,
        signatures: &[Vec<f64>],
        eps_int: f64,
    ) -> Result<Self, QuotientError> {
        let mut gens = Vec::with_capacity(signatures.len());
        for (i, s) in signatures.iter().enumerate() {
            if s.len() != m {
                return Err(QuotientError::Dimension {
                    expected: m,
                    found: s.len(),
                });
            }
            let r: Vec<i64> = s.iter().map(|x| x.round() as i64).collect();
            let dev = s
                .iter()
                .zip(&r)
                .map(|(x, z)| (x - *z as f64).abs())
                .fold(0.0, f64::max);
            if !(dev <= eps_int) {
                return Err(QuotientError::NotIntegral {
                    index: i,
                    values: s.clone(),
                });
            }
            gens.push(r);
        }
        Self::from_integer(m, &gens)
    }

    pub fn with_eps(mut self, eps_q: f64) -> Self {
        self.eps_q = eps_q;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eps(&self) -> f64 {
        self.eps_q
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Canonical representative of `z + Q`.
    pub fn reduce_integer(&self, z: &[i64]) -> Vec<i64> {
        let mut z = z.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            let q = z[p].div_euclid(row[p]);
            if q != 0 {
                for (a, b) in z.iter_mut().zip(row) {
                    *a -= q * b;
                }
            }
        }
        z
    }

    pub fn contains_integer(&self, z: &[i64]) -> bool {
        self.reduce_integer(z).iter().all(|&x| x == 0)
    }

    /// Canonical residue of a real vector: its nearest integer vector
    /// (halves rounded toward zero) is reduced modulo Q and the fractional
    /// part is kept. `reduce(reduce(v)) == reduce(v)` holds exactly.
    pub fn reduce(&self, v: &[f64]) -> Vec<f64> {
        let z: Vec<i64> = v.iter().map(|&x| round_half_to_zero(x) as i64).collect();
        let r = self.reduce_integer(&z);
        v.iter()
            .zip(&z)
            .zip(&r)
            .map(|((&x, &zi), &ri)| {
                let mut w = ri as f64 + (x - zi as f64);
                for _ in 0..8 {
                    let t = round_half_to_zero(w) as i64;
                    if t == ri {
                        break;
                    }
                    w = if t > ri { w.next_down() } else { w.next_up() };
                }
                w
            })
            .collect()
    }
}

fn round_half_to_zero(x: f64) -> f64 {
    let t = x.trunc();
    if (x - t).abs() == 0.5 {
        t
    } else {
        x.round()
    }
}

/// True iff `v` lies within the lattice tolerance of a point of Q.
pub fn q_membership(v: &[f64], q: &QLattice) -> bool {
    if v.len() != q.m {
        return false;
    }
    let z: Vec<i64> = v.iter().map(|x| x.round() as i64).collect();
    let close = v
        .iter()
        .zip(&z)
        .all(|(x, zi)| (x - *zi as f64).abs() <= q.eps_q);
    close && q.contains_integer(&z)
}

fn hermite(
    mut rows: Vec<Vec<i128>>,
    m: usize,
) -> Result<(Vec<Vec<i64>>, Vec<usize>), QuotientError> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..m {
        if r == rows.len() {
            break;
        }
        loop {
            let best = (r..rows.len())
                .filter(|&i| rows[i][col] != 0)
                .min_by_key(|&i| (rows[i][col].unsigned_abs(), i));
            let Some(b) = best else { break };
            rows.swap(r, b);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][col] != 0 {
                    let q = rows[i][col].div_euclid(rows[r][col]);
                    sub_multiple(&mut rows, i, r, q)?;
                    if rows[i][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if rows[r][col] == 0 {
            continue;
        }
        if rows[r][col] < 0 {
            for x in rows[r].iter_mut() {
                *x = -*x;
            }
        }
        for i in 0..r {
            let q = rows[i][col].div_euclid(rows[r][col]);
            sub_multiple(&mut rows, i, r, q)?;
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    let basis = rows
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| i64::try_from(x).map_err(|_| QuotientError::Overflow))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok((basis, pivots))
}

fn sub_multiple(rows: &mut [Vec<i128>], i: usize, r: usize, q: i128) -> Result<(), QuotientError> {
    if q == 0 {
        return Ok(());
    }
    for c in 0..rows[i].len() {
        let t = q.checked_mul(rows[r][c]).ok_or(QuotientError::Overflow)?;
        rows[i][c] = rows[i][c].checked_sub(t).ok_or(QuotientError::Overflow)?;
    }
    Ok(())
}
