//! Ordered two-partitions of an index list and their permutation signs.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `[left, right]` split of an ordered index list. Both sides keep the
/// source order; `sign` is the parity of the permutation taking the source
/// to `left ++ right`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderedPartition {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub sign: i8,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("partition width {w} out of range for a list of {n}")]
pub struct WidthOutOfRange {
    pub w: usize,
    pub n: usize,
}

/// All `C(|a|, w)` ordered partitions with `|left| = w`, in lexicographic
/// order of the left positions.
pub fn partitions(a: &[usize], w: usize) -> Result<Vec<OrderedPartition>, WidthOutOfRange> {
    let n = a.len();
    if w > n {
        return Err(WidthOutOfRange { w, n });
    }
    let mut out = Vec::with_capacity(binomial(n, w));
    let mut pos: Vec<usize> = (0..w).collect();
    loop {
        let mut order = pos.clone();
        order.extend((0..n).filter(|i| !pos.contains(i)));
        out.push(OrderedPartition {
            left: pos.iter().map(|&i| a[i]).collect(),
            right: order[w..].iter().map(|&i| a[i]).collect(),
            sign: inversion_sign(&order),
        });
        // Advance to the next combination.
        let Some(i) = (0..w).rev().find(|&i| pos[i] < n - w + i) else {
            break;
        };
        pos[i] += 1;
        for j in i + 1..w {
            pos[j] = pos[j - 1] + 1;
        }
    }
    Ok(out)
}

/// `[1, ..., k-1, k+1, ..., d]` (one-based).
pub fn index_set_without(d: usize, k: usize) -> Vec<usize> {
    (1..=d).filter(|&i| i != k).collect()
}

/// Cached `partitions(index_set_without(d, k), w)`.
pub fn partitions_without(
    d: usize,
    k: usize,
    w: usize,
) -> Result<Arc<[OrderedPartition]>, WidthOutOfRange> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize, usize), Arc<[OrderedPartition]>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache
        .read()
        .unwrap_or_else(|e| e.into_inner())
        .get(&(d, k, w))
    {
        return Ok(p.clone());
    }
    let p: Arc<[OrderedPartition]> = partitions(&index_set_without(d, k), w)?.into();
    cache
        .write()
        .unwrap_or_else(|e| e.into_inner())
        .insert((d, k, w), p.clone());
    Ok(p)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn inversion_sign(order: &[usize]) -> i8 {
    let mut inv = 0;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if order[i] > order[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn footnote_example() {
        let p = partitions(&[1, 3, 6, 9, 5], 3).unwrap();
        assert_eq!(p.len(), 10);
        let find = |l: &[usize]| p.iter().find(|q| q.left == l).unwrap().clone();
        let a = find(&[1, 3, 6]);
        assert_eq!((a.right.as_slice(), a.sign), (&[9, 5][..], 1));
        let b = find(&[1, 3, 9]);
        assert_eq!((b.right.as_slice(), b.sign), (&[6, 5][..], -1));
    }

    #[test]
    fn lexicographic_order() {
        let p = partitions(&[0, 1, 2, 3], 2).unwrap();
        let lefts: Vec<_> = p.iter().map(|q| q.left.clone()).collect();
        assert_eq!(
            lefts,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn edge_widths() {
        let p = partitions(&[4, 2], 0).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].right, vec![4, 2]);
        assert_eq!(p[0].sign, 1);
        assert_eq!(partitions(&[], 0).unwrap().len(), 1);
        assert_eq!(partitions(&[1], 2), Err(WidthOutOfRange { w: 2, n: 1 }));
    }

    #[test]
    fn index_sets() {
        assert_eq!(index_set_without(2, 1), vec![2]);
        assert_eq!(index_set_without(3, 2), vec![1, 3]);
        assert_eq!(index_set_without(5, 5), vec![1, 2, 3, 4]);
    }

    #[test]
    fn swap_sign_relation() {
        for n in 0..=8 {
            let a: Vec<usize> = (0..n).collect();
            for w in 0..=n {
                let p = partitions(&a, w).unwrap();
                assert_eq!(p.len(), binomial(n, w));
                let q = partitions(&a, n - w).unwrap();
                for x in &p {
                    let y = q.iter().find(|y| y.left == x.right).unwrap();
                    let expect = if (w * (n - w)) % 2 == 0 { 1 } else { -1 };
                    assert_eq!(x.sign * y.sign, expect);
                    let mut all = x.left.clone();
                    all.extend(&x.right);
                    all.sort();
                    assert_eq!(all, a);
                }
            }
        }
    }

    #[test]
    fn cache_matches_direct() {
        let c = partitions_without(5, 2, 2).unwrap();
        assert_eq!(&c[..], &partitions(&[1, 3, 4, 5], 2).unwrap()[..]);
        assert!(Arc::ptr_eq(&c, &partitions_without(5, 2, 2).unwrap()));
    }
}
