/// Known signatures followed by every `c + ζ` with `|ζ|_∞ ≤ radius`, with
/// entries closer than `eps_key` (max norm) to an earlier one dropped.
pub fn next_class_candidates(known: &[Vec<f64>], radius: u32, eps_key: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut push = |c: Vec<f64>| {
        if !out
            .iter()
            .any(|o| o.iter().zip(&c).all(|(a, b)| (a - b).abs() < eps_key))
        {
            out.push(c);
        }
    };
    for c in known {
        push(c.clone());
    }
    let r = radius as i64;
    for c in known {
        let m = c.len();
        let mut zeta = vec![-r; m];
        loop {
            push(c.iter().zip(&zeta).map(|(x, z)| x + *z as f64).collect());
            let mut i = 0;
            while i < m && zeta[i] == r {
                zeta[i] = -r;
                i += 1;
            }
            if i == m {
                break;
            }
            zeta[i] += 1;
        }
    }
    out
}
