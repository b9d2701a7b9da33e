//! Nearest-neighbour candidate lists on a uniform bucket grid.

/// For each query point, the indices of its `k` nearest points in `targets`
/// (fewer if `targets` is smaller). Points are flat `dim`-tuples in the
/// unit cube.
pub(super) fn k_nearest(dim: usize, targets: &[f64], queries: &[f64], k: usize) -> Vec<Vec<u32>> {
    let m = targets.len() / dim;
    let k = k.min(m);
    let g = ((m as f64 / 2.0).powf(1.0 / dim as f64).floor() as usize).clamp(1, 512);
    let cell = 1.0 / g as f64;
    let bucket_of = |x: &[f64]| -> [usize; 3] {
        let mut b = [0; 3];
        for a in 0..dim {
            b[a] = ((x[a] * g as f64).max(0.0) as usize).min(g - 1);
        }
        b
    };
    let flat = |b: [usize; 3]| (0..dim).rev().fold(0, |acc, a| acc * g + b[a]);

    let buckets = g.pow(dim as u32);
    let mut start = vec![0usize; buckets + 1];
    for x in targets.chunks_exact(dim) {
        start[flat(bucket_of(x)) + 1] += 1;
    }
    for i in 0..buckets {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut members = vec![0u32; m];
    for (j, x) in targets.chunks_exact(dim).enumerate() {
        let b = flat(bucket_of(x));
        members[fill[b]] = j as u32;
        fill[b] += 1;
    }

    let sq = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum() };
    let mut found: Vec<(f64, u32)> = Vec::new();
    queries
        .chunks_exact(dim)
        .map(|q| {
            found.clear();
            let qb = bucket_of(q);
            for r in 0..g {
                let lo: Vec<usize> = (0..dim).map(|a| qb[a].saturating_sub(r)).collect();
                let hi: Vec<usize> = (0..dim).map(|a| (qb[a] + r).min(g - 1)).collect();
                let mut b = [0usize; 3];
                b[..dim].copy_from_slice(&lo);
                loop {
                    let ring = (0..dim).any(|a| b[a].abs_diff(qb[a]) == r);
                    if ring {
                        let f = flat(b);
                        for &j in &members[start[f]..start[f + 1]] {
                            let j_us = j as usize;
                            found.push((sq(q, &targets[j_us * dim..(j_us + 1) * dim]), j));
                        }
                    }
                    // Odometer over the box.
                    let mut a = 0;
                    while a < dim {
                        if b[a] < hi[a] {
                            b[a] += 1;
                            break;
                        }
                        b[a] = lo[a];
                        a += 1;
                    }
                    if a == dim {
                        break;
                    }
                }
                if found.len() >= k {
                    found.select_nth_unstable_by(k - 1, |x, y| x.0.total_cmp(&y.0));
                    let reach = r as f64 * cell;
                    if found[k - 1].0 <= reach * reach {
                        break;
                    }
                }
            }
            if found.len() > k {
                found.select_nth_unstable_by(k - 1, |x, y| x.0.total_cmp(&y.0));
                found.truncate(k);
            }
            found.iter().map(|&(_, j)| j).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in 1..=3 {
            let targets: Vec<f64> = (0..300 * dim).map(|_| rng.gen()).collect();
            let queries: Vec<f64> = (0..40 * dim).map(|_| rng.gen()).collect();
            let got = k_nearest(dim, &targets, &queries, 7);
            for (q, ids) in queries.chunks_exact(dim).zip(&got) {
                let mut all: Vec<(f64, usize)> = targets
                    .chunks_exact(dim)
                    .enumerate()
                    .map(|(j, t)| (crate::numerics::euclidean(q, t), j))
                    .collect();
                all.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut want: Vec<usize> = all[..7].iter().map(|p| p.1).collect();
                let mut have: Vec<usize> = ids.iter().map(|&j| j as usize).collect();
                want.sort_unstable();
                have.sort_unstable();
                assert_eq!(have, want);
            }
        }
    }
}
