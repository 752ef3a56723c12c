//! Progressive edge growth construction of column-regular codes.
//!
//! Each bit connects its edges one at a time to a check that is unreachable
//! from it (or, failing that, as far away as possible) in the graph built so
//! far, preferring the checks with the fewest edges. Check degrees are capped
//! so a `(P, 2P)` construction comes out exactly regular.

use std::collections::VecDeque;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

/// Builds a `(col_weight, row_weight)`-regular matrix with `n_bits` columns.
pub fn construct<R: Rng + ?Sized>(
    n_bits: usize,
    col_weight: usize,
    row_weight: usize,
    rng: &mut R,
) -> Result<ParityCheckMatrix> {
    if col_weight == 0 || row_weight == 0 || !(n_bits * col_weight).is_multiple_of(row_weight) {
        return Err(Error::Invalid(format!(
            "cannot build a ({col_weight}, {row_weight})-regular code of length {n_bits}"
        )));
    }
    let n_checks = n_bits * col_weight / row_weight;
    let mut var_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(col_weight); n_bits];
    let mut check_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(row_weight); n_checks];

    // BFS scratch: depth at which each check was reached from the current bit
    let mut check_depth = vec![usize::MAX; n_checks];
    let mut var_seen = vec![false; n_bits];
    let mut candidates = Vec::new();

    for v in 0..n_bits {
        for _ in 0..col_weight {
            let open = |c: usize, adj: &[Vec<usize>]| adj[c].len() < row_weight && !adj[c].contains(&v);
            check_depth.fill(usize::MAX);
            var_seen.fill(false);
            var_seen[v] = true;
            let mut layer = vec![v];
            let mut depth = 0;
            while !layer.is_empty() {
                let mut next = Vec::new();
                for &u in &layer {
                    for &c in &var_adj[u] {
                        if check_depth[c] != usize::MAX {
                            continue;
                        }
                        check_depth[c] = depth;
                        for &w in &check_adj[c] {
                            if !var_seen[w] {
                                var_seen[w] = true;
                                next.push(w);
                            }
                        }
                    }
                }
                layer = next;
                depth += 1;
            }
            candidates.clear();
            candidates.extend((0..n_checks).filter(|&c| check_depth[c] == usize::MAX && open(c, &check_adj)));
            if candidates.is_empty() {
                // every open check closes a cycle: take the farthest ones
                let far = (0..n_checks)
                    .filter(|&c| open(c, &check_adj))
                    .map(|c| check_depth[c])
                    .max();
                if let Some(far) = far {
                    candidates.extend((0..n_checks).filter(|&c| check_depth[c] == far && open(c, &check_adj)));
                }
            }
            let Some(min_deg) = candidates.iter().map(|&c| check_adj[c].len()).min() else {
                return Err(Error::Invalid(
                    "construction ran out of admissible checks; try another seed".into(),
                ));
            };
            candidates.retain(|&c| check_adj[c].len() == min_deg);
            let &c = candidates.choose(rng).expect("non-empty");
            var_adj[v].push(c);
            check_adj[c].push(v);
        }
    }
    ParityCheckMatrix::from_checks(n_bits, check_adj)
}

/// Column order placing an information set first and the pivot columns of a
/// GF(2) elimination last, so the reordered matrix encodes systematically.
pub fn systematic_order(pcm: &ParityCheckMatrix) -> Result<Vec<usize>> {
    let n = pcm.n_bits();
    let m = pcm.n_checks();
    let w = n.div_ceil(64);
    let mut h = vec![0u64; m * w];
    for c in 0..m {
        for &i in pcm.check_neighbors(c) {
            h[c * w + i / 64] |= 1 << (i % 64);
        }
    }
    let mut pivots = Vec::with_capacity(m);
    let mut row = 0;
    // scan from the right so the existing parity region is preferred
    for col in (0..n).rev() {
        if row == m {
            break;
        }
        let (word, bit) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (row..m).find(|&p| h[p * w + word] & bit != 0) else {
            continue;
        };
        for x in 0..w {
            h.swap(row * w + x, p * w + x);
        }
        let src: Vec<u64> = h[row * w..(row + 1) * w].to_vec();
        for r in 0..m {
            if r != row && h[r * w + word] & bit != 0 {
                for x in 0..w {
                    h[r * w + x] ^= src[x];
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if row < m {
        return Err(Error::RankDeficient { rank: row, checks: m });
    }
    pivots.sort_unstable();
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut order: Vec<usize> = (0..n).filter(|&i| !is_pivot[i]).collect();
    order.extend(pivots);
    Ok(order)
}

/// Girth of the Tanner graph (length of the shortest cycle), `None` if the
/// graph is acyclic.
pub fn girth(pcm: &ParityCheckMatrix) -> Option<usize> {
    let n = pcm.n_bits();
    let m = pcm.n_checks();
    let mut best: Option<usize> = None;
    // nodes: bits 0..n, checks n..n+m
    let mut dist = vec![usize::MAX; n + m];
    let mut parent = vec![usize::MAX; n + m];
    for start in 0..n {
        dist.fill(usize::MAX);
        parent.fill(usize::MAX);
        dist[start] = 0;
        let mut q = VecDeque::from([start]);
        while let Some(u) = q.pop_front() {
            if let Some(b) = best {
                if 2 * dist[u] >= b {
                    break;
                }
            }
            let neighbors: Vec<usize> = if u < n {
                pcm.var_neighbors(u).iter().map(|c| c + n).collect()
            } else {
                pcm.check_neighbors(u - n).to_vec()
            };
            for w in neighbors {
                if w == parent[u] {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    q.push_back(w);
                } else {
                    let cycle = dist[u] + dist[w] + 1;
                    best = Some(best.map_or(cycle, |b| b.min(cycle)));
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::SystematicEncoder;
    use crate::rng::seeded;

    #[test]
    fn small_regular_code() {
        let h = construct(256, 3, 6, &mut seeded(1)).unwrap();
        assert_eq!(h.regular_column_weight(), Some(3));
        assert_eq!(h.regular_row_weight(), Some(6));
        let g = girth(&h).unwrap();
        assert!(g >= 6, "girth {g}");
    }

    #[test]
    fn reordering_enables_systematic_encoding() {
        let h = construct(96, 3, 6, &mut seeded(2)).unwrap();
        if let Ok(order) = systematic_order(&h) {
            let p = h.permute_columns(&order);
            assert!(SystematicEncoder::from_pcm(&p).is_ok());
        }
    }

    #[test]
    fn hamming_girth() {
        assert_eq!(girth(&crate::ldpc::hamming_7_4()), Some(4));
    }
}
