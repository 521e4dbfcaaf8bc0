//! Exhaustive enumeration of small graphs up to isomorphism.
//!
//! Graphs on at most 7 nodes are encoded as bitmasks over the `n(n-1)/2`
//! node pairs. The canonical form of a mask is the minimum over all node
//! permutations, so the enumeration is a breadth-first closure under edge
//! insertion, deduplicated by canonical form.

use super::Graph;
use std::collections::BTreeSet;

/// Largest node count accepted by [`all_graphs`].
pub const MAX_NODES: usize = 7;

struct PairIndex {
    n: usize,
    index: Vec<Vec<usize>>,
    pairs: Vec<(usize, usize)>,
}

impl PairIndex {
    fn new(n: usize) -> Self {
        let mut index = vec![vec![usize::MAX; n]; n];
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                index[u][v] = pairs.len();
                index[v][u] = pairs.len();
                pairs.push((u, v));
            }
        }
        PairIndex { n, index, pairs }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    heap_permutations(n, &mut p, &mut out);
    out
}

fn heap_permutations(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(p.clone());
        return;
    }
    for i in 0..k {
        heap_permutations(k - 1, p, out);
        if k % 2 == 0 {
            p.swap(i, k - 1);
        } else {
            p.swap(0, k - 1);
        }
    }
}

fn canonical(mask: u32, pair_maps: &[Vec<usize>]) -> u32 {
    let mut best = u32::MAX;
    for map in pair_maps {
        let mut m = 0u32;
        let mut bits = mask;
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            m |= 1 << map[b];
            bits &= bits - 1;
        }
        best = best.min(m);
    }
    best
}

fn mask_to_graph(mask: u32, idx: &PairIndex) -> Graph {
    let edges = (0..idx.pairs.len())
        .filter(|&b| mask & (1 << b) != 0)
        .map(|b| idx.pairs[b]);
    Graph::from_edges(idx.n, edges).expect("mask encodes a simple graph")
}

/// Every graph on exactly `n` nodes, one representative per isomorphism
/// class, ordered by edge count and then canonical mask.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    assert!(n <= MAX_NODES, "enumeration supports at most {MAX_NODES} nodes");
    let idx = PairIndex::new(n);
    let pair_maps: Vec<Vec<usize>> = permutations(n)
        .into_iter()
        .map(|p| {
            idx.pairs
                .iter()
                .map(|&(u, v)| idx.index[p[u]][p[v]])
                .collect()
        })
        .collect();
    let mut level: BTreeSet<u32> = BTreeSet::from([0]);
    let mut all = Vec::new();
    for _ in 0..=idx.pairs.len() {
        let mut next = BTreeSet::new();
        for &mask in &level {
            for b in 0..idx.pairs.len() {
                if mask & (1 << b) == 0 {
                    next.insert(canonical(mask | (1 << b), &pair_maps));
                }
            }
        }
        all.extend(level.iter().map(|&m| mask_to_graph(m, &idx)));
        level = next;
    }
    all
}

/// Connected graphs on exactly `n` nodes up to isomorphism.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    all_graphs(n).into_iter().filter(Graph::is_connected).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_known_sequences() {
        // OEIS A000088 and A001349.
        let all = [1, 1, 2, 4, 11, 34, 156];
        let connected = [1, 1, 1, 2, 6, 21, 112];
        for n in 0..=6 {
            assert_eq!(all_graphs(n).len(), all[n], "all graphs on {n} nodes");
            assert_eq!(connected_graphs(n).len(), connected[n], "connected on {n}");
        }
    }
}
