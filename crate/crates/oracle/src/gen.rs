//! Test-input generators: random graphs and all graphs up to isomorphism.

use std::collections::HashSet;

use rand::Rng;
use unbreak_core::graph::Graph;

use crate::{adjacency_masks, reach};

/// Erdős–Rényi graph on `0..n` with edge probability `p`.
pub fn gnp(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::with_order(n, &edges).expect("vertices 0..n")
}

pub fn connected(g: &Graph) -> bool {
    let n = g.n();
    n == 0 || reach(&adjacency_masks(g), 0, (1u64 << n) - 1).count_ones() as usize == n
}

/// Rejection-samples a connected [`gnp`] graph.
pub fn connected_gnp(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    loop {
        let g = gnp(n, p, rng);
        if connected(&g) {
            return g;
        }
    }
}

/// Upper-triangle adjacency code, minimised over the orders that list
/// vertices by non-increasing degree.
fn canonical_code(n: usize, adj: &[u64]) -> u64 {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(adj[v].count_ones()));
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || adj[order[i]].count_ones() != adj[order[start]].count_ones() {
            blocks.push((start, i));
            start = i;
        }
    }
    let mut best = u64::MAX;
    permute_blocks(&mut order, &blocks, 0, &mut |ord| {
        let mut code = 0u64;
        let mut bit = 0;
        for i in 0..n {
            for j in i + 1..n {
                if adj[ord[i]] >> ord[j] & 1 == 1 {
                    code |= 1 << bit;
                }
                bit += 1;
            }
        }
        best = best.min(code);
    });
    best
}

fn permute_blocks(order: &mut Vec<usize>, blocks: &[(usize, usize)], b: usize, visit: &mut impl FnMut(&[usize])) {
    let Some(&(lo, hi)) = blocks.get(b) else {
        visit(order);
        return;
    };
    heap_permute(order, lo, hi, hi - lo, blocks, b, visit);
}

fn heap_permute(
    order: &mut Vec<usize>,
    lo: usize,
    hi: usize,
    k: usize,
    blocks: &[(usize, usize)],
    b: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if k <= 1 {
        permute_blocks(order, blocks, b + 1, visit);
        return;
    }
    for i in 0..k {
        heap_permute(order, lo, hi, k - 1, blocks, b, visit);
        let j = if k % 2 == 0 { lo + i } else { lo };
        if i + 1 < k {
            order.swap(j, lo + k - 1);
        }
    }
}

/// One graph per isomorphism class on exactly `n` vertices (`n <= 8`),
/// generated by adding a vertex with every neighbourhood to the smaller
/// classes.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    assert!(n <= 8, "exhaustive generation is limited to 8 vertices");
    let mut level: Vec<Vec<u64>> = vec![Vec::new()];
    for size in 1..=n {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for adj in &level {
            for nb in 0u64..1 << (size - 1) {
                let mut grown = adj.clone();
                for (v, row) in grown.iter_mut().enumerate() {
                    if nb >> v & 1 == 1 {
                        *row |= 1 << (size - 1);
                    }
                }
                grown.push(nb);
                if seen.insert(canonical_code(size, &grown)) {
                    next.push(grown);
                }
            }
        }
        level = next;
    }
    level
        .into_iter()
        .map(|adj| {
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .filter(|&(u, v)| adj[u] >> v & 1 == 1)
                .collect();
            Graph::with_order(n, &edges).expect("vertices 0..n")
        })
        .collect()
}

pub fn all_connected_graphs(n: usize) -> Vec<Graph> {
    all_graphs(n).into_iter().filter(connected).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_counts() {
        let counts: Vec<usize> = (0..=7).map(|n| all_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 11, 34, 156, 1044]);
        let conn: Vec<usize> = (1..=7).map(|n| all_connected_graphs(n).len()).collect();
        assert_eq!(conn, vec![1, 1, 2, 6, 21, 112, 853]);
    }
}
