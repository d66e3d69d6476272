//! Exact treewidth of small graphs by dynamic programming over vertex subsets.
//!
//! `TW(S)` is the best width of an elimination ordering that eliminates `S`
//! first; eliminating `v` after `S` costs the number of vertices outside
//! `S ∪ {v}` reachable from `v` through `S`.

use thiserror::Error;

use crate::graph::Graph;

pub const MAX_TREEWIDTH_VERTICES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("exact treewidth is limited to {MAX_TREEWIDTH_VERTICES} vertices, got {0}")]
pub struct TreewidthTooLarge(pub usize);

/// Treewidth of `g`; the empty graph has width 0.
pub fn treewidth(g: &Graph) -> Result<usize, TreewidthTooLarge> {
    let n = g.n();
    if n > MAX_TREEWIDTH_VERTICES {
        return Err(TreewidthTooLarge(n));
    }
    if n == 0 {
        return Ok(0);
    }
    let adj: Vec<u32> = g
        .dense_adjacency()
        .iter()
        .map(|l| l.iter().fold(0u32, |m, &w| m | 1 << w))
        .collect();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut best = vec![u8::MAX; 1usize << n];
    best[0] = 0;
    for set in 1..=full {
        let mut value = u8::MAX;
        let mut rest = set;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let before = set & !(1 << v);
            let prior = best[before as usize];
            if prior >= value {
                continue;
            }
            let q = reach_outside(&adj, before, v).count_ones() as u8;
            value = value.min(prior.max(q));
        }
        best[set as usize] = value;
    }
    Ok(best[full as usize] as usize)
}

/// Vertices outside `set ∪ {v}` adjacent to the part of `set` connected to `v`.
fn reach_outside(adj: &[u32], set: u32, v: usize) -> u32 {
    let mut reach = 1u32 << v;
    loop {
        let mut nb = 0u32;
        let mut r = reach;
        while r != 0 {
            let i = r.trailing_zeros() as usize;
            r &= r - 1;
            nb |= adj[i];
        }
        let grown = reach | (nb & set);
        if grown == reach {
            return nb & !set & !(1 << v);
        }
        reach = grown;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_widths() {
        assert_eq!(treewidth(&Graph::empty()).unwrap(), 0);
        assert_eq!(treewidth(&Graph::path(1)).unwrap(), 0);
        assert_eq!(treewidth(&Graph::path(6)).unwrap(), 1);
        assert_eq!(treewidth(&Graph::complete(5)).unwrap(), 4);
        let cycle: Vec<_> = (0..7).map(|i| (i, (i + 1) % 7)).collect();
        assert_eq!(treewidth(&Graph::with_order(7, &cycle).unwrap()).unwrap(), 2);
        let mut grid = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                let v = 3 * r + c;
                if c < 2 {
                    grid.push((v, v + 1));
                }
                if r < 2 {
                    grid.push((v, v + 3));
                }
            }
        }
        assert_eq!(treewidth(&Graph::with_order(9, &grid).unwrap()).unwrap(), 3);
        let isolated = Graph::with_order(4, &[(1, 1)]).unwrap();
        assert_eq!(treewidth(&isolated).unwrap(), 0);
    }

    #[test]
    fn too_large() {
        assert_eq!(treewidth(&Graph::path(21)), Err(TreewidthTooLarge(21)));
    }
}
