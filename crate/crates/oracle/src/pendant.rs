//! Pendant subgraphs by checking every vertex subset.

use std::collections::HashMap;

use unbreak_core::boundaried::Structure;
use unbreak_core::finite_state::Property;
use unbreak_core::graph::{induced_subgraph, Graph, VertexSet};

use crate::{adjacency_masks, mask_to_set, reach, OracleBudget, OracleError};

/// Treewidth through the elimination game: eliminating a vertex turns its
/// remaining neighbourhood into a clique, and the width of an order is the
/// largest neighbourhood met. Memoised on the eliminated set.
pub fn elimination_width(g: &Graph) -> usize {
    let adj = adjacency_masks(g);
    let n = g.n();
    fn finish(adj: &[u64], n: usize, gone: u64, memo: &mut HashMap<u64, usize>) -> usize {
        if gone.count_ones() as usize == n {
            return 0;
        }
        if let Some(&w) = memo.get(&gone) {
            return w;
        }
        // replay the eliminations (in index order; the fill does not depend on it)
        let mut filled = adj.to_vec();
        let mut done = 0u64;
        for v in (0..n).filter(|v| gone >> v & 1 == 1) {
            done |= 1 << v;
            let nb = filled[v] & !done;
            for u in (0..n).filter(|u| nb >> u & 1 == 1) {
                filled[u] |= nb & !(1 << u);
            }
        }
        let mut best = usize::MAX;
        for v in (0..n).filter(|v| gone >> v & 1 == 0) {
            let deg = (filled[v] & !gone).count_ones() as usize;
            if deg >= best {
                continue;
            }
            best = best.min(deg.max(finish(adj, n, gone | 1 << v, memo)));
        }
        memo.insert(gone, best);
        best
    }
    finish(&adj, n, 0, &mut HashMap::new())
}

/// Some nonempty `U` with `G[U]` connected, `|N(U)| <= k`, treewidth of `G[U]`
/// at most `t`, and `prop(G[U])`; the first by size, then by mask order.
pub fn oracle_pendant(
    g: &Graph,
    k: usize,
    t: usize,
    prop: Property,
    budget: &OracleBudget,
) -> Result<Option<VertexSet>, OracleError> {
    let n = g.n();
    if n > 20 {
        return Err(OracleError::BudgetExceeded(format!("{n} vertices exceed 20")));
    }
    let clock = budget.check("pendant", n, 1u128 << n)?;
    let adj = adjacency_masks(g);
    let mut masks: Vec<u64> = (1u64..1 << n).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for u in masks {
        clock.tick()?;
        let root = u.trailing_zeros() as usize;
        if reach(&adj, root, u) != u {
            continue;
        }
        let nbrs = (0..n).filter(|i| u >> i & 1 == 1).fold(0, |acc, i| acc | adj[i]) & !u;
        if nbrs.count_ones() as usize > k {
            continue;
        }
        let set = mask_to_set(g, u);
        let sub = induced_subgraph(g, &set).expect("subset");
        if elimination_width(&sub) <= t && prop.evaluate(&Structure::of_graph(sub)) {
            return Ok(Some(set));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use unbreak_core::finite_state::property::{ALWAYS_TRUE, EVEN_ORDER};

    #[test]
    fn widths() {
        assert_eq!(elimination_width(&Graph::empty()), 0);
        assert_eq!(elimination_width(&Graph::path(5)), 1);
        assert_eq!(elimination_width(&Graph::complete(5)), 4);
        let cycle = Graph::with_order(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(elimination_width(&cycle), 2);
        // 3x3 grid
        let mut e = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                let v = 3 * r + c;
                if c < 2 {
                    e.push((v, v + 1));
                }
                if r < 2 {
                    e.push((v, v + 3));
                }
            }
        }
        assert_eq!(elimination_width(&Graph::with_order(9, &e).unwrap()), 3);
    }

    #[test]
    fn pendant_examples() {
        let b = OracleBudget::default();
        let star = Graph::with_order(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(oracle_pendant(&star, 1, 0, ALWAYS_TRUE, &b).unwrap(), Some(VertexSet::from([1])));
        assert_eq!(oracle_pendant(&Graph::complete(4), 0, 1, ALWAYS_TRUE, &b).unwrap(), None);
        assert_eq!(
            oracle_pendant(&Graph::path(5), 1, 1, EVEN_ORDER, &b).unwrap(),
            Some(VertexSet::from([0, 1]))
        );
    }
}
