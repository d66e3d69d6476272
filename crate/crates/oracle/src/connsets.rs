//! Connected sets around a root by filtering every vertex subset.

use unbreak_core::connenum::ConnectedSetQuery;
use unbreak_core::graph::{Graph, VertexSet};

use crate::{adjacency_masks, mask_to_set, reach, OracleBudget, OracleError};

/// Every `U ∋ root` with `G[U]` connected, `|U| <= p` and `|N(U)| <= q`,
/// sorted.
pub fn oracle_connected_sets(
    g: &Graph,
    query: ConnectedSetQuery,
    budget: &OracleBudget,
) -> Result<Vec<VertexSet>, OracleError> {
    let root = g
        .vertices()
        .binary_search(&query.root)
        .map_err(|_| OracleError::InvalidInput(format!("root {} is not a vertex", query.root)))?;
    let n = g.n();
    if n > 63 {
        return Err(OracleError::BudgetExceeded(format!("{n} vertices exceed 63")));
    }
    let clock = budget.check("connected sets", n, 1u128 << (n - 1))?;
    let adj = adjacency_masks(g);
    let mut out = Vec::new();
    for rest in 0u64..1 << (n - 1) {
        if rest & 0xffff == 0 {
            clock.tick()?;
        }
        // spread the n-1 bits over every position except the root
        let low = rest & ((1 << root) - 1);
        let high = (rest >> root) << (root + 1);
        let u = low | high | 1 << root;
        if u.count_ones() as usize > query.p || reach(&adj, root, u) != u {
            continue;
        }
        let nbrs = (0..n).filter(|i| u >> i & 1 == 1).fold(0, |acc, i| acc | adj[i]) & !u;
        if nbrs.count_ones() as usize <= query.q {
            out.push(mask_to_set(g, u));
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let b = OracleBudget::default();
        let iso = Graph::with_order(3, &[(1, 2)]).unwrap();
        assert_eq!(
            oracle_connected_sets(&iso, ConnectedSetQuery::new(0, 3, 0), &b).unwrap(),
            vec![VertexSet::from([0])]
        );
        // q = 0 only allows whole components
        assert_eq!(
            oracle_connected_sets(&iso, ConnectedSetQuery::new(1, 3, 0), &b).unwrap(),
            vec![VertexSet::from([1, 2])]
        );
        let p4 = Graph::path(4);
        let got = oracle_connected_sets(&p4, ConnectedSetQuery::new(1, 2, 2), &b).unwrap();
        assert_eq!(got, vec![VertexSet::from([0, 1]), VertexSet::from([1]), VertexSet::from([1, 2])]);
    }
}
