//! Multiway cut-uncut and red-blue cut-uncut by trying every deletion set.

use unbreak_core::applications::{MwcuInstance, RbcuInstance};
use unbreak_core::graph::{Graph, VertexSet};

use crate::separation::subsets_of_size;
use crate::{choose, mask_to_set, reach, OracleBudget, OracleError};

fn masks_of(g: &Graph, edges: impl Iterator<Item = (usize, usize)>) -> Vec<u64> {
    let pos = |v| g.vertices().binary_search(&v).expect("endpoint");
    let mut adj = vec![0u64; g.n()];
    for (u, v) in edges {
        let (a, b) = (pos(u), pos(v));
        if a != b {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
    }
    adj
}

/// Searches deletion sets inside `allowed` by size, then in increasing mask
/// order, returning the first accepted by `ok`.
fn search(
    g: &Graph,
    allowed: u64,
    k: usize,
    budget: &OracleBudget,
    what: &str,
    mut ok: impl FnMut(u64) -> bool,
) -> Result<Option<VertexSet>, OracleError> {
    if g.n() > 63 {
        return Err(OracleError::BudgetExceeded(format!("{what}: too many vertices")));
    }
    let free: Vec<usize> = (0..g.n()).filter(|i| allowed >> i & 1 == 1).collect();
    let total: u128 = (0..=k.min(free.len())).map(|i| choose(free.len(), i)).sum();
    let clock = budget.check(what, g.n(), total)?;
    for size in 0..=k.min(free.len()) {
        for pick in subsets_of_size(free.len(), size) {
            clock.tick()?;
            let s = free
                .iter()
                .enumerate()
                .filter(|(i, _)| pick >> i & 1 == 1)
                .fold(0u64, |acc, (_, &v)| acc | 1 << v);
            if ok(s) {
                return Ok(Some(mask_to_set(g, s)));
            }
        }
    }
    Ok(None)
}

/// A smallest `S ⊆ V \ T` with `|S| <= k` such that two terminals share a
/// component of `G - S` exactly when they are related.
pub fn oracle_mwcu(inst: &MwcuInstance, budget: &OracleBudget) -> Result<Option<VertexSet>, OracleError> {
    let g = inst.graph();
    let adj = masks_of(g, g.edges().iter().copied());
    let pos = |v| g.vertices().binary_search(&v).expect("terminal");
    let classes: Vec<Vec<usize>> = inst.classes().iter().map(|c| c.iter().map(|&v| pos(v)).collect()).collect();
    let terminals = classes.iter().flatten().fold(0u64, |a, &v| a | 1 << v);
    let all = (1u64 << g.n()) - 1;
    search(g, all & !terminals, inst.k(), budget, "mwcu", |s| {
        let alive = all & !s;
        let members: Vec<(usize, usize)> = classes
            .iter()
            .enumerate()
            .flat_map(|(ci, c)| c.iter().map(move |&v| (v, ci)))
            .collect();
        members.iter().all(|&(u, cu)| {
            let comp = reach(&adj, u, alive);
            members
                .iter()
                .all(|&(v, cv)| (comp >> v & 1 == 1) == (cu == cv))
        })
    })
}

/// A smallest solution of the red-blue instance: `S` avoids red endpoints,
/// `|S| <= k`, and red endpoints share a component of `G - S - R` exactly
/// when a red edge joins them.
pub fn oracle_rbcu(inst: &RbcuInstance, budget: &OracleBudget) -> Result<Option<VertexSet>, OracleError> {
    let g = inst.graph();
    let red = inst.red();
    let blue = masks_of(
        g,
        g.edges().iter().enumerate().filter(|(i, _)| !red.contains(i)).map(|(_, &e)| e),
    );
    let pos = |v| g.vertices().binary_search(&v).expect("endpoint");
    let mut joined = vec![0u64; g.n()];
    let mut red_mask = 0u64;
    for &e in red {
        let (u, v) = g.edges()[e];
        let (a, b) = (pos(u), pos(v));
        joined[a] |= 1 << b | 1 << a;
        joined[b] |= 1 << a | 1 << b;
        red_mask |= 1 << a | 1 << b;
    }
    let all = (1u64 << g.n()) - 1;
    let ends: Vec<usize> = (0..g.n()).filter(|i| red_mask >> i & 1 == 1).collect();
    search(g, all & !red_mask, inst.k(), budget, "rbcu", |s| {
        let alive = all & !s;
        ends.iter().all(|&u| {
            let comp = reach(&blue, u, alive) & red_mask;
            comp == joined[u]
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use unbreak_core::applications::mwcu_to_rbcu;

    fn set(v: &[usize]) -> VertexSet {
        v.iter().copied().collect()
    }

    #[test]
    fn examples() {
        let b = OracleBudget::default();
        let path = MwcuInstance::new(Graph::path(3), vec![set(&[0]), set(&[2])], 1).unwrap();
        assert_eq!(oracle_mwcu(&path, &b).unwrap(), Some(set(&[1])));
        let adjacent = MwcuInstance::new(Graph::path(3), vec![set(&[0]), set(&[1])], 3).unwrap();
        assert_eq!(oracle_mwcu(&adjacent, &b).unwrap(), None);
        let together = MwcuInstance::new(Graph::path(3), vec![set(&[0, 2])], 0).unwrap();
        assert_eq!(oracle_mwcu(&together, &b).unwrap(), Some(set(&[])));
    }

    #[test]
    fn reduction_agrees_on_examples() {
        let b = OracleBudget::default();
        let g = Graph::with_order(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 4)]).unwrap();
        for classes in [vec![set(&[0, 5]), set(&[2])], vec![set(&[0]), set(&[3]), set(&[5])], vec![set(&[0, 2, 5])]] {
            for k in 0..3 {
                let inst = MwcuInstance::new(g.clone(), classes.clone(), k).unwrap();
                let red = mwcu_to_rbcu(&inst).instance;
                assert_eq!(oracle_mwcu(&inst, &b).unwrap(), oracle_rbcu(&red, &b).unwrap());
            }
        }
    }
}
