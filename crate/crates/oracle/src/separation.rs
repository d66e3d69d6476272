//! Witnessing separations by exhaustive search.

use unbreak_core::graph::{Graph, Separation};

use crate::{adjacency_masks, mask_to_set, reach, OracleBudget, OracleError};

fn ensure_small(g: &Graph) -> Result<(), OracleError> {
    if g.n() > 63 {
        return Err(OracleError::BudgetExceeded(format!("{} vertices exceed 63", g.n())));
    }
    Ok(())
}

/// Some `(X, Y)` with `|X ∩ Y| <= c`, `|X \ Y| > s`, `|Y \ X| > s` and no edge
/// between `X \ Y` and `Y \ X`, found by trying every separator of size at
/// most `c` and every split of the remaining components.
pub fn oracle_witnessing_separation(
    g: &Graph,
    s: usize,
    c: usize,
    budget: &OracleBudget,
) -> Result<Option<Separation>, OracleError> {
    ensure_small(g)?;
    let n = g.n();
    let separators: u128 = (0..=c.min(n)).map(|i| crate::choose(n, i)).sum();
    let clock = budget.check("witnessing separation", n, separators << n.min(64))?;
    let adj = adjacency_masks(g);
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    for size in 0..=c.min(n) {
        for sep in subsets_of_size(n, size) {
            clock.tick()?;
            let rest = all & !sep;
            let mut comps = Vec::new();
            let mut left = rest;
            while left != 0 {
                let comp = reach(&adj, left.trailing_zeros() as usize, rest);
                comps.push(comp);
                left &= !comp;
            }
            // the first component may go to either side, so fix it on the X side
            let free = comps.len().saturating_sub(1);
            for choice in 0u64..1 << free {
                let mut x_only = comps.first().copied().unwrap_or(0);
                for (i, comp) in comps.iter().enumerate().skip(1) {
                    if choice >> (i - 1) & 1 == 1 {
                        x_only |= comp;
                    }
                }
                let y_only = rest & !x_only;
                if x_only.count_ones() as usize > s && y_only.count_ones() as usize > s {
                    return Ok(Some(Separation::new(
                        mask_to_set(g, x_only | sep),
                        mask_to_set(g, y_only | sep),
                    )));
                }
            }
        }
    }
    Ok(None)
}

/// Same question answered by assigning every vertex to `X` only, `Y` only or
/// both (all `3^n` assignments) and testing the definition directly.
pub fn oracle_witnessing_separation_by_assignment(
    g: &Graph,
    s: usize,
    c: usize,
    budget: &OracleBudget,
) -> Result<Option<Separation>, OracleError> {
    ensure_small(g)?;
    let n = g.n();
    let clock = budget.check("witnessing separation", n, 3u128.saturating_pow(n as u32))?;
    let pos = |v| g.vertices().binary_search(&v).expect("endpoint");
    let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(u, v)| (pos(u), pos(v))).collect();
    let mut side = vec![0u8; n];
    loop {
        clock.tick()?;
        let count = |k| side.iter().filter(|&&x| x == k).count();
        let (x_only, y_only, both) = (count(0), count(1), count(2));
        if both <= c
            && x_only > s
            && y_only > s
            && edges.iter().all(|&(u, v)| side[u] + side[v] != 1)
        {
            let pick = |keep: u8| -> unbreak_core::graph::VertexSet {
                (0..n).filter(|&i| side[i] == keep || side[i] == 2).map(|i| g.vertices()[i]).collect()
            };
            return Ok(Some(Separation::new(pick(0), pick(1))));
        }
        let Some(i) = (0..n).find(|&i| side[i] < 2) else {
            return Ok(None);
        };
        side[i] += 1;
        side[..i].fill(0);
    }
}

/// Bitmasks over `0..n` with exactly `k` bits, in increasing order.
pub(crate) fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut next = if k == 0 { Some(0u64) } else if k > n { None } else { Some((1u64 << k) - 1) };
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            // Gosper's hack
            let low = cur & cur.wrapping_neg();
            let ripple = cur + low;
            let succ = (((ripple ^ cur) >> 2) / low) | ripple;
            (ripple != 0 && succ <= limit && succ.count_ones() == k as u32).then_some(succ)
        };
        Some(cur)
    })
}
