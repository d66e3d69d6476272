//! Bounded enumeration of boundaried structures up to isomorphism.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;

use super::FiniteStateError;
use crate::boundaried::{canonical_form, BoundariedGraph, BoundariedStructure, Element, Kind, Label};
use crate::graph::{EdgeSet, Graph, VertexSet};

/// Largest universe or context bound accepted.
pub const MAX_BOUND: usize = 6;
/// Largest separator budget accepted.
pub const MAX_C: usize = 2;
/// Cap on raw candidates generated before deduplication.
pub const MAX_RAW: u128 = 20_000_000;

pub fn check_budget(signature: &[Kind], c: usize, bound: usize) -> Result<(), FiniteStateError> {
    if signature.first() != Some(&Kind::Graph) || signature[1..].iter().any(|k| matches!(k, Kind::Graph | Kind::Star)) {
        return Err(FiniteStateError::BadSignature);
    }
    if c > MAX_C || bound > MAX_BOUND {
        return Err(FiniteStateError::Budget(format!(
            "bounds must satisfy c <= {MAX_C} and vertex bound <= {MAX_BOUND}, got c={c}, bound={bound}"
        )));
    }
    let raw = raw_count(signature, c, bound);
    if raw > MAX_RAW {
        return Err(FiniteStateError::Budget(format!(
            "{raw} raw candidates exceed the cap of {MAX_RAW}"
        )));
    }
    Ok(())
}

fn raw_count(signature: &[Kind], c: usize, bound: usize) -> u128 {
    let mut total = 0u128;
    for n in 0..=bound {
        let pairs = n * n.saturating_sub(1) / 2;
        let labelings: u128 = (0..=n.min(2 * c))
            .map(|k| crate::universal::binomial(2 * c, k))
            .sum();
        // element choices are maximised over graphs with all pairs present
        let per_graph: u128 = signature[1..]
            .iter()
            .map(|k| match k {
                Kind::Vertex => n as u128 + 1,
                Kind::Edge => pairs as u128 + 1,
                Kind::VertexSet => 1u128 << n,
                Kind::EdgeSet => 1u128 << pairs,
                _ => 1,
            })
            .product();
        total += labelings * (1u128 << pairs) * per_graph;
    }
    total
}

/// Every boundaried structure with the given signature, at most `bound`
/// vertices, a simple underlying graph, and labels drawn from `1..=2c`, one
/// canonical copy per isomorphism class. Order: by vertex count, then by
/// generation order.
pub fn enumerate_universe(
    signature: &[Kind],
    c: usize,
    bound: usize,
) -> Result<Vec<BoundariedStructure>, FiniteStateError> {
    check_budget(signature, c, bound)?;
    let mut out = Vec::new();
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    for n in 0..=bound {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let label_sets = label_subsets(2 * c, n);
        let masks: Vec<u64> = (0..1u64 << pairs.len()).collect();
        let batch: Vec<Vec<(Vec<u8>, BoundariedStructure)>> = masks
            .par_iter()
            .map(|&mask| {
                let edges: Vec<(usize, usize)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                let graph = Graph::with_order(n, &edges).expect("valid pairs");
                let mut local = Vec::new();
                let mut local_seen = HashSet::new();
                for labels in &label_sets {
                    let map: BTreeMap<usize, Label> =
                        labels.iter().enumerate().map(|(i, &l)| (i, l)).collect();
                    let bgraph = BoundariedGraph::new(graph.clone(), map).expect("valid labels");
                    for elements in element_choices(&signature[1..], n, edges.len()) {
                        let s = BoundariedStructure::new(bgraph.clone(), elements).expect("valid elements");
                        let (form, _) = canonical_form(&s);
                        let key = form.to_text().into_bytes();
                        if local_seen.insert(key.clone()) {
                            local.push((key, form));
                        }
                    }
                }
                local
            })
            .collect();
        for (key, form) in batch.into_iter().flatten() {
            if seen.insert(key) {
                out.push(form);
            }
        }
    }
    Ok(out)
}

/// Ascending label subsets of `1..=max` with at most `n` members.
fn label_subsets(max: usize, n: usize) -> Vec<Vec<Label>> {
    (0u32..1 << max)
        .filter(|m| m.count_ones() as usize <= n)
        .map(|m| (0..max as u32).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect())
        .collect()
}

fn element_choices(kinds: &[Kind], n: usize, m: usize) -> Vec<Vec<Element>> {
    let mut out = vec![Vec::new()];
    for kind in kinds {
        let options: Vec<Element> = match kind {
            Kind::Vertex => std::iter::once(Element::Star)
                .chain((0..n).map(Element::Vertex))
                .collect(),
            Kind::Edge => std::iter::once(Element::Star)
                .chain((0..m).map(Element::Edge))
                .collect(),
            Kind::VertexSet => (0u64..1 << n)
                .map(|mask| Element::VertexSet((0..n).filter(|i| mask >> i & 1 == 1).collect::<VertexSet>()))
                .collect(),
            Kind::EdgeSet => (0u64..1 << m)
                .map(|mask| Element::EdgeSet((0..m).filter(|i| mask >> i & 1 == 1).collect::<EdgeSet>()))
                .collect(),
            Kind::Graph | Kind::Star => unreachable!("checked signature"),
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut next = prefix.clone();
                    next.push(o.clone());
                    next
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_counts_without_labels() {
        // non-isomorphic simple graphs on 0..=4 vertices: 1, 1, 2, 4, 11
        let u = enumerate_universe(&[Kind::Graph], 0, 4).unwrap();
        assert_eq!(u.len(), 1 + 1 + 2 + 4 + 11);
    }

    #[test]
    fn labels_and_elements_multiply() {
        // one vertex: unlabeled, label 1, label 2
        let u = enumerate_universe(&[Kind::Graph], 1, 1).unwrap();
        assert_eq!(u.len(), 1 + 3);
        // vertex slot on at most one unlabeled vertex: empty graph with star,
        // one vertex with star or itself
        let u = enumerate_universe(&[Kind::Graph, Kind::Vertex], 0, 1).unwrap();
        assert_eq!(u.len(), 3);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(enumerate_universe(&[Kind::Graph], 3, 2).is_err());
        assert!(enumerate_universe(&[Kind::Graph], 1, 7).is_err());
        assert!(enumerate_universe(&[Kind::Graph, Kind::EdgeSet, Kind::EdgeSet], 2, 6).is_err());
        assert!(enumerate_universe(&[Kind::VertexSet], 1, 2).is_err());
    }
}
