//! Pendant subgraphs: connected `U` of bounded treewidth with a small open
//! neighbourhood and a property of `G[U]`.

use super::ApplicationError;
use crate::boundaried::{Kind, Structure};
use crate::connenum::{for_each_connected_set, ConnectedSetQuery};
use crate::finite_state::Property;
use crate::graph::{induced_subgraph, Graph, VertexSet};
use crate::treewidth::treewidth;

#[derive(Clone, Debug, PartialEq)]
pub struct PendantInstance {
    graph: Graph,
    k: usize,
    t: usize,
    prop: Property,
}

impl PendantInstance {
    /// `prop` is evaluated on induced subgraphs, so it must take a bare graph.
    pub fn new(graph: Graph, k: usize, t: usize, prop: Property) -> Result<Self, ApplicationError> {
        if prop.signature() != [Kind::Graph] {
            return Err(ApplicationError::PropertyArity(prop.name()));
        }
        Ok(PendantInstance { graph, k, t, prop })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn prop(&self) -> Property {
        self.prop
    }

    /// Everything except the neighbourhood bound, which the enumeration
    /// guarantees.
    pub fn accepts_subgraph(&self, u: &VertexSet) -> Result<bool, ApplicationError> {
        let sub = induced_subgraph(&self.graph, u)?;
        Ok(treewidth(&sub)? <= self.t && self.prop.evaluate(&Structure::of_graph(sub)))
    }
}

/// Largest `|U|` searched: `3(s + t) - 1`.
pub fn pendant_size_cap(s: usize, t: usize) -> usize {
    (3 * (s + t)).saturating_sub(1)
}

/// First `U`, by root and then lexicographically, among connected sets with
/// `|U| <= 3(s + t) - 1` and `|N(U)| <= k` whose induced subgraph has
/// treewidth at most `t` and satisfies the property. Complete when the graph
/// is `(s, k + t)`-unbreakable.
pub fn pendant_solve_unbreakable(inst: &PendantInstance, s: usize) -> Result<Option<VertexSet>, ApplicationError> {
    let p = pendant_size_cap(s, inst.t);
    if p == 0 {
        return Ok(None);
    }
    for &v in inst.graph.vertices() {
        let mut sets = Vec::new();
        for_each_connected_set(&inst.graph, ConnectedSetQuery::new(v, p, inst.k), |u| sets.push(u.clone()))?;
        sets.sort();
        for u in sets {
            if inst.accepts_subgraph(&u)? {
                return Ok(Some(u));
            }
        }
    }
    Ok(None)
}

pub fn pendant_separation_bound_check(s: usize, t: usize, u: &VertexSet) -> bool {
    u.len() < 3 * (s + t)
}
