//! Enumeration of connected vertex sets with bounded size and bounded open
//! neighbourhood around a root.

use thiserror::Error;

use crate::graph::{Graph, VertexId, VertexSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("root {0} is not a vertex of the graph")]
    MissingRoot(VertexId),
    #[error("size bound p must be at least 1")]
    ZeroSize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConnectedSetQuery {
    pub root: VertexId,
    pub p: usize,
    pub q: usize,
}

impl ConnectedSetQuery {
    pub fn new(root: VertexId, p: usize, q: usize) -> Self {
        ConnectedSetQuery { root, p, q }
    }
}

/// Every `U` with `root ∈ U`, `G[U]` connected, `|U| <= p` and `|N(U)| <= q`,
/// sorted lexicographically.
pub fn enum_connected_sets(g: &Graph, query: ConnectedSetQuery) -> Result<Vec<VertexSet>, EnumError> {
    let mut out = Vec::new();
    for_each_connected_set(g, query, |u| out.push(u.clone()))?;
    out.sort();
    Ok(out)
}

/// Streaming form of [`enum_connected_sets`]; sets arrive in search order.
pub fn for_each_connected_set(
    g: &Graph,
    query: ConnectedSetQuery,
    mut visit: impl FnMut(&VertexSet),
) -> Result<(), EnumError> {
    let root = g.index_of(query.root).ok_or(EnumError::MissingRoot(query.root))?;
    if query.p == 0 {
        return Err(EnumError::ZeroSize);
    }
    let adj = g.dense_adjacency();
    let mut state = Branch {
        g,
        adj: &adj,
        p: query.p,
        q: query.q,
        in_u: vec![false; g.n()],
        in_f: vec![false; g.n()],
        u: vec![root],
        f: Vec::new(),
    };
    state.in_u[root] = true;
    state.run(&mut visit);
    Ok(())
}

struct Branch<'a> {
    g: &'a Graph,
    adj: &'a [Vec<usize>],
    p: usize,
    q: usize,
    in_u: Vec<bool>,
    in_f: Vec<bool>,
    u: Vec<usize>,
    f: Vec<usize>,
}

impl Branch<'_> {
    /// Smallest neighbour of `U` that is neither in `U` nor forbidden.
    fn candidate(&self) -> Option<usize> {
        self.u
            .iter()
            .flat_map(|&x| self.adj[x].iter().copied())
            .filter(|&w| !self.in_u[w] && !self.in_f[w])
            .min()
    }

    fn run(&mut self, visit: &mut impl FnMut(&VertexSet)) {
        let Some(w) = self.candidate() else {
            // every neighbour is forbidden, so N(U) = F and |N(U)| <= q
            let set = self.u.iter().map(|&i| self.g.vertices()[i]).collect();
            visit(&set);
            return;
        };
        if self.u.len() < self.p {
            self.in_u[w] = true;
            self.u.push(w);
            self.run(visit);
            self.u.pop();
            self.in_u[w] = false;
        }
        if self.f.len() < self.q {
            self.in_f[w] = true;
            self.f.push(w);
            self.run(visit);
            self.f.pop();
            self.in_f[w] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(v: &[&[usize]]) -> Vec<VertexSet> {
        let mut out: Vec<VertexSet> = v.iter().map(|s| s.iter().copied().collect()).collect();
        out.sort();
        out
    }

    #[test]
    fn isolated_root() {
        let g = Graph::with_order(3, &[(1, 2)]).unwrap();
        for (p, q) in [(1, 0), (3, 2)] {
            let got = enum_connected_sets(&g, ConnectedSetQuery::new(0, p, q)).unwrap();
            assert_eq!(got, sets(&[&[0]]));
        }
    }

    #[test]
    fn star_center() {
        let g = Graph::with_order(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let got = enum_connected_sets(&g, ConnectedSetQuery::new(0, 2, 3)).unwrap();
        assert_eq!(got, sets(&[&[0], &[0, 1], &[0, 2], &[0, 3]]));
    }

    #[test]
    fn path_with_single_boundary() {
        let g = Graph::path(5);
        let got = enum_connected_sets(&g, ConnectedSetQuery::new(2, 3, 1)).unwrap();
        assert_eq!(got, sets(&[&[0, 1, 2], &[2, 3, 4]]));
    }

    #[test]
    fn q_zero_gives_whole_component() {
        let g = Graph::with_order(5, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        let got = enum_connected_sets(&g, ConnectedSetQuery::new(1, 5, 0)).unwrap();
        assert_eq!(got, sets(&[&[0, 1, 2]]));
        assert!(enum_connected_sets(&g, ConnectedSetQuery::new(1, 2, 0)).unwrap().is_empty());
    }

    #[test]
    fn errors() {
        let g = Graph::path(2);
        assert_eq!(
            enum_connected_sets(&g, ConnectedSetQuery::new(5, 1, 1)),
            Err(EnumError::MissingRoot(5))
        );
        assert_eq!(enum_connected_sets(&g, ConnectedSetQuery::new(0, 0, 1)), Err(EnumError::ZeroSize));
    }
}
