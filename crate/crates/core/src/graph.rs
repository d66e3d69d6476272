//! Multigraphs, separations and the `(s, c)`-unbreakability predicates.
//!
//! A [`Graph`] is an immutable multigraph over an ordered set of integer vertex
//! ids. Edges are unordered pairs stored with their endpoints normalised so
//! that `u <= v`; parallel edges and self-loops are kept as separate entries and
//! every edge is addressed by its stable index in [`Graph::edges`].
//!
//! Self-loops never contribute to neighbourhoods, connectivity or separations.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::text::{records, ParseError};

pub type VertexId = usize;
pub type EdgeIndex = usize;
pub type VertexSet = BTreeSet<VertexId>;
pub type EdgeSet = BTreeSet<EdgeIndex>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),
    #[error("edge {0} is not in the graph")]
    UnknownEdge(EdgeIndex),
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(VertexId),
    #[error("break parameter s must be at least 1")]
    ZeroSideSize,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Graph {
    vertices: Vec<VertexId>,
    edges: Vec<(VertexId, VertexId)>,
}

impl Graph {
    /// Builds a graph from arbitrary vertex ids and edges between them.
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let mut vertices: Vec<VertexId> = vertices.into_iter().collect();
        vertices.sort_unstable();
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateVertex(w[0]));
        }
        let mut normalized = Vec::new();
        for (u, v) in edges {
            for x in [u, v] {
                if vertices.binary_search(&x).is_err() {
                    return Err(GraphError::UnknownVertex(x));
                }
            }
            normalized.push((u.min(v), u.max(v)));
        }
        Ok(Graph {
            vertices,
            edges: normalized,
        })
    }

    /// Graph on `0..n` with the given edges.
    pub fn with_order(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        Graph::new(0..n, edges.iter().copied())
    }

    /// Trusted constructor for callers that already hold sorted unique ids and
    /// normalised edges over them.
    pub(crate) fn from_parts_unchecked(
        vertices: Vec<VertexId>,
        edges: Vec<(VertexId, VertexId)>,
    ) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges.iter().all(|&(u, v)| u <= v));
        Graph { vertices, edges }
    }

    pub fn empty() -> Self {
        Graph::default()
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_parts_unchecked((0..n).collect(), edges)
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::from_parts_unchecked((0..n).collect(), edges)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn vertex_set(&self) -> VertexSet {
        self.vertices.iter().copied().collect()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// Position of `v` in the sorted vertex list.
    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn edge(&self, e: EdgeIndex) -> Option<(VertexId, VertexId)> {
        self.edges.get(e).copied()
    }

    /// Neighbour lists over dense indices (positions in [`Graph::vertices`]),
    /// sorted, without duplicates and without self-loops.
    pub fn dense_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n()];
        for &(u, v) in &self.edges {
            if u == v {
                continue;
            }
            let (iu, iv) = (self.idx(u), self.idx(v));
            adj[iu].push(iv);
            adj[iv].push(iu);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| usize::from(a == v) + usize::from(b == v))
            .sum()
    }

    fn idx(&self, v: VertexId) -> usize {
        self.vertices
            .binary_search(&v)
            .expect("edge endpoints are graph vertices")
    }

    pub(crate) fn check_subset<'a>(
        &self,
        set: impl IntoIterator<Item = &'a VertexId>,
    ) -> Result<(), GraphError> {
        for &v in set {
            if !self.contains(v) {
                return Err(GraphError::UnknownVertex(v));
            }
        }
        Ok(())
    }

    /// Graph with the given vertices deleted (together with incident edges).
    pub fn remove_vertices(&self, removed: &VertexSet) -> Graph {
        let keep: VertexSet = self
            .vertices
            .iter()
            .copied()
            .filter(|v| !removed.contains(v))
            .collect();
        induced_subgraph(self, &keep).expect("subset of own vertices")
    }

    /// Same vertex set, keeping only the edges whose index is not in `removed`.
    pub fn remove_edges(&self, removed: &EdgeSet) -> Graph {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !removed.contains(i))
            .map(|(_, &e)| e)
            .collect();
        Graph::from_parts_unchecked(self.vertices.clone(), edges)
    }

    /// Parses the `p <n> <m>` / `e <u> <v>` text format.
    pub fn parse(text: &str) -> Result<Graph, GraphError> {
        let mut builder = GraphTextBuilder::default();
        for rec in records(text) {
            if !builder.accept(&rec)? {
                return Err(ParseError::new(rec.line, format!("unknown record `{}`", rec.tag)).into());
            }
        }
        Ok(builder.finish()?)
    }

    /// Writes the graph in the text format. Vertex ids are compacted to their
    /// positions `0..n`, so a round trip preserves the graph only up to that
    /// renaming (and exactly when ids are already `0..n`).
    pub fn to_text(&self) -> String {
        let mut out = format!("p {} {}\n", self.n(), self.m());
        for &(u, v) in &self.edges {
            out.push_str(&format!("e {} {}\n", self.idx(u), self.idx(v)));
        }
        out
    }
}

/// Incremental reader for the `p`/`e` records, reused by the extended formats.
#[derive(Default)]
pub(crate) struct GraphTextBuilder {
    header: Option<(usize, usize, usize)>,
    edges: Vec<(VertexId, VertexId)>,
}

impl GraphTextBuilder {
    /// Consumes `p` and `e` records; returns `false` for any other tag.
    pub(crate) fn accept(&mut self, rec: &crate::text::Record<'_>) -> Result<bool, ParseError> {
        match rec.tag {
            "p" => {
                rec.expect_fields(2)?;
                if self.header.is_some() {
                    return Err(ParseError::new(rec.line, "duplicate `p` header"));
                }
                self.header = Some((rec.parse_field(0)?, rec.parse_field(1)?, rec.line));
                Ok(true)
            }
            "e" => {
                rec.expect_fields(2)?;
                let (n, _, _) = self
                    .header
                    .ok_or_else(|| ParseError::new(rec.line, "`e` before `p` header"))?;
                let u: usize = rec.parse_field(0)?;
                let v: usize = rec.parse_field(1)?;
                if u >= n || v >= n {
                    return Err(ParseError::new(
                        rec.line,
                        format!("edge endpoint out of range 0..{n}"),
                    ));
                }
                self.edges.push((u.min(v), u.max(v)));
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    pub(crate) fn finish(self) -> Result<Graph, ParseError> {
        let (n, m, line) = self
            .header
            .ok_or_else(|| ParseError::new(1, "missing `p <n> <m>` header"))?;
        if self.edges.len() != m {
            return Err(ParseError::new(
                line,
                format!("header declares {m} edges, found {}", self.edges.len()),
            ));
        }
        Ok(Graph::from_parts_unchecked((0..n).collect(), self.edges))
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(V={:?}, E={:?})", self.vertices, self.edges)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Separation {
    pub x_side: VertexSet,
    pub y_side: VertexSet,
}

impl Separation {
    pub fn new(x_side: VertexSet, y_side: VertexSet) -> Self {
        Separation { x_side, y_side }
    }

    pub fn order(&self) -> usize {
        self.x_side.intersection(&self.y_side).count()
    }

    pub fn separator(&self) -> VertexSet {
        self.x_side.intersection(&self.y_side).copied().collect()
    }

    pub fn x_only(&self) -> VertexSet {
        self.x_side.difference(&self.y_side).copied().collect()
    }

    pub fn y_only(&self) -> VertexSet {
        self.y_side.difference(&self.x_side).copied().collect()
    }

    pub fn swapped(&self) -> Separation {
        Separation::new(self.y_side.clone(), self.x_side.clone())
    }

    /// Both strict sides exceed `threshold` and the order is at most `c`.
    pub fn exceeds(&self, threshold: usize, c: usize) -> bool {
        self.order() <= c
            && self.x_side.len() - self.order() > threshold
            && self.y_side.len() - self.order() > threshold
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BreakParams {
    s: usize,
    c: usize,
}

impl BreakParams {
    pub fn new(s: usize, c: usize) -> Result<Self, GraphError> {
        if s == 0 {
            return Err(GraphError::ZeroSideSize);
        }
        Ok(BreakParams { s, c })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn c(&self) -> usize {
        self.c
    }
}

pub fn is_separation(g: &Graph, x: &VertexSet, y: &VertexSet) -> Result<bool, GraphError> {
    g.check_subset(x)?;
    g.check_subset(y)?;
    if x.len() + y.len() - x.intersection(y).count() != g.n() {
        return Ok(false);
    }
    let crosses = g.edges().iter().any(|&(u, v)| {
        let (ux, uy) = (x.contains(&u), y.contains(&u));
        let (vx, vy) = (x.contains(&v), y.contains(&v));
        (ux && !uy && vy && !vx) || (vx && !vy && uy && !ux)
    });
    Ok(!crosses)
}

/// `(s, c)`-witnessing test: order at most `c` and both strict sides larger
/// than `s`. Assumes `sep` is a separation of `g`.
pub fn is_witnessing(_g: &Graph, sep: &Separation, p: BreakParams) -> bool {
    sep.exceeds(p.s, p.c)
}

/// Connected components, each block sorted, blocks ordered by smallest id.
pub fn connected_components(g: &Graph) -> Vec<VertexSet> {
    let adj = g.dense_adjacency();
    let mut seen = vec![false; g.n()];
    let mut blocks = Vec::new();
    for start in 0..g.n() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut block = VertexSet::new();
        while let Some(u) = stack.pop() {
            block.insert(g.vertices()[u]);
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        blocks.push(block);
    }
    blocks
}

pub fn is_connected(g: &Graph) -> bool {
    connected_components(g).len() <= 1
}

pub fn induced_subgraph(g: &Graph, u: &VertexSet) -> Result<Graph, GraphError> {
    g.check_subset(u)?;
    let edges = g
        .edges()
        .iter()
        .copied()
        .filter(|(a, b)| u.contains(a) && u.contains(b))
        .collect();
    Ok(Graph::from_parts_unchecked(u.iter().copied().collect(), edges))
}

pub fn neighborhood(g: &Graph, u: &VertexSet, closed: bool) -> Result<VertexSet, GraphError> {
    g.check_subset(u)?;
    let mut out = VertexSet::new();
    for &(a, b) in g.edges() {
        if a == b {
            continue;
        }
        if u.contains(&a) && !u.contains(&b) {
            out.insert(b);
        }
        if u.contains(&b) && !u.contains(&a) {
            out.insert(a);
        }
    }
    if closed {
        out.extend(u.iter().copied());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> VertexSet {
        v.iter().copied().collect()
    }

    fn bowtie() -> Graph {
        Graph::with_order(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]).unwrap()
    }

    #[test]
    fn separation_examples() {
        let e = Graph::with_order(2, &[(0, 1)]).unwrap();
        assert!(!is_separation(&e, &set(&[0]), &set(&[1])).unwrap());
        assert!(is_separation(&e, &set(&[0, 1]), &set(&[1])).unwrap());
        let p = Graph::path(3);
        let (x, y) = (set(&[0, 1]), set(&[1, 2]));
        assert!(is_separation(&p, &x, &y).unwrap());
        assert_eq!(Separation::new(x, y).order(), 1);
    }

    #[test]
    fn separation_must_cover() {
        let p = Graph::path(3);
        assert!(!is_separation(&p, &set(&[0]), &set(&[1])).unwrap());
    }

    #[test]
    fn separation_rejects_foreign_ids() {
        let p = Graph::path(3);
        assert_eq!(
            is_separation(&p, &set(&[0, 7]), &set(&[1, 2])),
            Err(GraphError::UnknownVertex(7))
        );
    }

    #[test]
    fn self_loop_never_crosses() {
        let g = Graph::with_order(2, &[(0, 0), (1, 1)]).unwrap();
        assert!(is_separation(&g, &set(&[0]), &set(&[1])).unwrap());
    }

    #[test]
    fn witnessing_examples() {
        for s in 1..4 {
            let n = 2 * s + 3;
            let g = Graph::path(n);
            let center = s + 1;
            let x: VertexSet = (0..=center).collect();
            let y: VertexSet = (center..n).collect();
            assert!(is_separation(&g, &x, &y).unwrap());
            let sep = Separation::new(x, y);
            assert!(is_witnessing(&g, &sep, BreakParams::new(s, 1).unwrap()));
        }

        let k5 = Graph::complete(5);
        let p = BreakParams::new(1, 1).unwrap();
        // every order-<=1 separation of K5 has an empty strict side
        for v in 0..5usize {
            let rest: VertexSet = (0..5).filter(|&u| u != v).collect();
            for mask in 0u32..16 {
                let left: VertexSet = rest
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &u)| u)
                    .collect();
                let mut x = left.clone();
                x.insert(v);
                let mut y: VertexSet = rest.difference(&left).copied().collect();
                y.insert(v);
                if is_separation(&k5, &x, &y).unwrap() {
                    assert!(!is_witnessing(&k5, &Separation::new(x, y), p));
                }
            }
        }

        let g = bowtie();
        let sep = Separation::new(set(&[0, 1, 2]), set(&[2, 3, 4]));
        assert!(is_separation(&g, &sep.x_side, &sep.y_side).unwrap());
        assert!(is_witnessing(&g, &sep, p));
    }

    #[test]
    fn zero_s_rejected() {
        assert_eq!(BreakParams::new(0, 1), Err(GraphError::ZeroSideSize));
    }

    #[test]
    fn components_examples() {
        assert!(connected_components(&Graph::empty()).is_empty());
        let g = Graph::with_order(4, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(connected_components(&g), vec![set(&[0, 1, 2]), set(&[3])]);
        assert_eq!(connected_components(&Graph::complete(4)).len(), 1);
    }

    #[test]
    fn induced_examples() {
        let k3 = Graph::complete(3);
        assert_eq!(induced_subgraph(&k3, &set(&[0, 2])).unwrap().m(), 1);
        assert_eq!(induced_subgraph(&k3, &set(&[])).unwrap(), Graph::empty());
        let double = Graph::with_order(3, &[(0, 1), (0, 1), (1, 2)]).unwrap();
        let sub = induced_subgraph(&double, &set(&[0, 1])).unwrap();
        assert_eq!(sub.edges(), &[(0, 1), (0, 1)]);
        assert_eq!(induced_subgraph(&double, &double.vertex_set()).unwrap(), double);
        assert!(induced_subgraph(&k3, &set(&[4])).is_err());
    }

    #[test]
    fn neighborhood_examples() {
        let star = Graph::with_order(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(neighborhood(&star, &set(&[0]), false).unwrap(), set(&[1, 2, 3]));
        let iso = Graph::with_order(2, &[(1, 1)]).unwrap();
        assert!(neighborhood(&iso, &set(&[0]), false).unwrap().is_empty());
        assert!(neighborhood(&iso, &set(&[1]), false).unwrap().is_empty());
        let p = Graph::path(4);
        assert_eq!(neighborhood(&p, &set(&[1, 2]), false).unwrap(), set(&[0, 3]));
        assert_eq!(neighborhood(&p, &set(&[1, 2]), true).unwrap(), set(&[0, 1, 2, 3]));
    }

    #[test]
    fn text_round_trip() {
        let g = Graph::with_order(3, &[(0, 1), (0, 1), (2, 2)]).unwrap();
        assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
        let parsed = Graph::parse("# a comment\np 3 2\n\ne 0 1\ne 2 1\n").unwrap();
        assert_eq!(parsed.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn text_errors_carry_line() {
        let err = Graph::parse("p 2 1\ne 0 5\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse(ParseError { line: 2, .. })));
        let err = Graph::parse("p 2 2\ne 0 1\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse(ParseError { line: 1, .. })));
        assert!(Graph::parse("e 0 1\n").is_err());
        assert!(Graph::parse("p 2 0\nq 1\n").is_err());
    }

    #[test]
    fn sparse_ids_are_supported() {
        let g = Graph::new([10, 3, 7], [(10, 3), (7, 7)]).unwrap();
        assert_eq!(g.vertices(), &[3, 7, 10]);
        assert_eq!(g.edges(), &[(3, 10), (7, 7)]);
        assert_eq!(connected_components(&g), vec![set(&[3, 10]), set(&[7])]);
        assert!(Graph::new([1, 1], []).is_err());
        assert!(Graph::new([1], [(1, 2)]).is_err());
    }
}
