//! Boundaried graphs, structures and boundaried structures, with compatibility,
//! gluing and a canonical code for isomorphism-invariant deduplication.
//!
//! Element positions follow the mathematical indexing: position 1 of a
//! structure is its graph, so `elements()[0]` is position 2.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::graph::{EdgeIndex, EdgeSet, Graph, GraphError, GraphTextBuilder, VertexId, VertexSet};
use crate::text::{records, ParseError};

pub type Label = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundariedError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("label 0 is reserved; labels must be positive")]
    ZeroLabel,
    #[error("label {0} is used by more than one boundary vertex")]
    DuplicateLabel(Label),
    #[error("element at position {position} references {what} outside the graph")]
    ForeignReference { position: usize, what: String },
    #[error("a plain structure cannot hold the placeholder at position {0}")]
    StarInStructure(usize),
    #[error("only vertex sets and edge sets can be appended")]
    NotASet,
    #[error("structures are not compatible: {0}")]
    Incompatible(String),
    #[error("structures with more than {0} elements are not supported")]
    TooManyElements(usize),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Upper bound on the number of non-graph elements; element memberships are
/// tracked in 64-bit masks.
pub const MAX_ELEMENTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Graph,
    Vertex,
    Edge,
    VertexSet,
    EdgeSet,
    Star,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Graph => "graph",
            Kind::Vertex => "vertex",
            Kind::Edge => "edge",
            Kind::VertexSet => "vset",
            Kind::EdgeSet => "eset",
            Kind::Star => "star",
        }
    }

    pub fn from_name(name: &str) -> Option<Kind> {
        Some(match name {
            "graph" => Kind::Graph,
            "vertex" => Kind::Vertex,
            "edge" => Kind::Edge,
            "vset" => Kind::VertexSet,
            "eset" => Kind::EdgeSet,
            "star" => Kind::Star,
            _ => return None,
        })
    }

    pub fn is_point(self) -> bool {
        matches!(self, Kind::Vertex | Kind::Edge)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Element {
    Vertex(VertexId),
    Edge(EdgeIndex),
    VertexSet(VertexSet),
    EdgeSet(EdgeSet),
    Star,
}

impl Element {
    pub fn kind(&self) -> Kind {
        match self {
            Element::Vertex(_) => Kind::Vertex,
            Element::Edge(_) => Kind::Edge,
            Element::VertexSet(_) => Kind::VertexSet,
            Element::EdgeSet(_) => Kind::EdgeSet,
            Element::Star => Kind::Star,
        }
    }

    /// Empty set of the given set kind, `Star` for vertex and edge kinds.
    pub fn neutral(kind: Kind) -> Element {
        match kind {
            Kind::VertexSet => Element::VertexSet(VertexSet::new()),
            Kind::EdgeSet => Element::EdgeSet(EdgeSet::new()),
            _ => Element::Star,
        }
    }
}

fn check_elements(g: &Graph, elements: &[Element]) -> Result<(), BoundariedError> {
    if elements.len() > MAX_ELEMENTS {
        return Err(BoundariedError::TooManyElements(MAX_ELEMENTS));
    }
    for (i, el) in elements.iter().enumerate() {
        let position = i + 2;
        let bad_vertex = |v: &VertexId| BoundariedError::ForeignReference {
            position,
            what: format!("vertex {v}"),
        };
        let bad_edge = |e: &EdgeIndex| BoundariedError::ForeignReference {
            position,
            what: format!("edge {e}"),
        };
        match el {
            Element::Vertex(v) if !g.contains(*v) => return Err(bad_vertex(v)),
            Element::Edge(e) if *e >= g.m() => return Err(bad_edge(e)),
            Element::VertexSet(s) => {
                if let Some(v) = s.iter().find(|v| !g.contains(**v)) {
                    return Err(bad_vertex(v));
                }
            }
            Element::EdgeSet(s) => {
                if let Some(e) = s.iter().find(|e| **e >= g.m()) {
                    return Err(bad_edge(e));
                }
            }
            _ => {}
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundariedGraph {
    graph: Graph,
    labels: BTreeMap<VertexId, Label>,
}

impl BoundariedGraph {
    pub fn new(graph: Graph, labels: BTreeMap<VertexId, Label>) -> Result<Self, BoundariedError> {
        let mut seen = BTreeSet::new();
        for (&v, &l) in &labels {
            if !graph.contains(v) {
                return Err(GraphError::UnknownVertex(v).into());
            }
            if l == 0 {
                return Err(BoundariedError::ZeroLabel);
            }
            if !seen.insert(l) {
                return Err(BoundariedError::DuplicateLabel(l));
            }
        }
        Ok(BoundariedGraph { graph, labels })
    }

    pub fn unlabeled(graph: Graph) -> Self {
        BoundariedGraph {
            graph,
            labels: BTreeMap::new(),
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn labels(&self) -> &BTreeMap<VertexId, Label> {
        &self.labels
    }

    pub fn boundary(&self) -> VertexSet {
        self.labels.keys().copied().collect()
    }

    pub fn label_set(&self) -> BTreeSet<Label> {
        self.labels.values().copied().collect()
    }

    pub fn label_of(&self, v: VertexId) -> Option<Label> {
        self.labels.get(&v).copied()
    }

    pub fn vertex_with_label(&self, l: Label) -> Option<VertexId> {
        self.labels.iter().find(|(_, &x)| x == l).map(|(&v, _)| v)
    }
}

/// Result of gluing two boundaried graphs, with the identity maps from each
/// input into the glued graph.
#[derive(Clone, Debug)]
pub struct Glued {
    pub graph: Graph,
    pub left_vertex: BTreeMap<VertexId, VertexId>,
    pub right_vertex: BTreeMap<VertexId, VertexId>,
    pub left_edge: Vec<EdgeIndex>,
    pub right_edge: Vec<EdgeIndex>,
}

/// Disjoint union with equally labelled boundary vertices identified.
///
/// Glued ids are dense: the left graph's vertices first in sorted order, then
/// the right graph's unmatched vertices. Edges keep their multiplicity, left
/// edges first.
pub fn glue_graphs(a: &BoundariedGraph, b: &BoundariedGraph) -> Glued {
    let mut left_vertex = BTreeMap::new();
    for (i, &v) in a.graph.vertices().iter().enumerate() {
        left_vertex.insert(v, i);
    }
    let mut next = a.graph.n();
    let mut right_vertex = BTreeMap::new();
    for &v in b.graph.vertices() {
        let shared = b
            .label_of(v)
            .and_then(|l| a.vertex_with_label(l))
            .map(|u| left_vertex[&u]);
        let id = shared.unwrap_or_else(|| {
            next += 1;
            next - 1
        });
        right_vertex.insert(v, id);
    }
    let mut edges = Vec::with_capacity(a.graph.m() + b.graph.m());
    let mut left_edge = Vec::with_capacity(a.graph.m());
    for &(u, v) in a.graph.edges() {
        left_edge.push(edges.len());
        edges.push(norm(left_vertex[&u], left_vertex[&v]));
    }
    let mut right_edge = Vec::with_capacity(b.graph.m());
    for &(u, v) in b.graph.edges() {
        right_edge.push(edges.len());
        edges.push(norm(right_vertex[&u], right_vertex[&v]));
    }
    Glued {
        graph: Graph::from_parts_unchecked((0..next).collect(), edges),
        left_vertex,
        right_vertex,
        left_edge,
        right_edge,
    }
}

fn norm(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    (u.min(v), u.max(v))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Structure {
    graph: Graph,
    elements: Vec<Element>,
}

impl Structure {
    pub fn new(graph: Graph, elements: Vec<Element>) -> Result<Self, BoundariedError> {
        if let Some(i) = elements.iter().position(|e| *e == Element::Star) {
            return Err(BoundariedError::StarInStructure(i + 2));
        }
        check_elements(&graph, &elements)?;
        Ok(Structure { graph, elements })
    }

    pub fn of_graph(graph: Graph) -> Self {
        Structure {
            graph,
            elements: Vec::new(),
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn arity(&self) -> usize {
        1 + self.elements.len()
    }

    /// Element at 1-based position `i >= 2`.
    pub fn element(&self, i: usize) -> Option<&Element> {
        i.checked_sub(2).and_then(|j| self.elements.get(j))
    }

    pub fn signature(&self) -> Vec<Kind> {
        std::iter::once(Kind::Graph)
            .chain(self.elements.iter().map(Element::kind))
            .collect()
    }

    /// Appends a vertex set or edge set as a new last position.
    pub fn append(&self, x: Element) -> Result<Structure, BoundariedError> {
        if !matches!(x, Element::VertexSet(_) | Element::EdgeSet(_)) {
            return Err(BoundariedError::NotASet);
        }
        let mut elements = self.elements.clone();
        elements.push(x);
        Structure::new(self.graph.clone(), elements)
    }

    pub fn parse(text: &str) -> Result<Structure, BoundariedError> {
        let bs = BoundariedStructure::parse(text)?;
        if !bs.bgraph.labels.is_empty() {
            return Err(ParseError::new(1, "plain structures take no `b` lines").into());
        }
        Structure::new(bs.bgraph.graph, bs.elements)
    }

    pub fn to_text(&self) -> String {
        BoundariedStructure::from_structure(self.clone()).to_text()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundariedStructure {
    bgraph: BoundariedGraph,
    elements: Vec<Element>,
}

/// Compatibility-relevant description of one element position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotKey {
    BoundaryVertex(Label),
    InternalVertex,
    BoundaryEdge(Label, Label),
    InternalEdge,
    VertexSet,
    EdgeSet,
    Star,
}

impl SlotKey {
    pub fn compatible_with(self, other: SlotKey) -> bool {
        use SlotKey::*;
        match (self, other) {
            (BoundaryVertex(a), BoundaryVertex(b)) => a == b,
            (BoundaryEdge(a1, a2), BoundaryEdge(b1, b2)) => (a1, a2) == (b1, b2),
            (VertexSet, VertexSet) | (EdgeSet, EdgeSet) => true,
            (Star, BoundaryVertex(_) | InternalVertex | BoundaryEdge(..) | InternalEdge) => true,
            (BoundaryVertex(_) | InternalVertex | BoundaryEdge(..) | InternalEdge, Star) => true,
            _ => false,
        }
    }
}

/// Label set plus per-position slot keys. Two boundaried structures with equal
/// keys are compatible with exactly the same partners.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompatKey {
    pub labels: Vec<Label>,
    pub slots: Vec<SlotKey>,
}

impl CompatKey {
    pub fn compatible_with(&self, other: &CompatKey) -> bool {
        self.slots.len() == other.slots.len()
            && self
                .slots
                .iter()
                .zip(&other.slots)
                .all(|(a, b)| a.compatible_with(*b))
    }
}

impl BoundariedStructure {
    pub fn new(bgraph: BoundariedGraph, elements: Vec<Element>) -> Result<Self, BoundariedError> {
        check_elements(&bgraph.graph, &elements)?;
        Ok(BoundariedStructure { bgraph, elements })
    }

    pub fn from_structure(s: Structure) -> Self {
        BoundariedStructure {
            bgraph: BoundariedGraph::unlabeled(s.graph),
            elements: s.elements,
        }
    }

    /// Drops the boundary. Fails if a placeholder is present.
    pub fn to_structure(&self) -> Result<Structure, BoundariedError> {
        Structure::new(self.bgraph.graph.clone(), self.elements.clone())
    }

    pub fn bgraph(&self) -> &BoundariedGraph {
        &self.bgraph
    }

    pub fn graph(&self) -> &Graph {
        &self.bgraph.graph
    }

    pub fn labels(&self) -> &BTreeMap<VertexId, Label> {
        &self.bgraph.labels
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn arity(&self) -> usize {
        1 + self.elements.len()
    }

    pub fn signature(&self) -> Vec<Kind> {
        std::iter::once(Kind::Graph)
            .chain(self.elements.iter().map(Element::kind))
            .collect()
    }

    pub fn compat_key(&self) -> CompatKey {
        let labels = self.bgraph.labels.values().copied().collect::<BTreeSet<_>>();
        let slots = self
            .elements
            .iter()
            .map(|el| match el {
                Element::Vertex(v) => match self.bgraph.label_of(*v) {
                    Some(l) => SlotKey::BoundaryVertex(l),
                    None => SlotKey::InternalVertex,
                },
                Element::Edge(e) => {
                    let (u, v) = self.graph().edges()[*e];
                    match (self.bgraph.label_of(u), self.bgraph.label_of(v)) {
                        (Some(a), Some(b)) => SlotKey::BoundaryEdge(a.min(b), a.max(b)),
                        _ => SlotKey::InternalEdge,
                    }
                }
                Element::VertexSet(_) => SlotKey::VertexSet,
                Element::EdgeSet(_) => SlotKey::EdgeSet,
                Element::Star => SlotKey::Star,
            })
            .collect();
        CompatKey {
            labels: labels.into_iter().collect(),
            slots,
        }
    }

    pub fn parse(text: &str) -> Result<BoundariedStructure, BoundariedError> {
        let mut builder = GraphTextBuilder::default();
        let mut labels = Vec::new();
        let mut elements = Vec::new();
        for rec in records(text) {
            if builder.accept(&rec)? {
                continue;
            }
            match rec.tag {
                "b" => {
                    rec.expect_fields(2)?;
                    labels.push((rec.line, rec.parse_field::<usize>(0)?, rec.parse_field::<Label>(1)?));
                }
                "x" => {
                    if rec.fields.len() < 2 {
                        return Err(ParseError::new(rec.line, "`x` expects a position and a kind").into());
                    }
                    let pos: usize = rec.parse_field(0)?;
                    if pos != elements.len() + 2 {
                        return Err(ParseError::new(
                            rec.line,
                            format!("expected element position {}, found {pos}", elements.len() + 2),
                        )
                        .into());
                    }
                    let kind = Kind::from_name(rec.fields[1])
                        .filter(|k| *k != Kind::Graph)
                        .ok_or_else(|| {
                            ParseError::new(rec.line, format!("unknown element kind `{}`", rec.fields[1]))
                        })?;
                    let payload: Vec<usize> = rec.parse_all(2)?;
                    let single = || {
                        if payload.len() == 1 {
                            Ok(payload[0])
                        } else {
                            Err(ParseError::new(rec.line, format!("`{}` takes one id", kind.name())))
                        }
                    };
                    let el = match kind {
                        Kind::Vertex => Element::Vertex(single()?),
                        Kind::Edge => Element::Edge(single()?),
                        Kind::VertexSet => Element::VertexSet(payload.iter().copied().collect()),
                        Kind::EdgeSet => Element::EdgeSet(payload.iter().copied().collect()),
                        Kind::Star if payload.is_empty() => Element::Star,
                        _ => return Err(ParseError::new(rec.line, "`star` takes no payload").into()),
                    };
                    elements.push((rec.line, el));
                }
                other => {
                    return Err(ParseError::new(rec.line, format!("unknown record `{other}`")).into())
                }
            }
        }
        let graph = builder.finish()?;
        let mut map = BTreeMap::new();
        for (line, v, l) in labels {
            if map.insert(v, l).is_some() {
                return Err(ParseError::new(line, format!("vertex {v} labelled twice")).into());
            }
        }
        let lines: Vec<usize> = elements.iter().map(|(l, _)| *l).collect();
        let elements: Vec<Element> = elements.into_iter().map(|(_, e)| e).collect();
        let bgraph = BoundariedGraph::new(graph, map)?;
        BoundariedStructure::new(bgraph, elements).map_err(|e| match e {
            BoundariedError::ForeignReference { position, what } => ParseError::new(
                lines[position - 2],
                format!("element references {what} outside the graph"),
            )
            .into(),
            other => other,
        })
    }

    /// Text form; vertex ids are compacted to positions `0..n`.
    pub fn to_text(&self) -> String {
        let g = self.graph();
        let pos = |v: VertexId| g.index_of(v).expect("own vertex");
        let mut out = g.to_text();
        for (&v, &l) in &self.bgraph.labels {
            out.push_str(&format!("b {} {}\n", pos(v), l));
        }
        for (i, el) in self.elements.iter().enumerate() {
            out.push_str(&format!("x {} {}", i + 2, el.kind().name()));
            match el {
                Element::Vertex(v) => out.push_str(&format!(" {}", pos(*v))),
                Element::Edge(e) => out.push_str(&format!(" {e}")),
                Element::VertexSet(s) => {
                    for v in s {
                        out.push_str(&format!(" {}", pos(*v)));
                    }
                }
                Element::EdgeSet(s) => {
                    for e in s {
                        out.push_str(&format!(" {e}"));
                    }
                }
                Element::Star => {}
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for BoundariedStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub fn compatible(a: &BoundariedStructure, b: &BoundariedStructure) -> bool {
    a.compat_key().compatible_with(&b.compat_key())
}

/// `a ⊕ b`. Point elements present on both sides resolve to the left image.
pub fn glue_structures(
    a: &BoundariedStructure,
    b: &BoundariedStructure,
) -> Result<Structure, BoundariedError> {
    let (ka, kb) = (a.compat_key(), b.compat_key());
    if ka.slots.len() != kb.slots.len() {
        return Err(BoundariedError::Incompatible(format!(
            "arity {} vs {}",
            a.arity(),
            b.arity()
        )));
    }
    if let Some(i) = (0..ka.slots.len()).find(|&i| !ka.slots[i].compatible_with(kb.slots[i])) {
        return Err(BoundariedError::Incompatible(format!(
            "position {}: {:?} vs {:?}",
            i + 2,
            ka.slots[i],
            kb.slots[i]
        )));
    }
    Ok(glue_compatible(a, b))
}

/// Gluing without the compatibility check, for callers that already know
/// the types agree.
pub(crate) fn glue_compatible(a: &BoundariedStructure, b: &BoundariedStructure) -> Structure {
    let glued = glue_graphs(&a.bgraph, &b.bgraph);
    let elements = a
        .elements
        .iter()
        .zip(&b.elements)
        .map(|(x, y)| glue_element(x, y, &glued))
        .collect();
    Structure {
        graph: glued.graph,
        elements,
    }
}

/// Combines one position of a left and a right structure through the maps of
/// `glued`. Both sides `Star` yields `Star`.
pub fn glue_element(x: &Element, y: &Element, glued: &Glued) -> Element {
    let left = |e: &Element| map_element(e, &glued.left_vertex, &glued.left_edge);
    let right = |e: &Element| map_element(e, &glued.right_vertex, &glued.right_edge);
    match (x, y) {
        (Element::VertexSet(_), Element::VertexSet(_)) | (Element::EdgeSet(_), Element::EdgeSet(_)) => {
            match (left(x), right(y)) {
                (Element::VertexSet(mut p), Element::VertexSet(q)) => {
                    p.extend(q);
                    Element::VertexSet(p)
                }
                (Element::EdgeSet(mut p), Element::EdgeSet(q)) => {
                    p.extend(q);
                    Element::EdgeSet(p)
                }
                _ => unreachable!("same set kind on both sides"),
            }
        }
        (Element::Star, _) => right(y),
        _ => left(x),
    }
}

pub fn map_element(
    e: &Element,
    vmap: &BTreeMap<VertexId, VertexId>,
    emap: &[EdgeIndex],
) -> Element {
    match e {
        Element::Vertex(v) => Element::Vertex(vmap[v]),
        Element::Edge(i) => Element::Edge(emap[*i]),
        Element::VertexSet(s) => Element::VertexSet(s.iter().map(|v| vmap[v]).collect()),
        Element::EdgeSet(s) => Element::EdgeSet(s.iter().map(|i| emap[*i]).collect()),
        Element::Star => Element::Star,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode {
    pub bytes: Vec<u8>,
    /// False when the search cap was hit; the code is then only a fast-path
    /// inequality hint and equal codes still imply isomorphism, but unequal
    /// codes do not imply non-isomorphism.
    pub exact: bool,
}

impl CanonicalCode {
    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.bytes).expect("canonical text is ascii")
    }
}

/// Leaves explored by the canonical search before giving up exactness.
const LEAF_CAP: usize = 50_000;

pub fn canonical_code(a: &BoundariedStructure) -> CanonicalCode {
    let (form, exact) = canonical_form(a);
    CanonicalCode {
        bytes: form.to_text().into_bytes(),
        exact,
    }
}

/// Isomorphic copy of `a` on vertices `0..n` in canonical order, with edges
/// sorted. The bool reports whether the search completed.
pub fn canonical_form(a: &BoundariedStructure) -> (BoundariedStructure, bool) {
    let dense = Dense::new(a);
    let init = dense.initial_colors();
    let mut search = Search {
        dense: &dense,
        best: None,
        leaves: 0,
    };
    search.run(init);
    let exact = search.leaves <= LEAF_CAP;
    let (_, order) = search.best.expect("at least one leaf");
    (dense.relabel(a, &order), exact)
}

struct Dense {
    n: usize,
    label: Vec<Label>,
    vflags: Vec<u64>,
    loops: Vec<Vec<u64>>,
    /// Per vertex: (neighbour, edge flags) for every non-loop incident edge.
    adj: Vec<Vec<(usize, u64)>>,
    edges: Vec<(usize, usize)>,
    eflags: Vec<u64>,
    twins: Vec<Vec<bool>>,
}

impl Dense {
    fn new(a: &BoundariedStructure) -> Dense {
        let g = a.graph();
        let n = g.n();
        let idx = |v: VertexId| g.index_of(v).expect("own vertex");
        let mut label = vec![0; n];
        for (&v, &l) in a.labels() {
            label[idx(v)] = l;
        }
        let mut vflags = vec![0u64; n];
        let mut eflags = vec![0u64; g.m()];
        for (i, el) in a.elements().iter().enumerate() {
            let bit = 1u64 << i;
            match el {
                Element::Vertex(v) => vflags[idx(*v)] |= bit,
                Element::Edge(e) => eflags[*e] |= bit,
                Element::VertexSet(s) => s.iter().for_each(|v| vflags[idx(*v)] |= bit),
                Element::EdgeSet(s) => s.iter().for_each(|e| eflags[*e] |= bit),
                Element::Star => {}
            }
        }
        let mut loops = vec![Vec::new(); n];
        let mut adj = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(g.m());
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            let (iu, iv) = (idx(u), idx(v));
            edges.push((iu, iv));
            if iu == iv {
                loops[iu].push(eflags[e]);
            } else {
                adj[iu].push((iv, eflags[e]));
                adj[iv].push((iu, eflags[e]));
            }
        }
        for l in &mut loops {
            l.sort_unstable();
        }
        let mut d = Dense {
            n,
            label,
            vflags,
            loops,
            adj,
            edges,
            eflags,
            twins: Vec::new(),
        };
        d.twins = d.twin_matrix();
        d
    }

    /// `twins[u][v]`: swapping u and v is an automorphism.
    fn twin_matrix(&self) -> Vec<Vec<bool>> {
        let n = self.n;
        let mut to: Vec<Vec<Vec<u64>>> = vec![vec![Vec::new(); n]; n];
        for (u, list) in self.adj.iter().enumerate() {
            for &(w, f) in list {
                to[u][w].push(f);
            }
        }
        for row in &mut to {
            for l in row.iter_mut() {
                l.sort_unstable();
            }
        }
        let mut twins = vec![vec![false; n]; n];
        for u in 0..n {
            for v in u + 1..n {
                let same = self.label[u] == 0
                    && self.label[v] == 0
                    && self.vflags[u] == self.vflags[v]
                    && self.loops[u] == self.loops[v]
                    && (0..n).all(|w| w == u || w == v || to[u][w] == to[v][w]);
                twins[u][v] = same;
                twins[v][u] = same;
            }
        }
        twins
    }

    fn initial_colors(&self) -> Vec<u32> {
        let keys: Vec<_> = (0..self.n)
            .map(|v| {
                (
                    self.label[v] == 0,
                    self.label[v],
                    self.vflags[v],
                    self.loops[v].clone(),
                    self.adj[v].len(),
                )
            })
            .collect();
        rank(&keys)
    }

    fn refine(&self, mut colors: Vec<u32>) -> Vec<u32> {
        let mut count = distinct(&colors);
        loop {
            if count == self.n {
                return colors;
            }
            let keys: Vec<(u32, Vec<(u32, u64)>)> = (0..self.n)
                .map(|v| {
                    let mut nb: Vec<(u32, u64)> =
                        self.adj[v].iter().map(|&(w, f)| (colors[w], f)).collect();
                    nb.sort_unstable();
                    (colors[v], nb)
                })
                .collect();
            let next = rank(&keys);
            let next_count = distinct(&next);
            colors = next;
            if next_count == count {
                return colors;
            }
            count = next_count;
        }
    }

    /// Comparison key of the structure laid out in the discrete order `pos`.
    fn leaf_key(&self, pos: &[u32]) -> Vec<u64> {
        let mut at = vec![0usize; self.n];
        for (v, &p) in pos.iter().enumerate() {
            at[p as usize] = v;
        }
        let mut key = Vec::with_capacity(3 * self.n + 3 * self.edges.len());
        for &v in &at {
            key.push(self.label[v] as u64);
            key.push(self.vflags[v]);
        }
        let mut es: Vec<(u64, u64, u64)> = self
            .edges
            .iter()
            .zip(&self.eflags)
            .map(|(&(u, v), &f)| {
                let (a, b) = (pos[u] as u64, pos[v] as u64);
                (a.min(b), a.max(b), f)
            })
            .collect();
        es.sort_unstable();
        for (a, b, f) in es {
            key.extend([a, b, f]);
        }
        key
    }

    fn relabel(&self, a: &BoundariedStructure, pos: &[u32]) -> BoundariedStructure {
        let g = a.graph();
        let new_id = |v: VertexId| pos[g.index_of(v).expect("own vertex")] as usize;
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        let ekey = |e: usize| {
            let (u, v) = self.edges[e];
            let (x, y) = (pos[u] as usize, pos[v] as usize);
            (x.min(y), x.max(y), self.eflags[e])
        };
        order.sort_by_key(|&e| ekey(e));
        let mut new_edge = vec![0; order.len()];
        for (i, &e) in order.iter().enumerate() {
            new_edge[e] = i;
        }
        let edges: Vec<_> = order
            .iter()
            .map(|&e| {
                let (x, y, _) = ekey(e);
                (x, y)
            })
            .collect();
        let graph = Graph::from_parts_unchecked((0..self.n).collect(), edges);
        let labels = a.labels().iter().map(|(&v, &l)| (new_id(v), l)).collect();
        let elements = a
            .elements()
            .iter()
            .enumerate()
            .map(|(i, el)| {
                let bit = 1u64 << i;
                match el {
                    // Parallel edges with equal flags are interchangeable, so
                    // resolve edge elements through the flags.
                    Element::Edge(_) => Element::Edge(
                        (0..order.len())
                            .find(|&j| self.eflags[order[j]] & bit != 0)
                            .expect("flagged edge"),
                    ),
                    Element::EdgeSet(_) => Element::EdgeSet(
                        (0..order.len())
                            .filter(|&j| self.eflags[order[j]] & bit != 0)
                            .collect(),
                    ),
                    Element::Vertex(v) => Element::Vertex(new_id(*v)),
                    Element::VertexSet(s) => Element::VertexSet(s.iter().map(|&v| new_id(v)).collect()),
                    Element::Star => Element::Star,
                }
            })
            .collect();
        BoundariedStructure {
            bgraph: BoundariedGraph { graph, labels },
            elements,
        }
    }
}

fn rank<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut out = vec![0u32; keys.len()];
    let mut r = 0u32;
    for i in 0..idx.len() {
        if i > 0 && keys[idx[i]] != keys[idx[i - 1]] {
            r = i as u32;
        }
        out[idx[i]] = r;
    }
    out
}

fn distinct(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

struct Search<'a> {
    dense: &'a Dense,
    best: Option<(Vec<u64>, Vec<u32>)>,
    leaves: usize,
}

impl Search<'_> {
    fn run(&mut self, colors: Vec<u32>) {
        if self.leaves > LEAF_CAP {
            return;
        }
        let colors = self.dense.refine(colors);
        let n = self.dense.n;
        // smallest colour value shared by several vertices
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for &c in &colors {
            *counts.entry(c).or_default() += 1;
        }
        let target = counts.iter().find(|(_, &k)| k > 1).map(|(&c, _)| c);
        let Some(cell) = target else {
            self.leaves += 1;
            let key = self.dense.leaf_key(&colors);
            if self.best.as_ref().map_or(true, |(b, _)| key < *b) {
                self.best = Some((key, colors));
            }
            return;
        };
        let members: Vec<usize> = (0..n).filter(|&v| colors[v] == cell).collect();
        let mut tried: Vec<usize> = Vec::new();
        for &v in &members {
            if tried.iter().any(|&u| self.dense.twins[u][v]) {
                continue;
            }
            tried.push(v);
            let keys: Vec<(u32, bool)> = (0..n)
                .map(|w| (colors[w], colors[w] == cell && w != v))
                .collect();
            self.run(rank(&keys));
            if self.leaves > LEAF_CAP {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bg(n: usize, edges: &[(usize, usize)], labels: &[(usize, Label)]) -> BoundariedGraph {
        BoundariedGraph::new(
            Graph::with_order(n, edges).unwrap(),
            labels.iter().copied().collect(),
        )
        .unwrap()
    }

    fn bs(g: BoundariedGraph, elements: Vec<Element>) -> BoundariedStructure {
        BoundariedStructure::new(g, elements).unwrap()
    }

    fn vs(v: &[usize]) -> Element {
        Element::VertexSet(v.iter().copied().collect())
    }

    #[test]
    fn glue_identifies_single_labels() {
        let a = bg(1, &[], &[(0, 1)]);
        let g = glue_graphs(&a, &a).graph;
        assert_eq!((g.n(), g.m()), (1, 0));
    }

    #[test]
    fn glue_keeps_parallel_boundary_edges() {
        let a = bg(2, &[(0, 1)], &[(0, 1), (1, 2)]);
        let g = glue_graphs(&a, &a).graph;
        assert_eq!(g.n(), 2);
        assert_eq!(g.edges(), &[(0, 1), (0, 1)]);
    }

    #[test]
    fn glue_paths_through_shared_vertex() {
        let a = bg(2, &[(0, 1)], &[(0, 1)]);
        let b = bg(2, &[(0, 1)], &[(1, 1)]);
        let glued = glue_graphs(&a, &b);
        assert_eq!((glued.graph.n(), glued.graph.m()), (3, 2));
        assert_eq!(glued.right_vertex[&1], glued.left_vertex[&0]);
        let mid = glued.left_vertex[&0];
        assert_eq!(glued.graph.degree(mid), 2);
    }

    #[test]
    fn glue_vertex_count_formula() {
        let a = bg(3, &[(0, 1)], &[(0, 1), (2, 3)]);
        let b = bg(4, &[(1, 2)], &[(0, 3), (1, 4), (3, 1)]);
        let g = glue_graphs(&a, &b).graph;
        assert_eq!(g.n(), 3 + 4 - 2);
        let empty = BoundariedGraph::unlabeled(Graph::empty());
        let left = BoundariedStructure::new(a.clone(), vec![]).unwrap();
        let glued = glue_graphs(&a, &empty).graph;
        let back = BoundariedStructure::new(BoundariedGraph::new(glued, a.labels().clone()).unwrap(), vec![]).unwrap();
        assert_eq!(canonical_code(&left), canonical_code(&back));
    }

    #[test]
    fn compatibility_examples() {
        let a = bs(bg(1, &[], &[(0, 5)]), vec![]);
        assert!(compatible(&a, &a));
        let two = bs(bg(1, &[], &[]), vec![vs(&[])]);
        let three = bs(bg(1, &[], &[]), vec![vs(&[]), vs(&[])]);
        assert!(!compatible(&two, &three));
        let v = bs(bg(1, &[], &[(0, 5)]), vec![Element::Vertex(0)]);
        let star = bs(bg(0, &[], &[]), vec![Element::Star]);
        assert!(compatible(&v, &star));
        assert!(compatible(&star, &v));
        assert!(!compatible(&star, &star));
    }

    #[test]
    fn compatibility_needs_boundary_points() {
        let inner = bs(bg(2, &[], &[(0, 1)]), vec![Element::Vertex(1)]);
        let labelled = bs(bg(1, &[], &[(0, 1)]), vec![Element::Vertex(0)]);
        assert!(!compatible(&inner, &labelled));
        let other_label = bs(bg(1, &[], &[(0, 2)]), vec![Element::Vertex(0)]);
        assert!(!compatible(&labelled, &other_label));
        let e1 = bs(bg(2, &[(0, 1)], &[(0, 1), (1, 2)]), vec![Element::Edge(0)]);
        let e2 = bs(bg(2, &[(0, 1)], &[(0, 2), (1, 1)]), vec![Element::Edge(0)]);
        assert!(compatible(&e1, &e2));
        let e3 = bs(bg(2, &[(0, 1)], &[(0, 1)]), vec![Element::Edge(0)]);
        assert!(!compatible(&e1, &e3));
        let set = bs(bg(0, &[], &[]), vec![vs(&[])]);
        let eset = bs(bg(0, &[], &[]), vec![Element::EdgeSet(EdgeSet::new())]);
        assert!(!compatible(&set, &eset));
    }

    #[test]
    fn glue_structure_elements() {
        let a = bs(bg(2, &[], &[(0, 1)]), vec![vs(&[1]), Element::Vertex(0), Element::Star]);
        let b = bs(bg(2, &[(0, 1)], &[(0, 1)]), vec![vs(&[1]), Element::Vertex(0), Element::Edge(0)]);
        let s = glue_structures(&a, &b).unwrap();
        assert_eq!(s.graph().n(), 3);
        assert_eq!(s.elements()[0], vs(&[1, 2]));
        assert_eq!(s.elements()[1], Element::Vertex(0));
        assert_eq!(s.elements()[2], Element::Edge(0));
        let c = bs(bg(1, &[], &[]), vec![vs(&[]), Element::Star, Element::Star]);
        assert!(matches!(glue_structures(&a, &c), Err(BoundariedError::Incompatible(_))));
    }

    #[test]
    fn append_examples() {
        let s = Structure::of_graph(Graph::path(3));
        let t = s.append(vs(&[])).unwrap();
        assert_eq!(t.arity(), 2);
        assert_eq!(t.element(2), Some(&vs(&[])));
        let u = t.append(Element::EdgeSet([1].into())).unwrap();
        assert_eq!(u.elements()[0], vs(&[]));
        assert_eq!(u.element(3), Some(&Element::EdgeSet([1].into())));
        assert!(s.append(vs(&[9])).is_err());
        assert!(s.append(Element::Vertex(0)).is_err());
    }

    #[test]
    fn canonical_code_examples() {
        let tri = bs(bg(3, &[(0, 1), (1, 2), (0, 2)], &[(0, 1)]), vec![]);
        let moved = bs(
            BoundariedGraph::new(
                Graph::new([4, 7, 9], [(9, 4), (7, 9), (4, 7)]).unwrap(),
                [(9, 1)].into(),
            )
            .unwrap(),
            vec![],
        );
        assert_eq!(canonical_code(&tri), canonical_code(&moved));
        let relabel = bs(bg(3, &[(0, 1), (1, 2), (0, 2)], &[(0, 2)]), vec![]);
        assert_ne!(canonical_code(&tri), canonical_code(&relabel));
        let p = |set: &[usize]| bs(bg(3, &[(0, 1), (1, 2)], &[]), vec![vs(set)]);
        assert_ne!(canonical_code(&p(&[0])), canonical_code(&p(&[1])));
        assert_eq!(canonical_code(&p(&[0])), canonical_code(&p(&[2])));
    }

    #[test]
    fn canonical_code_handles_symmetric_graphs() {
        let k8 = bs(BoundariedGraph::unlabeled(Graph::complete(8)), vec![]);
        assert!(canonical_code(&k8).exact);
        let cycle: Vec<_> = (0..10).map(|i| (i, (i + 1) % 10)).collect();
        let c10 = bs(bg(10, &cycle, &[]), vec![]);
        let shifted: Vec<_> = (0..10).map(|i| ((i * 3) % 10, (i * 3 + 3) % 10)).collect();
        let c10b = bs(bg(10, &shifted, &[]), vec![]);
        let code = canonical_code(&c10);
        assert!(code.exact);
        assert_eq!(code, canonical_code(&c10b));
    }

    #[test]
    fn canonical_form_tracks_parallel_edge_elements() {
        let a = bs(bg(2, &[(0, 1), (0, 1)], &[]), vec![Element::Edge(0), Element::EdgeSet([1].into())]);
        let b = bs(bg(2, &[(0, 1), (0, 1)], &[]), vec![Element::Edge(1), Element::EdgeSet([0].into())]);
        let c = bs(bg(2, &[(0, 1), (0, 1)], &[]), vec![Element::Edge(1), Element::EdgeSet([1].into())]);
        assert_eq!(canonical_code(&a), canonical_code(&b));
        assert_ne!(canonical_code(&a), canonical_code(&c));
    }

    #[test]
    fn text_round_trip() {
        let a = bs(
            bg(4, &[(0, 1), (1, 2), (2, 2), (0, 1)], &[(0, 3), (3, 1)]),
            vec![
                Element::Vertex(2),
                Element::Edge(3),
                vs(&[0, 3]),
                Element::EdgeSet([0, 2].into()),
                Element::Star,
            ],
        );
        assert_eq!(BoundariedStructure::parse(&a.to_text()).unwrap(), a);
        let s = Structure::new(Graph::path(2), vec![vs(&[1])]).unwrap();
        assert_eq!(Structure::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn text_errors() {
        let err = BoundariedStructure::parse("p 2 0\nx 3 vset 0\n").unwrap_err();
        assert!(matches!(err, BoundariedError::Parse(ParseError { line: 2, .. })));
        let err = BoundariedStructure::parse("p 2 0\nb 0 1\nb 1 1\n").unwrap_err();
        assert_eq!(err, BoundariedError::DuplicateLabel(1));
        let err = BoundariedStructure::parse("p 2 0\nx 2 vertex 5\n").unwrap_err();
        assert!(matches!(err, BoundariedError::Parse(ParseError { line: 2, .. })));
        assert!(Structure::parse("p 1 0\nx 2 star\n").is_err());
        assert!(BoundariedStructure::parse("p 1 0\nb 0 0\n").is_err());
    }
}
