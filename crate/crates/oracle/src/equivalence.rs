//! Canonical equivalence by double enumeration.
//!
//! Structures are enumerated from scratch, identified up to isomorphism by
//! minimising an encoding over vertex orders, and compared against every
//! context by gluing and evaluating the property. Compatibility and gluing
//! follow the definitions directly.

use std::collections::HashMap;

use unbreak_core::boundaried::{BoundariedStructure, Element, Kind, Structure};
use unbreak_core::finite_state::Property;
use unbreak_core::graph::{EdgeSet, Graph, VertexSet};

use crate::{OracleBudget, OracleError};

/// Isomorphism-invariant encoding of a boundaried structure.
pub type OracleKey = Vec<u16>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Item {
    Star,
    Vertex(usize),
    Edge(usize),
    Vertices(u64),
    Edges(u64),
}

/// A boundaried structure on positions `0..n`; `labels[v] == 0` means `v` is
/// not on the boundary.
#[derive(Clone, Debug)]
struct Small {
    n: usize,
    edges: Vec<(usize, usize)>,
    labels: Vec<u32>,
    items: Vec<Item>,
}

impl Small {
    fn from_core(a: &BoundariedStructure) -> Result<Small, OracleError> {
        let g = a.graph();
        if g.n() > 16 {
            return Err(OracleError::BudgetExceeded(format!("{} vertices exceed 16", g.n())));
        }
        let pos = |v| g.vertices().binary_search(&v).expect("vertex");
        let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(u, v)| (pos(u), pos(v))).collect();
        if edges.len() > 64 {
            return Err(OracleError::BudgetExceeded("more than 64 edges".into()));
        }
        let mut labels = vec![0u32; g.n()];
        for (&v, &l) in a.labels() {
            labels[pos(v)] = l;
        }
        let items = a
            .elements()
            .iter()
            .map(|e| match e {
                Element::Star => Item::Star,
                Element::Vertex(v) => Item::Vertex(pos(*v)),
                Element::Edge(i) => Item::Edge(*i),
                Element::VertexSet(s) => Item::Vertices(s.iter().fold(0, |m, v| m | 1 << pos(*v))),
                Element::EdgeSet(s) => Item::Edges(s.iter().fold(0, |m, i| m | 1 << i)),
            })
            .collect();
        Ok(Small { n: g.n(), edges, labels, items })
    }

    fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges
            .iter()
            .all(|&(u, v)| u != v && seen.insert((u.min(v), u.max(v))))
    }

    fn boundary_label(&self, v: usize) -> Option<u32> {
        (self.labels[v] != 0).then_some(self.labels[v])
    }

    /// Encoding under the vertex order `order` (old position of each new
    /// position). Edge items are written as endpoint pairs, which identifies
    /// them on simple graphs.
    fn encode(&self, order: &[usize]) -> OracleKey {
        let mut new_pos = vec![0usize; self.n];
        for (i, &v) in order.iter().enumerate() {
            new_pos[v] = i;
        }
        let pair = |e: usize| {
            let (u, v) = self.edges[e];
            let (a, b) = (new_pos[u] as u16, new_pos[v] as u16);
            (a.min(b), a.max(b))
        };
        let mut out = vec![self.n as u16];
        out.extend(order.iter().map(|&v| self.labels[v] as u16));
        let mut pairs: Vec<(u16, u16)> = (0..self.edges.len()).map(pair).collect();
        pairs.sort_unstable();
        out.push(pairs.len() as u16);
        for (a, b) in pairs {
            out.extend([a, b]);
        }
        for item in &self.items {
            match *item {
                Item::Star => out.push(0),
                Item::Vertex(v) => out.extend([1, new_pos[v] as u16]),
                Item::Edge(e) => {
                    let (a, b) = pair(e);
                    out.extend([2, a, b]);
                }
                Item::Vertices(m) => {
                    let mapped = (0..self.n).filter(|v| m >> v & 1 == 1).fold(0u16, |acc, v| acc | 1 << new_pos[v]);
                    out.extend([3, mapped]);
                }
                Item::Edges(m) => {
                    let mut chosen: Vec<(u16, u16)> =
                        (0..self.edges.len()).filter(|e| m >> e & 1 == 1).map(pair).collect();
                    chosen.sort_unstable();
                    out.extend([4, chosen.len() as u16]);
                    for (a, b) in chosen {
                        out.extend([a, b]);
                    }
                }
            }
        }
        out
    }

    /// Minimum encoding over all orders that list boundary vertices first,
    /// by label, followed by any arrangement of the other vertices.
    fn key(&self) -> OracleKey {
        let mut fixed: Vec<usize> = (0..self.n).filter(|&v| self.labels[v] != 0).collect();
        fixed.sort_by_key(|&v| self.labels[v]);
        let free: Vec<usize> = (0..self.n).filter(|&v| self.labels[v] == 0).collect();
        let mut best: Option<OracleKey> = None;
        let mut perm = free.clone();
        let mut order = fixed.clone();
        loop {
            order.truncate(fixed.len());
            order.extend(&perm);
            let code = self.encode(&order);
            if best.as_ref().is_none_or(|b| code < *b) {
                best = Some(code);
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        best.expect("at least one order")
    }

    /// What decides compatibility partners: labels, and per position the
    /// kind plus, for vertices and edges, their boundary labels.
    fn descriptor(&self) -> Vec<u32> {
        let mut labels: Vec<u32> = self.labels.iter().copied().filter(|&l| l != 0).collect();
        labels.sort_unstable();
        let mut out = vec![labels.len() as u32];
        out.extend(labels);
        for item in &self.items {
            match *item {
                Item::Star => out.push(0),
                Item::Vertex(v) => out.extend([1, self.labels[v]]),
                Item::Edge(e) => {
                    let (u, v) = self.edges[e];
                    match (self.boundary_label(u), self.boundary_label(v)) {
                        (Some(a), Some(b)) => out.extend([2, a.min(b), a.max(b)]),
                        _ => out.extend([2, 0, 0]),
                    }
                }
                Item::Vertices(_) => out.push(3),
                Item::Edges(_) => out.push(4),
            }
        }
        out
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn kind_of(item: &Item) -> Option<Kind> {
    match item {
        Item::Star => None,
        Item::Vertex(_) => Some(Kind::Vertex),
        Item::Edge(_) => Some(Kind::Edge),
        Item::Vertices(_) => Some(Kind::VertexSet),
        Item::Edges(_) => Some(Kind::EdgeSet),
    }
}

/// Compatibility, position by position.
fn compatible(a: &Small, b: &Small) -> bool {
    if a.items.len() != b.items.len() {
        return false;
    }
    a.items.iter().zip(&b.items).all(|(x, y)| match (kind_of(x), kind_of(y)) {
        (None, None) => false,
        (None, Some(k)) | (Some(k), None) => k == Kind::Vertex || k == Kind::Edge,
        (Some(k1), Some(k2)) if k1 != k2 => false,
        _ => match (*x, *y) {
            (Item::Vertex(u), Item::Vertex(v)) => a.boundary_label(u).is_some() && a.boundary_label(u) == b.boundary_label(v),
            (Item::Edge(e), Item::Edge(f)) => {
                let (u1, v1) = a.edges[e];
                let (u2, v2) = b.edges[f];
                match (a.boundary_label(u1), a.boundary_label(v1), b.boundary_label(u2), b.boundary_label(v2)) {
                    (Some(p), Some(q), Some(r), Some(s)) => (p.min(q), p.max(q)) == (r.min(s), r.max(s)),
                    _ => false,
                }
            }
            _ => true,
        },
    })
}

/// `a ⊕ b` as a plain structure; where both sides name a vertex or edge the
/// left one is kept.
fn glue(a: &Small, b: &Small) -> Structure {
    let mut next = a.n;
    let map: Vec<usize> = (0..b.n)
        .map(|v| {
            let shared = b
                .boundary_label(v)
                .and_then(|l| (0..a.n).find(|&u| a.labels[u] == l));
            shared.unwrap_or_else(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    let offset = a.edges.len();
    let mut edges = a.edges.clone();
    edges.extend(b.edges.iter().map(|&(u, v)| (map[u], map[v])));
    let vertex_set = |m: u64, f: &dyn Fn(usize) -> usize, n: usize| -> VertexSet {
        (0..n).filter(|v| m >> v & 1 == 1).map(f).collect()
    };
    let elements = a
        .items
        .iter()
        .zip(&b.items)
        .map(|(x, y)| match (*x, *y) {
            (Item::Vertices(p), Item::Vertices(q)) => {
                let mut s = vertex_set(p, &|v| v, a.n);
                s.extend(vertex_set(q, &|v| map[v], b.n));
                Element::VertexSet(s)
            }
            (Item::Edges(p), Item::Edges(q)) => {
                let mut s: EdgeSet = (0..a.edges.len()).filter(|e| p >> e & 1 == 1).collect();
                s.extend((0..b.edges.len()).filter(|e| q >> e & 1 == 1).map(|e| e + offset));
                Element::EdgeSet(s)
            }
            (Item::Star, Item::Vertex(v)) => Element::Vertex(map[v]),
            (Item::Star, Item::Edge(e)) => Element::Edge(e + offset),
            (Item::Vertex(v), _) => Element::Vertex(v),
            (Item::Edge(e), _) => Element::Edge(e),
            other => unreachable!("incompatible pair {other:?}"),
        })
        .collect();
    Structure::new(Graph::with_order(next, &edges).expect("glued vertices"), elements).expect("valid gluing")
}

/// Every structure with the given signature, simple graph on at most `bound`
/// vertices and labels from `1..=2c`, one per isomorphism class, sorted by
/// key.
fn enumerate(signature: &[Kind], c: usize, bound: usize) -> Vec<(OracleKey, Small)> {
    let mut found: HashMap<OracleKey, Small> = HashMap::new();
    for n in 0..=bound {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        for mask in 0u64..1 << pairs.len() {
            let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
            for label_mask in 0u32..1 << (2 * c) {
                let chosen: Vec<u32> = (0..2 * c as u32).filter(|i| label_mask >> i & 1 == 1).map(|i| i + 1).collect();
                if chosen.len() > n {
                    continue;
                }
                let mut labels = vec![0u32; n];
                labels[..chosen.len()].copy_from_slice(&chosen);
                let mut items: Vec<Vec<Item>> = vec![Vec::new()];
                for kind in &signature[1..] {
                    let options: Vec<Item> = match kind {
                        Kind::Vertex => std::iter::once(Item::Star).chain((0..n).map(Item::Vertex)).collect(),
                        Kind::Edge => std::iter::once(Item::Star).chain((0..edges.len()).map(Item::Edge)).collect(),
                        Kind::VertexSet => (0u64..1 << n).map(Item::Vertices).collect(),
                        Kind::EdgeSet => (0u64..1 << edges.len()).map(Item::Edges).collect(),
                        Kind::Graph | Kind::Star => unreachable!("checked signature"),
                    };
                    items = items
                        .into_iter()
                        .flat_map(|prefix| {
                            options.iter().map(move |o| {
                                let mut next = prefix.clone();
                                next.push(*o);
                                next
                            })
                        })
                        .collect();
                }
                for items in items {
                    let s = Small {
                        n,
                        edges: edges.clone(),
                        labels: labels.clone(),
                        items,
                    };
                    found.entry(s.key()).or_insert(s);
                }
            }
        }
    }
    let mut out: Vec<_> = found.into_iter().collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn raw_count(signature: &[Kind], c: usize, bound: usize) -> u128 {
    (0..=bound)
        .map(|n| {
            let pairs = n * n.saturating_sub(1) / 2;
            let labelings = 1u128 << (2 * c);
            let per: u128 = signature[1..]
                .iter()
                .map(|k| match k {
                    Kind::Vertex => n as u128 + 1,
                    Kind::Edge => pairs as u128 + 1,
                    Kind::VertexSet => 1u128 << n,
                    _ => 1u128 << pairs,
                })
                .product();
            (1u128 << pairs) * labelings * per
        })
        .sum()
}

/// The partition of the bounded universe into canonical equivalence classes,
/// with every member's evaluation row over the contexts.
#[derive(Clone, Debug)]
pub struct OraclePartition {
    members: Vec<OracleKey>,
    index: HashMap<OracleKey, usize>,
    class_of: Vec<usize>,
    rows: Vec<Vec<u64>>,
    class_count: usize,
    context_count: usize,
}

impl OraclePartition {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn context_count(&self) -> usize {
        self.context_count
    }

    pub fn members(&self) -> &[OracleKey] {
        &self.members
    }

    pub fn class_of(&self) -> &[usize] {
        &self.class_of
    }

    /// Position of a structure among the members, if it is one.
    pub fn locate(&self, a: &BoundariedStructure) -> Result<Option<usize>, OracleError> {
        Ok(self.index.get(&key_of(a)?).copied())
    }

    /// Evaluation row of member `i`: bit `j` is set iff context `j` is
    /// compatible and the property holds on the gluing.
    pub fn row(&self, i: usize) -> &[u64] {
        &self.rows[i]
    }
}

/// Isomorphism-invariant key of a structure over a simple graph.
pub fn key_of(a: &BoundariedStructure) -> Result<OracleKey, OracleError> {
    let s = Small::from_core(a)?;
    if !s.is_simple() {
        return Err(OracleError::InvalidInput("keys are defined for simple graphs only".into()));
    }
    Ok(s.key())
}

/// Whether `a` and `b` are compatible, straight from the definition.
pub fn oracle_compatible(a: &BoundariedStructure, b: &BoundariedStructure) -> Result<bool, OracleError> {
    Ok(compatible(&Small::from_core(a)?, &Small::from_core(b)?))
}

/// Partitions all structures up to `universe_bound` vertices by compatibility
/// type and by their answers against all contexts up to `context_bound`.
pub fn oracle_equivalence(
    prop: Property,
    c: usize,
    universe_bound: usize,
    context_bound: usize,
    budget: &OracleBudget,
) -> Result<OraclePartition, OracleError> {
    let sig = prop.signature();
    if sig.first() != Some(&Kind::Graph) || sig[1..].iter().any(|k| matches!(k, Kind::Graph | Kind::Star)) {
        return Err(OracleError::InvalidInput("signature must start with the graph kind".into()));
    }
    let top = universe_bound.max(context_bound);
    if top > 6 || c > 2 {
        return Err(OracleError::BudgetExceeded(format!("bounds c={c}, vertices={top} are too large")));
    }
    let raw = raw_count(sig, c, universe_bound) + raw_count(sig, c, context_bound);
    let clock = budget.check("equivalence", top, raw)?;
    let universe = enumerate(sig, c, universe_bound);
    let contexts = if context_bound == universe_bound {
        universe.clone()
    } else {
        enumerate(sig, c, context_bound)
    };
    budget.check("equivalence", top, (universe.len() * contexts.len()) as u128)?;

    let mut rows = Vec::with_capacity(universe.len());
    for (_, a) in &universe {
        clock.tick()?;
        let mut row = vec![0u64; contexts.len().div_ceil(64)];
        for (j, (_, ctx)) in contexts.iter().enumerate() {
            if compatible(a, ctx) && prop.evaluate(&glue(a, ctx)) {
                row[j / 64] |= 1 << (j % 64);
            }
        }
        rows.push(row);
    }
    let mut classes: HashMap<(Vec<u32>, &Vec<u64>), usize> = HashMap::new();
    let mut class_of = Vec::with_capacity(universe.len());
    for (i, (_, a)) in universe.iter().enumerate() {
        let next = classes.len();
        class_of.push(*classes.entry((a.descriptor(), &rows[i])).or_insert(next));
    }
    let class_count = classes.len();
    let members: Vec<OracleKey> = universe.into_iter().map(|(k, _)| k).collect();
    let index = members.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    Ok(OraclePartition {
        members,
        index,
        class_of,
        rows,
        class_count,
        context_count: contexts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;
    use unbreak_core::boundaried::BoundariedGraph;
    use unbreak_core::finite_state::property::{ALWAYS_TRUE, CONNECTED, EVEN_ORDER};

    fn b() -> OracleBudget {
        OracleBudget::default()
    }

    #[test]
    fn universe_counts() {
        // simple graphs up to 4 vertices: 1 + 1 + 2 + 4 + 11
        assert_eq!(enumerate(&[Kind::Graph], 0, 4).len(), 19);
        assert_eq!(enumerate(&[Kind::Graph], 1, 1).len(), 4);
        assert_eq!(enumerate(&[Kind::Graph, Kind::Vertex], 0, 1).len(), 3);
    }

    #[test]
    fn constant_true_classes_are_types() {
        let part = oracle_equivalence(ALWAYS_TRUE, 1, 3, 3, &b()).unwrap();
        let universe = enumerate(&[Kind::Graph], 1, 3);
        let types: std::collections::BTreeSet<_> = universe.iter().map(|(_, s)| s.descriptor()).collect();
        assert_eq!(part.class_count(), types.len());
    }

    #[test]
    fn parity_doubles_types() {
        let part = oracle_equivalence(EVEN_ORDER, 1, 4, 4, &b()).unwrap();
        assert_eq!(part.class_count(), 2 * 4);
    }

    #[test]
    fn boundary_connectivity_patterns() {
        // no labels: empty, connected, disconnected; one label: the labelled
        // vertex reaches everything or not; labels {1, 2}: one component,
        // two components split by label, or some unlabelled component
        let part = oracle_equivalence(CONNECTED, 1, 4, 4, &b()).unwrap();
        assert_eq!(part.class_count(), 3 + 2 + 2 + 3);
    }

    #[test]
    fn keys_identify_isomorphic_structures() {
        let g1 = Graph::with_order(3, &[(0, 1)]).unwrap();
        let g2 = Graph::with_order(3, &[(1, 2)]).unwrap();
        let a = BoundariedStructure::new(BoundariedGraph::new(g1, BTreeMap::from([(2, 1)])).unwrap(), vec![]).unwrap();
        let c = BoundariedStructure::new(BoundariedGraph::new(g2.clone(), BTreeMap::from([(0, 1)])).unwrap(), vec![]).unwrap();
        let d = BoundariedStructure::new(BoundariedGraph::new(g2, BTreeMap::from([(1, 1)])).unwrap(), vec![]).unwrap();
        assert_eq!(key_of(&a).unwrap(), key_of(&c).unwrap());
        assert_ne!(key_of(&a).unwrap(), key_of(&d).unwrap());
    }

    #[test]
    fn star_against_star_is_incompatible() {
        let g = Graph::path(1);
        let star = BoundariedStructure::new(BoundariedGraph::unlabeled(g.clone()), vec![Element::Star]).unwrap();
        let internal = BoundariedStructure::new(BoundariedGraph::unlabeled(g), vec![Element::Vertex(0)]).unwrap();
        assert!(!oracle_compatible(&star, &star).unwrap());
        assert!(oracle_compatible(&star, &internal).unwrap());
        assert!(!oracle_compatible(&internal, &internal).unwrap());
    }
}
