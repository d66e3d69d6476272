//! Executable properties of structures with declared signatures.

use std::fmt;

use crate::boundaried::{Element, Kind, Structure};
use crate::graph::{connected_components, is_connected, Graph};

pub type Predicate = fn(&Structure) -> bool;

#[derive(Clone, Copy)]
pub struct Property {
    name: &'static str,
    signature: &'static [Kind],
    eval: Predicate,
}

impl fmt::Debug for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Property")
            .field("name", &self.name)
            .field("signature", &self.signature)
            .finish()
    }
}

impl PartialEq for Property {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.signature == other.signature
    }
}

impl Property {
    /// `signature` must start with [`Kind::Graph`].
    pub const fn new(name: &'static str, signature: &'static [Kind], eval: Predicate) -> Self {
        Property {
            name,
            signature,
            eval,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn signature(&self) -> &'static [Kind] {
        self.signature
    }

    pub fn arity(&self) -> usize {
        self.signature.len()
    }

    /// False on structures whose signature differs from the declared one.
    pub fn evaluate(&self, s: &Structure) -> bool {
        s.arity() == self.signature.len()
            && s.elements()
                .iter()
                .zip(&self.signature[1..])
                .all(|(e, k)| e.kind() == *k)
            && (self.eval)(s)
    }
}

const GRAPH: &[Kind] = &[Kind::Graph];

pub const EVEN_ORDER: Property = Property::new("even-order", GRAPH, |s| s.graph().n() % 2 == 0);

/// At most one component, so the empty graph counts as connected.
pub const CONNECTED: Property = Property::new("connected", GRAPH, |s| is_connected(s.graph()));

pub const EVEN_SET: Property = Property::new("even-set", &[Kind::Graph, Kind::VertexSet], |s| {
    matches!(&s.elements()[0], Element::VertexSet(x) if x.len() % 2 == 0)
});

/// The edge set `F` connects every vertex: `(V, F)` has at most one component.
pub const SPANNING_EDGE_SET: Property =
    Property::new("spanning-edge-set", &[Kind::Graph, Kind::EdgeSet], |s| {
        let Element::EdgeSet(f) = &s.elements()[0] else {
            return false;
        };
        let kept: Vec<_> = f.iter().map(|&e| s.graph().edges()[e]).collect();
        let g = Graph::new(s.graph().vertices().iter().copied(), kept).expect("edges of the graph");
        is_connected(&g)
    });

pub const TERMINALS_CONNECTED: Property = Property::new(
    "terminals-connected",
    &[Kind::Graph, Kind::Vertex, Kind::Vertex],
    |s| match (&s.elements()[0], &s.elements()[1]) {
        (Element::Vertex(x), Element::Vertex(y)) => connected_components(s.graph())
            .iter()
            .any(|block| block.contains(x) && block.contains(y)),
        _ => false,
    },
);

pub const ALWAYS_TRUE: Property = Property::new("true", GRAPH, |_| true);

/// Properties exercised by the end-to-end checks.
pub const SHIPPED: [Property; 4] = [EVEN_ORDER, CONNECTED, EVEN_SET, SPANNING_EDGE_SET];

pub const ALL: [Property; 6] = [
    EVEN_ORDER,
    CONNECTED,
    EVEN_SET,
    SPANNING_EDGE_SET,
    TERMINALS_CONNECTED,
    ALWAYS_TRUE,
];

pub fn by_name(name: &str) -> Option<Property> {
    ALL.iter().copied().find(|p| p.name == name)
}
