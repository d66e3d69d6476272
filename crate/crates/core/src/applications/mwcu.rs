//! Vertex multiway cut-uncut and the red-blue cut-uncut form it reduces to.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::ApplicationError;
use crate::connenum::{enum_connected_sets, ConnectedSetQuery};
use crate::graph::{
    connected_components, neighborhood, EdgeIndex, EdgeSet, Graph, GraphError, GraphTextBuilder, VertexId, VertexSet,
};
use crate::text::{records, ParseError};

/// Terminals with an equivalence relation given by its classes, and a
/// deletion budget `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MwcuInstance {
    graph: Graph,
    classes: Vec<VertexSet>,
    k: usize,
}

impl MwcuInstance {
    /// `classes` must be nonempty, pairwise disjoint sets of vertices; their
    /// union is the terminal set.
    pub fn new(graph: Graph, classes: Vec<VertexSet>, k: usize) -> Result<Self, ApplicationError> {
        let mut seen = VertexSet::new();
        for class in &classes {
            if class.is_empty() {
                return Err(ApplicationError::InvalidRelation("empty class".into()));
            }
            graph.check_subset(class)?;
            for &v in class {
                if !seen.insert(v) {
                    return Err(ApplicationError::InvalidRelation(format!("terminal {v} in two classes")));
                }
            }
        }
        Ok(MwcuInstance { graph, classes, k })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn classes(&self) -> &[VertexSet] {
        &self.classes
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terminals(&self) -> VertexSet {
        self.classes.iter().flatten().copied().collect()
    }

    /// `t <v>` declares a terminal, `r <v1> <v2> ...` a class; terminals
    /// not named on any `r` line form singleton classes.
    pub fn parse(text: &str, k: usize) -> Result<Self, ApplicationError> {
        let mut builder = GraphTextBuilder::default();
        let mut terminals: Vec<(VertexId, usize)> = Vec::new();
        let mut classes: Vec<(Vec<VertexId>, usize)> = Vec::new();
        for rec in records(text) {
            if builder.accept(&rec)? {
                continue;
            }
            match rec.tag {
                "t" => {
                    rec.expect_fields(1)?;
                    terminals.push((rec.parse_field(0)?, rec.line));
                }
                "r" => {
                    if rec.fields.is_empty() {
                        return Err(ParseError::new(rec.line, "`r` needs at least one vertex").into());
                    }
                    classes.push((rec.parse_all(0)?, rec.line));
                }
                other => return Err(ParseError::new(rec.line, format!("unknown record `{other}`")).into()),
            }
        }
        let graph = builder.finish()?;
        let mut declared: BTreeMap<VertexId, bool> = BTreeMap::new();
        for (v, line) in terminals {
            if !graph.contains(v) {
                return Err(ParseError::new(line, format!("terminal {v} is not a vertex")).into());
            }
            if declared.insert(v, false).is_some() {
                return Err(ParseError::new(line, format!("terminal {v} declared twice")).into());
            }
        }
        let mut out = Vec::new();
        for (members, line) in classes {
            let mut class = VertexSet::new();
            for v in members {
                match declared.get_mut(&v) {
                    Some(used @ false) => *used = true,
                    Some(true) => return Err(ParseError::new(line, format!("terminal {v} in two classes")).into()),
                    None => return Err(ParseError::new(line, format!("{v} is not a declared terminal")).into()),
                }
                class.insert(v);
            }
            out.push(class);
        }
        out.extend(declared.iter().filter(|(_, used)| !**used).map(|(&v, _)| VertexSet::from([v])));
        MwcuInstance::new(graph, out, k)
    }

    /// Checks `s` directly against the cut-uncut condition.
    pub fn is_solution(&self, s: &VertexSet) -> bool {
        let terminals = self.terminals();
        if s.len() > self.k || !s.is_disjoint(&terminals) || !self.graph.vertex_set().is_superset(s) {
            return false;
        }
        let comp = component_index(&self.graph.remove_vertices(s));
        let class_of: BTreeMap<VertexId, usize> = self
            .classes
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.iter().map(move |&v| (v, i)))
            .collect();
        terminals.iter().all(|u| {
            terminals
                .iter()
                .all(|v| (comp[u] == comp[v]) == (class_of[u] == class_of[v]))
        })
    }
}

/// A graph with red edges `R` (by index) inducing a cluster graph, and a
/// budget `k`. Red self-loops mark single-vertex cliques.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RbcuInstance {
    graph: Graph,
    red: EdgeSet,
    k: usize,
}

impl RbcuInstance {
    pub fn new(graph: Graph, red: EdgeSet, k: usize) -> Result<Self, ApplicationError> {
        if let Some(&e) = red.iter().find(|&&e| e >= graph.m()) {
            return Err(GraphError::UnknownEdge(e).into());
        }
        let inst = RbcuInstance { graph, red, k };
        let pairs: std::collections::BTreeSet<(VertexId, VertexId)> =
            inst.red.iter().map(|&e| inst.graph.edges()[e]).collect();
        for clique in inst.cliques() {
            for &u in &clique {
                for &v in clique.range(u + 1..) {
                    if !pairs.contains(&(u, v)) {
                        return Err(ApplicationError::NotCluster(format!("{u} and {v} share a red component but no red edge")));
                    }
                }
            }
        }
        Ok(inst)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn red(&self) -> &EdgeSet {
        &self.red
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Endpoints of red edges.
    pub fn red_vertices(&self) -> VertexSet {
        self.red
            .iter()
            .flat_map(|&e| {
                let (u, v) = self.graph.edges()[e];
                [u, v]
            })
            .collect()
    }

    /// Vertex sets of the red cliques, ordered by smallest vertex.
    pub fn cliques(&self) -> Vec<VertexSet> {
        let red_vertices = self.red_vertices();
        let edges: Vec<_> = self.red.iter().map(|&e| self.graph.edges()[e]).collect();
        let red_graph = Graph::new(red_vertices.iter().copied(), edges).expect("red endpoints");
        connected_components(&red_graph)
    }

    /// The graph without its red edges.
    pub fn blue_graph(&self) -> Graph {
        self.graph.remove_edges(&self.red)
    }
}

/// The red-blue instance with the back-map to the inserted red edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub instance: RbcuInstance,
    /// Indices of the inserted edges, in insertion order.
    pub inserted: Vec<EdgeIndex>,
}

/// Adds a red edge for every related pair of terminals and a red self-loop for
/// every singleton class. Vertex ids and original edge indices are kept.
pub fn mwcu_to_rbcu(inst: &MwcuInstance) -> Reduction {
    let mut edges = inst.graph.edges().to_vec();
    let mut inserted = Vec::new();
    for class in &inst.classes {
        let members: Vec<VertexId> = class.iter().copied().collect();
        if members.len() == 1 {
            inserted.push(edges.len());
            edges.push((members[0], members[0]));
        }
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                inserted.push(edges.len());
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::new(inst.graph.vertices().iter().copied(), edges).expect("same vertices");
    let instance = RbcuInstance::new(graph, inserted.iter().copied().collect(), inst.k).expect("classes give cliques");
    Reduction { instance, inserted }
}

fn component_index(g: &Graph) -> BTreeMap<VertexId, usize> {
    connected_components(g)
        .into_iter()
        .enumerate()
        .flat_map(|(i, block)| block.into_iter().map(move |v| (v, i)))
        .collect()
}

/// True iff `s` avoids the red vertices, has at most `k` vertices, and two red
/// vertices share a component of the graph minus `s` and minus the red edges
/// exactly when a red edge joins them.
pub fn rbcu_check(inst: &RbcuInstance, s: &VertexSet) -> bool {
    let red_vertices = inst.red_vertices();
    if s.len() > inst.k || !s.is_disjoint(&red_vertices) || !inst.graph.vertex_set().is_superset(s) {
        return false;
    }
    let comp = component_index(&inst.blue_graph().remove_vertices(s));
    let clique_of: BTreeMap<VertexId, usize> = inst
        .cliques()
        .into_iter()
        .enumerate()
        .flat_map(|(i, c)| c.into_iter().map(move |v| (v, i)))
        .collect();
    red_vertices.iter().all(|u| {
        red_vertices
            .iter()
            .all(|v| (comp[u] == comp[v]) == (clique_of[u] == clique_of[v]))
    })
}

/// Result of the branching solver together with its search statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RbcuRun {
    pub solution: Option<VertexSet>,
    /// Deepest recursive call reached; the root call has depth 0.
    pub max_depth: usize,
    pub calls: usize,
}

struct Search<'a> {
    inst: &'a RbcuInstance,
    blue: Graph,
    cliques: Vec<VertexSet>,
    families: Vec<Vec<(VertexSet, VertexSet)>>,
    max_depth: usize,
    calls: usize,
}

impl Search<'_> {
    fn branch(&mut self, i: usize, s: &VertexSet, depth: usize) -> Option<VertexSet> {
        self.calls += 1;
        self.max_depth = self.max_depth.max(depth);
        if s.len() > self.inst.k {
            return None;
        }
        let comp = component_index(&self.blue.remove_vertices(s));
        let mut owner = Vec::with_capacity(self.cliques.len());
        for clique in &self.cliques {
            let first = comp[clique.first().expect("nonempty clique")];
            if clique.iter().any(|v| comp[v] != first) {
                return None;
            }
            owner.push(first);
        }
        let shared = |j: usize| owner.iter().enumerate().any(|(t, &o)| t != j && o == owner[j]);
        let Some(j) = (0..self.cliques.len()).find(|&j| j != i && shared(j)) else {
            // no clique other than i shares a component, so neither does i
            return Some(s.clone());
        };
        for idx in 0..self.families[j].len() {
            let (u, nbrs) = &self.families[j][idx];
            if !u.is_disjoint(s) {
                continue;
            }
            let next: VertexSet = s.union(nbrs).copied().collect();
            debug_assert!(next.len() > s.len());
            if let Some(found) = self.branch(i, &next, depth + 1) {
                return Some(found);
            }
        }
        None
    }
}

/// Branching solver for red-blue cut-uncut, complete when the graph is
/// `(s, k)`-unbreakable. Any returned set passes [`rbcu_check`].
pub fn rbcu_solve_unbreakable(inst: &RbcuInstance, s: usize) -> RbcuRun {
    let cliques = inst.cliques();
    if cliques.is_empty() {
        let empty = VertexSet::new();
        return RbcuRun {
            solution: rbcu_check(inst, &empty).then_some(empty),
            max_depth: 0,
            calls: 1,
        };
    }
    let blue = inst.blue_graph();
    let red_vertices = inst.red_vertices();
    let families: Vec<Vec<(VertexSet, VertexSet)>> = cliques
        .par_iter()
        .map(|clique| {
            let root = *clique.first().expect("nonempty clique");
            if s == 0 {
                return Vec::new();
            }
            enum_connected_sets(&blue, ConnectedSetQuery::new(root, s, inst.k))
                .expect("root is a vertex")
                .into_iter()
                .filter(|u| u.is_superset(clique) && u.intersection(&red_vertices).all(|v| clique.contains(v)))
                .filter_map(|u| {
                    let nbrs = neighborhood(&blue, &u, false).expect("subset");
                    nbrs.is_disjoint(&red_vertices).then_some((u, nbrs))
                })
                .collect()
        })
        .collect();
    let mut search = Search {
        inst,
        blue,
        cliques,
        families,
        max_depth: 0,
        calls: 0,
    };
    let mut solution = None;
    for i in 0..search.cliques.len() {
        if let Some(found) = search.branch(i, &VertexSet::new(), 0) {
            assert!(rbcu_check(inst, &found), "branching accepted a non-solution");
            solution = Some(found);
            break;
        }
    }
    RbcuRun {
        solution,
        max_depth: search.max_depth,
        calls: search.calls,
    }
}

/// All but at most one red clique lies in a component of size at most `s`
/// once `solution` is removed.
pub fn rbcu_separation_bound_check(inst: &RbcuInstance, s: usize, solution: &VertexSet) -> bool {
    let blocks = connected_components(&inst.blue_graph().remove_vertices(solution));
    let large = inst
        .cliques()
        .iter()
        .filter_map(|clique| blocks.iter().find(|b| b.is_superset(clique)))
        .filter(|b| b.len() > s)
        .count();
    large <= 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> VertexSet {
        v.iter().copied().collect()
    }

    #[test]
    fn reduction_examples() {
        let g = Graph::path(4);
        let none = mwcu_to_rbcu(&MwcuInstance::new(g.clone(), vec![], 1).unwrap());
        assert!(none.inserted.is_empty());
        assert_eq!(none.instance.graph(), &g);

        let pair = mwcu_to_rbcu(&MwcuInstance::new(g.clone(), vec![set(&[0, 3])], 1).unwrap());
        assert_eq!(pair.inserted, vec![3]);
        assert_eq!(pair.instance.graph().edges()[3], (0, 3));

        let tri = mwcu_to_rbcu(&MwcuInstance::new(g.clone(), vec![set(&[0, 2, 3])], 1).unwrap());
        assert_eq!(tri.inserted.len(), 3);
        assert_eq!(tri.instance.cliques(), vec![set(&[0, 2, 3])]);

        let single = mwcu_to_rbcu(&MwcuInstance::new(g, vec![set(&[1])], 1).unwrap());
        assert_eq!(single.instance.red_vertices(), set(&[1]));
    }

    #[test]
    fn invalid_relations() {
        let g = Graph::path(3);
        assert!(MwcuInstance::new(g.clone(), vec![set(&[0]), set(&[0, 1])], 1).is_err());
        assert!(MwcuInstance::new(g.clone(), vec![set(&[])], 1).is_err());
        assert!(MwcuInstance::new(g, vec![set(&[5])], 1).is_err());
    }

    #[test]
    fn cluster_requirement() {
        let g = Graph::with_order(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(
            RbcuInstance::new(g.clone(), [0, 1].into(), 1),
            Err(ApplicationError::NotCluster(_))
        ));
        assert!(RbcuInstance::new(g, [0].into(), 1).is_ok());
    }

    #[test]
    fn check_examples() {
        let empty = RbcuInstance::new(Graph::path(3), EdgeSet::new(), 0).unwrap();
        assert!(rbcu_check(&empty, &VertexSet::new()));

        let path = mwcu_to_rbcu(&MwcuInstance::new(Graph::path(3), vec![set(&[0]), set(&[2])], 1).unwrap()).instance;
        assert!(rbcu_check(&path, &set(&[1])));
        assert!(!rbcu_check(&path, &set(&[0])));
        assert!(!rbcu_check(&path, &VertexSet::new()));
    }

    #[test]
    fn solver_examples() {
        let empty = RbcuInstance::new(Graph::path(3), EdgeSet::new(), 0).unwrap();
        assert_eq!(rbcu_solve_unbreakable(&empty, 2).solution, Some(VertexSet::new()));

        let path = mwcu_to_rbcu(&MwcuInstance::new(Graph::path(3), vec![set(&[0]), set(&[2])], 1).unwrap()).instance;
        assert_eq!(rbcu_solve_unbreakable(&path, 2).solution, Some(set(&[1])));

        // a and b adjacent through the triangle a-b-x: no deletion separates them
        let tri = Graph::with_order(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let inst = mwcu_to_rbcu(&MwcuInstance::new(tri, vec![set(&[0]), set(&[1])], 1).unwrap()).instance;
        let run = rbcu_solve_unbreakable(&inst, 2);
        assert_eq!(run.solution, None);
        assert!(run.max_depth <= 2);
    }

    #[test]
    fn mwcu_solution_check_matches_reduction() {
        let g = Graph::with_order(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)]).unwrap();
        let inst = MwcuInstance::new(g, vec![set(&[0, 4]), set(&[2])], 2).unwrap();
        let red = mwcu_to_rbcu(&inst).instance;
        for s in [set(&[]), set(&[1]), set(&[3]), set(&[1, 3])] {
            assert_eq!(inst.is_solution(&s), rbcu_check(&red, &s), "{s:?}");
        }
    }

    #[test]
    fn parse_format() {
        let text = "p 4 3\ne 0 1\ne 1 2\ne 2 3\nt 0\nt 3\nt 2\nr 0 3\n";
        let inst = MwcuInstance::parse(text, 1).unwrap();
        assert_eq!(inst.classes(), &[set(&[0, 3]), set(&[2])]);
        let bad = MwcuInstance::parse("p 2 0\nr 1\n", 1).unwrap_err();
        assert!(matches!(bad, ApplicationError::Parse(ParseError { line: 2, .. })));
    }

    #[test]
    fn bound_check_on_breakable_graph() {
        // two long paths hanging off a cut vertex: both cliques end up in big components
        let g = Graph::with_order(9, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8)]).unwrap();
        let inst = mwcu_to_rbcu(&MwcuInstance::new(g, vec![set(&[0]), set(&[8])], 1).unwrap()).instance;
        assert!(rbcu_check(&inst, &set(&[4])));
        assert!(!rbcu_separation_bound_check(&inst, 2, &set(&[4])));
    }
}
