//! Replacing boundaried structures by equivalent table representatives.
//!
//! [`understand`] splits off one side of a small separation, replaces it by its
//! representative, glues the result back and recurses until the structure is
//! unbreakable, where [`understand_unbreakable`] identifies the class by its
//! answers against every compatible representative.

use std::collections::{BTreeMap, BTreeSet};

use super::property::Property;
use super::table::RepresentativeTable;
use super::FiniteStateError;
use crate::boundaried::{
    glue_element, glue_graphs, glue_structures, BoundariedGraph, BoundariedStructure, Element, Kind, Label,
    Structure,
};
use crate::breakability::{witness_threshold, BreakOutcome, Breaker};
use crate::graph::{EdgeIndex, Graph, Separation, VertexId, VertexSet};

/// Decides a property on structures; only required to be correct on
/// unbreakable inputs.
pub trait UnbreakableSolver {
    fn solve(&self, s: &Structure) -> bool;
}

/// Evaluates the property directly, which is correct on every input.
#[derive(Clone, Copy, Debug)]
pub struct DirectEvaluation(pub Property);

impl UnbreakableSolver for DirectEvaluation {
    fn solve(&self, s: &Structure) -> bool {
        self.0.evaluate(s)
    }
}

fn check_input(a: &BoundariedStructure, table: &RepresentativeTable) -> Result<(), FiniteStateError> {
    let sig = table.property().signature();
    let ok = a.arity() == sig.len()
        && a.elements()
            .iter()
            .zip(&sig[1..])
            .all(|(e, k)| e.kind() == *k || (e.kind() == Kind::Star && k.is_point()));
    if !ok {
        return Err(FiniteStateError::SignatureMismatch(table.property().name().into()));
    }
    let max = table.max_label();
    if let Some(&found) = a.labels().values().find(|&&l| l > max) {
        return Err(FiniteStateError::LabelOutOfRange { found, max });
    }
    Ok(())
}

/// Test-set identification of the class of `a` among the table's
/// representatives.
pub fn understand_unbreakable(
    a: &BoundariedStructure,
    table: &RepresentativeTable,
    solver: &impl UnbreakableSolver,
) -> Result<BoundariedStructure, FiniteStateError> {
    check_input(a, table)?;
    let key = a.compat_key();
    let tests: Vec<&BoundariedStructure> = table.compatible_reps(&key).map(|e| &e.rep).collect();
    let answers = tests
        .iter()
        .map(|g| Ok(solver.solve(&glue_structures(a, g)?)))
        .collect::<Result<Vec<bool>, FiniteStateError>>()?;
    for cand in table.same_compat(&key) {
        let mut agrees = true;
        for (g, &want) in tests.iter().zip(&answers) {
            if solver.solve(&glue_structures(&cand.rep, g)?) != want {
                agrees = false;
                break;
            }
        }
        if agrees {
            return Ok(cand.rep.clone());
        }
    }
    Err(FiniteStateError::NoMatchingRepresentative(format!(
        "{} candidates, {} tests",
        table.same_compat(&key).count(),
        tests.len()
    )))
}

/// Labels carried by the separator vertices in the split-off part: original
/// labels where present, otherwise the smallest free labels in `1..=2c`,
/// assigned in ascending vertex order.
fn separator_labels(
    a: &BoundariedStructure,
    sep: &Separation,
    c: usize,
) -> Result<BTreeMap<VertexId, Label>, FiniteStateError> {
    let max = 2 * c as u32;
    let mut labels: BTreeMap<VertexId, Label> = BTreeMap::new();
    for v in &sep.x_side {
        if let Some(l) = a.bgraph().label_of(*v) {
            labels.insert(*v, l);
        }
    }
    let used: BTreeSet<Label> = labels.values().copied().collect();
    let mut free = (1..=max).filter(|l| !used.contains(l));
    for v in sep.separator() {
        if !labels.contains_key(&v) {
            let l = free.next().ok_or(FiniteStateError::LabelOverflow(max))?;
            labels.insert(v, l);
        }
    }
    Ok(labels)
}

/// Induced subgraph on `keep` minus edges with both endpoints in `drop_inside`,
/// with the map from old edge indices to new ones.
fn restrict(g: &Graph, keep: &VertexSet, drop_inside: &VertexSet) -> (Graph, Vec<Option<EdgeIndex>>) {
    let mut map = vec![None; g.m()];
    let mut edges = Vec::new();
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        let inside = keep.contains(&u) && keep.contains(&v);
        let dropped = drop_inside.contains(&u) && drop_inside.contains(&v);
        if inside && !dropped {
            map[i] = Some(edges.len());
            edges.push((u, v));
        }
    }
    let graph = Graph::new(keep.iter().copied(), edges).expect("subset of own vertices");
    (graph, map)
}

fn restrict_element(e: &Element, keep: &VertexSet, emap: &[Option<EdgeIndex>]) -> Element {
    match e {
        Element::Vertex(v) if keep.contains(v) => Element::Vertex(*v),
        Element::Edge(i) => emap[*i].map_or(Element::Star, Element::Edge),
        Element::VertexSet(s) => Element::VertexSet(s.intersection(keep).copied().collect()),
        Element::EdgeSet(s) => Element::EdgeSet(s.iter().filter_map(|&i| emap[i]).collect()),
        _ => Element::Star,
    }
}

/// The part of `a` on the `X` side of `sep`, bounded by its old boundary
/// vertices in `X` plus the separator.
pub fn split_beta(
    a: &BoundariedStructure,
    sep: &Separation,
    c: usize,
) -> Result<BoundariedStructure, FiniteStateError> {
    let boundary = a.bgraph().boundary();
    if boundary.intersection(&sep.x_side).count() > boundary.intersection(&sep.y_side).count() {
        return Err(FiniteStateError::UnbalancedSides);
    }
    let labels = separator_labels(a, sep, c)?;
    let (graph, emap) = restrict(a.graph(), &sep.x_side, &VertexSet::new());
    let elements = a
        .elements()
        .iter()
        .map(|e| restrict_element(e, &sep.x_side, &emap))
        .collect();
    Ok(BoundariedStructure::new(BoundariedGraph::new(graph, labels)?, elements)?)
}

/// Glues the representative of the split-off part back onto the `Y` side.
///
/// Edges inside the separator already belong to the split-off part, so the
/// `Y` side drops them. Element positions combine the representative's and
/// the `Y` side's contributions under the gluing rules.
pub fn rejoin_gamma(
    a: &BoundariedStructure,
    beta_rep: &BoundariedStructure,
    sep: &Separation,
    c: usize,
) -> Result<BoundariedStructure, FiniteStateError> {
    let split_labels = separator_labels(a, sep, c)?;
    let separator = sep.separator();
    let fresh: BTreeSet<Label> = separator
        .iter()
        .filter(|v| a.bgraph().label_of(**v).is_none())
        .map(|v| split_labels[v])
        .collect();
    let (graph, emap) = restrict(a.graph(), &sep.y_side, &separator);
    let glue_labels = separator.iter().map(|v| (*v, split_labels[v])).collect();
    let y_side = BoundariedGraph::new(graph, glue_labels)?;
    let y_elements: Vec<Element> = a
        .elements()
        .iter()
        .map(|e| restrict_element(e, &sep.y_side, &emap))
        .collect();
    if beta_rep.arity() != a.arity() {
        return Err(FiniteStateError::SignatureMismatch("representative arity".into()));
    }
    let glued = glue_graphs(beta_rep.bgraph(), &y_side);
    let elements: Vec<Element> = beta_rep
        .elements()
        .iter()
        .zip(&y_elements)
        .map(|(x, y)| glue_element(x, y, &glued))
        .collect();

    let mut labels: BTreeMap<VertexId, Label> = BTreeMap::new();
    let mut assign = |v: VertexId, l: Label| -> Result<(), FiniteStateError> {
        match labels.insert(v, l) {
            Some(old) if old != l => Err(FiniteStateError::LabelCollision(format!(
                "vertex {v} labelled {old} and {l}"
            ))),
            _ => Ok(()),
        }
    };
    for (&v, &l) in a.labels() {
        if sep.y_side.contains(&v) {
            assign(glued.right_vertex[&v], l)?;
        }
    }
    for (&u, &l) in beta_rep.labels() {
        if !fresh.contains(&l) {
            assign(glued.left_vertex[&u], l)?;
        }
    }
    let bgraph = BoundariedGraph::new(glued.graph, labels).map_err(|e| FiniteStateError::LabelCollision(e.to_string()))?;
    Ok(BoundariedStructure::new(bgraph, elements)?)
}

/// One split performed by [`Understander`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursionStep {
    pub n: usize,
    pub beta_vertices: usize,
    pub beta_rep_vertices: usize,
    pub gamma_vertices: usize,
    pub separator_order: usize,
    /// `⌊(s - r) / 2^c⌋`, the side threshold of the separation used.
    pub threshold: usize,
}

/// Recursive understanding with a fixed table, solver and `s`, logging every
/// split it performs.
pub struct Understander<'a, S: UnbreakableSolver> {
    table: &'a RepresentativeTable,
    solver: &'a S,
    s: usize,
    breaker: &'a Breaker,
    pub steps: Vec<RecursionStep>,
    pub unbreakable_calls: usize,
}

impl<'a, S: UnbreakableSolver> Understander<'a, S> {
    /// `s` defaults to the table's `2r·2^c + r`; an explicit value may be
    /// smaller but not below [`RepresentativeTable::min_s`].
    pub fn new(
        table: &'a RepresentativeTable,
        solver: &'a S,
        s: Option<usize>,
        breaker: &'a Breaker,
    ) -> Result<Self, FiniteStateError> {
        let s = s.unwrap_or_else(|| table.default_s());
        if s < table.min_s() {
            return Err(FiniteStateError::SideTooSmall { s, min: table.min_s() });
        }
        Ok(Understander {
            table,
            solver,
            s,
            breaker,
            steps: Vec::new(),
            unbreakable_calls: 0,
        })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn understand(&mut self, a: &BoundariedStructure) -> Result<BoundariedStructure, FiniteStateError> {
        check_input(a, self.table)?;
        let n = a.graph().n();
        let c = self.table.c();
        let sr = self.s - self.table.r();
        if n < 2 * sr {
            self.unbreakable_calls += 1;
            return understand_unbreakable(a, self.table, self.solver);
        }
        let sep = match self.breaker.break_alg(a.graph(), sr, c)? {
            BreakOutcome::Unbreakable { .. } => {
                self.unbreakable_calls += 1;
                return understand_unbreakable(a, self.table, self.solver);
            }
            BreakOutcome::Witness(sep) => sep,
        };
        let boundary = a.bgraph().boundary();
        let sep = if boundary.intersection(&sep.x_side).count() > boundary.intersection(&sep.y_side).count() {
            sep.swapped()
        } else {
            sep
        };
        let beta = split_beta(a, &sep, c)?;
        if beta.graph().n() >= n {
            return Err(FiniteStateError::NoProgress(format!("split part has {} of {n} vertices", beta.graph().n())));
        }
        let beta_rep = self.understand(&beta)?;
        let gamma = rejoin_gamma(a, &beta_rep, &sep, c)?;
        if gamma.graph().n() >= n {
            return Err(FiniteStateError::NoProgress(format!(
                "rejoined part has {} of {n} vertices",
                gamma.graph().n()
            )));
        }
        self.steps.push(RecursionStep {
            n,
            beta_vertices: beta.graph().n(),
            beta_rep_vertices: beta_rep.graph().n(),
            gamma_vertices: gamma.graph().n(),
            separator_order: sep.order(),
            threshold: witness_threshold(sr, c),
        });
        self.understand(&gamma)
    }

    /// Decides the table's property on `s0` through understanding.
    pub fn solve(&mut self, s0: &Structure) -> Result<bool, FiniteStateError> {
        let prop = self.table.property();
        if s0.signature() != prop.signature() {
            return Err(FiniteStateError::SignatureMismatch(prop.name().into()));
        }
        let a = BoundariedStructure::from_structure(s0.clone());
        let rep = self.understand(&a)?;
        let empty = BoundariedStructure::new(
            BoundariedGraph::unlabeled(Graph::empty()),
            prop.signature()[1..].iter().map(|k| Element::neutral(*k)).collect(),
        )?;
        let closed = glue_structures(&rep, &empty)?;
        Ok(self.solver.solve(&closed))
    }
}

/// Representative equivalent to `a`, with `s` as in [`Understander::new`].
pub fn understand(
    a: &BoundariedStructure,
    table: &RepresentativeTable,
    solver: &impl UnbreakableSolver,
    s: Option<usize>,
) -> Result<BoundariedStructure, FiniteStateError> {
    Understander::new(table, solver, s, Breaker::shared())?.understand(a)
}

pub fn solve_cmso(
    s0: &Structure,
    table: &RepresentativeTable,
    solver: &impl UnbreakableSolver,
    s: Option<usize>,
) -> Result<bool, FiniteStateError> {
    Understander::new(table, solver, s, Breaker::shared())?.solve(s0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundaried::canonical_code;
    use crate::finite_state::property::{EVEN_ORDER, EVEN_SET};
    use crate::finite_state::table::compute_classes;
    use std::sync::OnceLock;

    fn parity_table() -> &'static RepresentativeTable {
        static T: OnceLock<RepresentativeTable> = OnceLock::new();
        T.get_or_init(|| compute_classes(EVEN_ORDER, 1, 4, 4).unwrap())
    }

    fn bs(g: Graph, labels: &[(usize, Label)], elements: Vec<Element>) -> BoundariedStructure {
        BoundariedStructure::new(BoundariedGraph::new(g, labels.iter().copied().collect()).unwrap(), elements).unwrap()
    }

    fn set(v: &[usize]) -> VertexSet {
        v.iter().copied().collect()
    }

    #[test]
    fn representative_maps_to_itself() {
        let t = parity_table();
        let solver = DirectEvaluation(EVEN_ORDER);
        for e in t.classes() {
            let got = understand_unbreakable(&e.rep, t, &solver).unwrap();
            assert_eq!(canonical_code(&got), canonical_code(&e.rep));
        }
    }

    #[test]
    fn pendant_vertex_flips_parity_class() {
        let t = parity_table();
        let solver = DirectEvaluation(EVEN_ORDER);
        let rep = bs(Graph::path(1), &[(0, 1)], vec![]);
        let grown = bs(Graph::path(2), &[(0, 1)], vec![]);
        let a = understand_unbreakable(&rep, t, &solver).unwrap();
        let b = understand_unbreakable(&grown, t, &solver).unwrap();
        assert_eq!(a.graph().n() % 2, 1);
        assert_eq!(b.graph().n() % 2, 0);
    }

    #[test]
    fn incompatible_input_is_rejected() {
        let t = parity_table();
        let a = bs(Graph::path(1), &[(0, 9)], vec![]);
        assert!(understand_unbreakable(&a, t, &DirectEvaluation(EVEN_ORDER)).is_err());
        let wrong = bs(Graph::path(1), &[], vec![Element::VertexSet(set(&[]))]);
        assert!(matches!(
            understand_unbreakable(&wrong, t, &DirectEvaluation(EVEN_ORDER)),
            Err(FiniteStateError::SignatureMismatch(_))
        ));
    }

    #[test]
    fn split_examples() {
        let a = bs(Graph::path(5), &[], vec![Element::Vertex(4), Element::VertexSet(set(&[1, 4]))]);
        let sep = Separation::new(set(&[0, 1, 2]), set(&[2, 3, 4]));
        let beta = split_beta(&a, &sep, 1).unwrap();
        assert_eq!(beta.labels(), &[(2, 1)].into());
        assert_eq!(beta.elements()[0], Element::Star);
        assert_eq!(beta.elements()[1], Element::VertexSet(set(&[1])));
        assert_eq!(beta.graph().m(), 2);
    }

    #[test]
    fn split_requires_balanced_orientation() {
        let a = bs(Graph::path(3), &[(0, 1)], vec![]);
        let sep = Separation::new(set(&[0, 1]), set(&[1, 2]));
        assert_eq!(split_beta(&a, &sep, 1), Err(FiniteStateError::UnbalancedSides));
    }

    #[test]
    fn identity_rejoin_restores_graph() {
        let g = Graph::with_order(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 3), (2, 2)]).unwrap();
        let a = bs(g, &[(5, 2)], vec![Element::VertexSet(set(&[0, 2, 5])), Element::EdgeSet([1, 5].into())]);
        let sep = Separation::new(set(&[0, 1, 2, 3]), set(&[3, 4, 5]));
        let beta = split_beta(&a, &sep, 1).unwrap();
        let gamma = rejoin_gamma(&a, &beta, &sep, 1).unwrap();
        assert_eq!(canonical_code(&gamma), canonical_code(&a));
    }

    #[test]
    fn rejoin_keeps_y_side_sets() {
        let a = bs(Graph::path(5), &[], vec![Element::VertexSet(set(&[3, 4]))]);
        let sep = Separation::new(set(&[0, 1, 2]), set(&[2, 3, 4]));
        let beta = split_beta(&a, &sep, 1).unwrap();
        let gamma = rejoin_gamma(&a, &beta, &sep, 1).unwrap();
        let Element::VertexSet(s) = &gamma.elements()[0] else { panic!() };
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn parity_of_long_path() {
        let t = parity_table();
        let solver = DirectEvaluation(EVEN_ORDER);
        for n in [0usize, 7, 12, 13] {
            let s0 = Structure::of_graph(Graph::path(n));
            let mut u = Understander::new(t, &solver, Some(t.min_s()), Breaker::shared()).unwrap();
            assert_eq!(u.solve(&s0).unwrap(), n % 2 == 0, "n = {n}");
            if n >= 12 {
                assert!(!u.steps.is_empty(), "long paths recurse");
            }
        }
    }

    #[test]
    fn even_set_end_to_end() {
        let t = compute_classes(EVEN_SET, 1, 3, 3).unwrap();
        let solver = DirectEvaluation(EVEN_SET);
        let g = Graph::path(11);
        for chosen in [vec![0usize, 5], vec![1, 2, 9], vec![]] {
            let s0 = Structure::new(g.clone(), vec![Element::VertexSet(set(&chosen))]).unwrap();
            let got = solve_cmso(&s0, &t, &solver, Some(t.min_s())).unwrap();
            assert_eq!(got, chosen.len() % 2 == 0);
        }
    }

    #[test]
    fn small_s_is_rejected() {
        let t = parity_table();
        assert!(matches!(
            Understander::new(t, &DirectEvaluation(EVEN_ORDER), Some(1), Breaker::shared()),
            Err(FiniteStateError::SideTooSmall { .. })
        ));
    }
}
