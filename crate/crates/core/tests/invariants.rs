use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use proptest::prelude::*;

use unbreak_core::applications::{mwcu_to_rbcu, rbcu_check, rbcu_solve_unbreakable, MwcuInstance};
use unbreak_core::boundaried::{
    canonical_code, glue_structures, BoundariedGraph, BoundariedStructure, Element, Structure,
};
use unbreak_core::breakability::{break_alg, witness_threshold, BreakOutcome};
use unbreak_core::connenum::{enum_connected_sets, ConnectedSetQuery};
use unbreak_core::finite_state::property::{CONNECTED, EVEN_ORDER, EVEN_SET};
use unbreak_core::finite_state::{compute_classes, solve_cmso, DirectEvaluation, RepresentativeTable};
use unbreak_core::graph::{induced_subgraph, is_connected, is_separation, neighborhood, Graph, VertexSet};
use unbreak_core::universal::{binomial, build_universal_set_seeded, verify_universal_set, UniversalFamily};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let len = pairs.len();
        proptest::collection::vec(any::<bool>(), len).prop_map(move |keep| {
            let edges: Vec<_> = pairs.iter().zip(&keep).filter(|(_, k)| **k).map(|(e, _)| *e).collect();
            Graph::with_order(n, &edges).unwrap()
        })
    })
}

fn two_cliques_through_cut_vertex(size: usize) -> Graph {
    // cliques on 0..size and size+1..=2*size, both joined to the cut vertex `size`
    let mut edges = Vec::new();
    for block in [0..size + 1, size..2 * size + 1] {
        let vs: Vec<usize> = block.collect();
        for (i, &u) in vs.iter().enumerate() {
            for &v in &vs[i + 1..] {
                edges.push((u, v));
            }
        }
    }
    Graph::with_order(2 * size + 1, &edges).unwrap()
}

fn tables() -> &'static [RepresentativeTable; 3] {
    static TABLES: OnceLock<[RepresentativeTable; 3]> = OnceLock::new();
    TABLES.get_or_init(|| {
        [EVEN_ORDER, CONNECTED, EVEN_SET].map(|prop| compute_classes(prop, 1, 4, 4).unwrap())
    })
}

#[test]
fn cut_vertex_is_found() {
    let g = two_cliques_through_cut_vertex(4);
    let sep = break_alg(&g, 3, 1).unwrap().witness().cloned().expect("witness");
    assert_eq!(sep.separator(), VertexSet::from([4]));
}

#[test]
fn complete_graphs_are_unbreakable() {
    for n in 2usize..=9 {
        for c in 0..(n - 1).min(3) {
            assert!(break_alg(&Graph::complete(n), 2, c).unwrap().witness().is_none(), "K{n}, c={c}");
        }
    }
}

#[test]
fn universal_text_round_trip() {
    let (f, _) = build_universal_set_seeded(9, 4, 2, 11).unwrap();
    let back = UniversalFamily::parse(&f.to_text()).unwrap();
    assert_eq!(f, back);
    assert!(UniversalFamily::parse("u 3 2 1\n10\n").is_err());
    assert!(UniversalFamily::parse("101\n").is_err());
}

#[test]
fn structure_text_round_trip() {
    let text = "p 4 3\ne 0 1\ne 1 2\ne 2 3\nb 0 1\nb 3 2\nx 2 vset 1 2\nx 3 eset 0 2\nx 4 vertex 3\nx 5 star\n";
    let a = BoundariedStructure::parse(text).unwrap();
    assert_eq!(a.to_text(), text);
    assert!(BoundariedStructure::parse("p 2 0\nb 0 1\nb 1 1\n").is_err());
}

#[test]
fn gluing_shares_labelled_vertices() {
    let left = BoundariedStructure::parse("p 2 1\ne 0 1\nb 1 1\n").unwrap();
    let right = BoundariedStructure::parse("p 2 1\ne 0 1\nb 0 1\n").unwrap();
    let glued = glue_structures(&left, &right).unwrap();
    assert_eq!(glued.graph().n(), 3);
    assert_eq!(glued.graph().m(), 2);
    assert!(CONNECTED.evaluate(&glued));
}

#[test]
fn understanding_keeps_answers_on_small_graphs() {
    let table = &tables()[1];
    let solver = DirectEvaluation(CONNECTED);
    let path = Structure::of_graph(Graph::path(12));
    let two_paths = Structure::of_graph(Graph::with_order(12, &[(0, 1), (1, 2), (3, 4), (4, 5), (6, 7), (8, 9)]).unwrap());
    assert!(solve_cmso(&path, table, &solver, Some(table.min_s())).unwrap());
    assert!(!solve_cmso(&two_paths, table, &solver, Some(table.min_s())).unwrap());
}

#[test]
fn reduction_adds_self_loops_for_singletons() {
    let g = Graph::with_order(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
    let inst = MwcuInstance::new(g, vec![VertexSet::from([0, 3]), VertexSet::from([2])], 1).unwrap();
    let red = mwcu_to_rbcu(&inst);
    assert_eq!(red.inserted.len(), 2);
    assert_eq!(red.instance.red_vertices(), VertexSet::from([0, 2, 3]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn witnesses_are_valid(g in graph_strategy(10), s in 1usize..5, c in 0usize..3) {
        if let BreakOutcome::Witness(sep) = break_alg(&g, s, c).unwrap() {
            prop_assert!(is_separation(&g, &sep.x_side, &sep.y_side).unwrap());
            prop_assert!(sep.exceeds(witness_threshold(s, c), c));
        }
    }

    #[test]
    fn relabelling_keeps_canonical_code(g in graph_strategy(7), shift in 1usize..50, label_mask in 0u8..8) {
        let labels: BTreeMap<usize, u32> = (0..g.n().min(3))
            .filter(|i| label_mask >> i & 1 == 1)
            .map(|i| (i, i as u32 + 1))
            .collect();
        let a = BoundariedStructure::new(BoundariedGraph::new(g.clone(), labels.clone()).unwrap(), vec![]).unwrap();
        // reverse and shift the ids
        let n = g.n();
        let rename = |v: usize| n - 1 - v + shift;
        let h = Graph::new((0..n).map(rename), g.edges().iter().map(|&(u, v)| (rename(u), rename(v)))).unwrap();
        let moved: BTreeMap<usize, u32> = labels.iter().map(|(&v, &l)| (rename(v), l)).collect();
        let b = BoundariedStructure::new(BoundariedGraph::new(h, moved).unwrap(), vec![]).unwrap();
        prop_assert_eq!(canonical_code(&a), canonical_code(&b));
    }

    #[test]
    fn connected_sets_are_well_formed(g in graph_strategy(10), root_pick in 0usize..10, p in 1usize..5, q in 0usize..4) {
        let root = root_pick % g.n();
        let sets = enum_connected_sets(&g, ConnectedSetQuery::new(root, p, q)).unwrap();
        let distinct: BTreeSet<&VertexSet> = sets.iter().collect();
        prop_assert_eq!(distinct.len(), sets.len());
        prop_assert!(sets.len() as u128 <= binomial(p + q, p));
        for u in &sets {
            prop_assert!(u.contains(&root) && u.len() <= p);
            prop_assert!(is_connected(&induced_subgraph(&g, u).unwrap()));
            prop_assert!(neighborhood(&g, u, false).unwrap().len() <= q);
        }
    }

    #[test]
    fn universal_sets_cover(n in 1usize..11, k in 1usize..5, p_pick in 0usize..5, seed in any::<u64>()) {
        let k = k.min(n);
        let p = p_pick % (k + 1);
        let (f, info) = build_universal_set_seeded(n, k, p, seed).unwrap();
        prop_assert!(info.verified);
        prop_assert!(verify_universal_set(&f).is_ok());
    }

    #[test]
    fn solver_matches_direct_evaluation(g in graph_strategy(11), picks in proptest::collection::vec(any::<bool>(), 11)) {
        let [even, conn, even_set] = tables();
        for (prop, table) in [(EVEN_ORDER, even), (CONNECTED, conn)] {
            let s0 = Structure::of_graph(g.clone());
            let got = solve_cmso(&s0, table, &DirectEvaluation(prop), Some(table.min_s())).unwrap();
            prop_assert_eq!(got, prop.evaluate(&s0));
        }
        let table = even_set;
        let set: VertexSet = g.vertices().iter().copied().filter(|&v| picks[v]).collect();
        let s0 = Structure::new(g.clone(), vec![Element::VertexSet(set)]).unwrap();
        let got = solve_cmso(&s0, table, &DirectEvaluation(EVEN_SET), Some(table.min_s())).unwrap();
        prop_assert_eq!(got, EVEN_SET.evaluate(&s0));
    }

    #[test]
    fn rbcu_solutions_check_out(g in graph_strategy(8), k in 0usize..3, split in 1usize..4) {
        let n = g.n();
        prop_assume!(n >= 2);
        let terms: Vec<usize> = (0..n.min(4)).collect();
        let classes: Vec<VertexSet> = terms.chunks(split).map(|c| c.iter().copied().collect()).collect();
        let inst = MwcuInstance::new(g, classes, k).unwrap();
        let red = mwcu_to_rbcu(&inst).instance;
        if let Some(sol) = rbcu_solve_unbreakable(&red, k + 2).solution {
            prop_assert!(sol.len() <= k);
            prop_assert!(rbcu_check(&red, &sol));
            prop_assert!(inst.is_solution(&sol));
        }
    }
}
