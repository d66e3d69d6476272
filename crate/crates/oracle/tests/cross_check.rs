use proptest::prelude::*;

use unbreak_core::applications::{mwcu_to_rbcu, rbcu_check, MwcuInstance};
use unbreak_core::breakability::break_alg;
use unbreak_core::connenum::{enum_connected_sets, ConnectedSetQuery};
use unbreak_core::graph::{Graph, VertexSet};
use unbreak_core::treewidth::treewidth;
use unbreak_oracle::pendant::elimination_width;
use unbreak_oracle::{
    oracle_connected_sets, oracle_mwcu, oracle_rbcu, oracle_witnessing_separation,
    oracle_witnessing_separation_by_assignment, OracleBudget, OracleError,
};

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

fn budget() -> OracleBudget {
    OracleBudget::default()
}

#[test]
fn small_cut_examples() {
    // path a-x-b with a and b in different classes
    let path = Graph::with_order(3, &[(0, 1), (1, 2)]).unwrap();
    let inst = MwcuInstance::new(path, vec![VertexSet::from([0]), VertexSet::from([2])], 1).unwrap();
    assert_eq!(oracle_mwcu(&inst, &budget()).unwrap(), Some(VertexSet::from([1])));

    // adjacent terminals cannot be separated by deleting other vertices
    let triangle = Graph::complete(3);
    let inst = MwcuInstance::new(triangle, vec![VertexSet::from([0]), VertexSet::from([1])], 1).unwrap();
    assert_eq!(oracle_mwcu(&inst, &budget()).unwrap(), None);
}

#[test]
fn budget_is_enforced() {
    let tight = OracleBudget {
        max_vertices: 4,
        ..OracleBudget::default()
    };
    let err = oracle_witnessing_separation(&Graph::path(6), 1, 1, &tight).unwrap_err();
    assert!(matches!(err, OracleError::BudgetExceeded(_)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn separation_oracles_agree(g in graph_strategy(8), s in 1usize..4, c in 0usize..3) {
        let a = oracle_witnessing_separation(&g, s, c, &budget()).unwrap();
        let b = oracle_witnessing_separation_by_assignment(&g, s, c, &budget()).unwrap();
        prop_assert_eq!(a.is_some(), b.is_some());
    }

    #[test]
    fn unbreakable_certificates_hold(g in graph_strategy(9), s in 1usize..5, c in 0usize..3) {
        if break_alg(&g, s, c).unwrap().witness().is_none() {
            prop_assert!(oracle_witnessing_separation(&g, s, c, &budget()).unwrap().is_none());
        }
    }

    #[test]
    fn treewidth_matches_elimination_game(g in graph_strategy(9)) {
        prop_assert_eq!(treewidth(&g).unwrap(), elimination_width(&g));
    }

    #[test]
    fn connected_sets_match(g in graph_strategy(11), root in 0usize..11, p in 1usize..6, q in 0usize..4) {
        let query = ConnectedSetQuery::new(root % g.n(), p, q);
        let mut fast = enum_connected_sets(&g, query).unwrap();
        fast.sort();
        prop_assert_eq!(fast, oracle_connected_sets(&g, query, &budget()).unwrap());
    }

    #[test]
    fn reduction_preserves_answers(g in graph_strategy(8), k in 0usize..3, split in 1usize..4) {
        prop_assume!(g.n() >= 2);
        let terms: Vec<usize> = (0..g.n().min(4)).collect();
        let classes: Vec<VertexSet> = terms.chunks(split).map(|c| c.iter().copied().collect()).collect();
        let inst = MwcuInstance::new(g, classes, k).unwrap();
        let red = mwcu_to_rbcu(&inst).instance;
        let a = oracle_mwcu(&inst, &budget()).unwrap();
        let b = oracle_rbcu(&red, &budget()).unwrap();
        prop_assert_eq!(a.is_some(), b.is_some());
        if let Some(sol) = a {
            prop_assert!(rbcu_check(&red, &sol));
        }
    }
}
