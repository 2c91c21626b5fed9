use std::collections::BTreeSet;

use proptest::prelude::*;

use privacy_frontier::diffpriv::{differential_graph, max_level, DimensionSpec};
use privacy_frontier::feasible::{integer_weight_matrix, is_extreme, is_member, Budget, Posterior, Prior};
use privacy_frontier::graph::{Graph, StateSpace};
use privacy_frontier::oracle::{cross_check_with_cap, exhaustive_semichain_scan, vertex_enumeration_with_cap};
use privacy_frontier::rational::{format_rational, parse_rational, ratio};
use privacy_frontier::semichain::{
    enumerate_all_semichains, enumerate_extreme_posteriors, enumerate_two_semichains_with,
    enumerate_upward_unfoldings, is_strongly_connected, posterior_from_chain, validate_semichain, TwoChainStrategy,
};
use privacy_frontier::signals::{decompose_into_extremes, random_convex_combination};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A connected graph: a random tree plus a random subset of the remaining pairs.
fn connected_graph(max_states: usize) -> impl Strategy<Value = Graph> {
    (3..=max_states).prop_flat_map(|n| {
        let parents: Vec<BoxedStrategy<usize>> = (1..n).map(|i| (0..i).boxed()).collect();
        let extra = proptest::collection::vec(any::<bool>(), n * (n - 1) / 2);
        (Just(n), parents, extra).prop_map(|(n, parents, extra)| {
            let mut edges: BTreeSet<(usize, usize)> =
                parents.iter().enumerate().map(|(i, &p)| (p, i + 1)).collect();
            let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
            for ((i, j), keep) in pairs.zip(extra) {
                if keep {
                    edges.insert((i, j));
                }
            }
            let edges: Vec<_> = edges.into_iter().collect();
            Graph::build(StateSpace::numbered(n).unwrap(), &edges).unwrap()
        })
    })
}

fn prior_for(n: usize) -> impl Strategy<Value = Prior> {
    proptest::collection::vec(1u64..=12, n).prop_map(|w| Prior::from_weights(&w).unwrap())
}

fn budget() -> impl Strategy<Value = Budget> {
    prop_oneof![Just(ratio(3, 2)), Just(ratio(2, 1)), Just(ratio(5, 4)), Just(ratio(3, 1))]
        .prop_map(|t| Budget::new(t).unwrap())
}

fn instance(max_states: usize) -> impl Strategy<Value = (Graph, Prior, Budget)> {
    connected_graph(max_states).prop_flat_map(|g| {
        let n = g.num_states();
        (Just(g), prior_for(n), budget())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fold_and_reverse_identities(g in connected_graph(6)) {
        for c in enumerate_all_semichains(&g).unwrap() {
            prop_assert_eq!(&c.reverse().reverse(), &c);
            prop_assert!(validate_semichain(&c.reverse(), &g).unwrap());
            if c.num_levels() >= 3 {
                prop_assert_eq!(c.upward_fold().unwrap(), c.reverse().downward_fold().unwrap().reverse());
            }
            for u in enumerate_upward_unfoldings(&c, &g).unwrap() {
                prop_assert_eq!(u.num_levels(), c.num_levels() + 1);
                prop_assert_eq!(&u.downward_fold().unwrap(), &c);
            }
        }
    }

    #[test]
    fn two_chain_strategies_agree(g in connected_graph(7)) {
        let trees = enumerate_two_semichains_with(&g, TwoChainStrategy::SpanningTrees);
        let scan = enumerate_two_semichains_with(&g, TwoChainStrategy::BipartitionScan);
        let auto = enumerate_two_semichains_with(&g, TwoChainStrategy::Auto);
        prop_assert_eq!(&trees, &scan);
        prop_assert_eq!(&trees, &auto);
    }

    #[test]
    fn enumeration_matches_exhaustive_scan(g in connected_graph(7)) {
        let mut fast = enumerate_all_semichains(&g).unwrap();
        let mut slow = exhaustive_semichain_scan(&g, 7).unwrap();
        fast.sort();
        slow.sort();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn every_chain_is_valid_and_strongly_connected(g in connected_graph(6)) {
        for c in enumerate_all_semichains(&g).unwrap() {
            prop_assert!(c.num_levels() >= 2);
            prop_assert!(validate_semichain(&c, &g).unwrap());
            prop_assert!(is_strongly_connected(&c, &g).unwrap());
        }
    }

    #[test]
    fn posteriors_match_the_vertex_oracle((g, prior, b) in instance(6)) {
        let report = cross_check_with_cap(&g, &prior, &b, 6).unwrap();
        prop_assert!(report.is_match(), "{:?}", report);
        prop_assert!(report.chain_collisions.is_empty());
    }

    #[test]
    fn extreme_posteriors_are_members_with_unit_edge_weights((g, prior, b) in instance(6)) {
        let e = enumerate_extreme_posteriors(&g, &prior, &b).unwrap();
        for rec in e.records() {
            prop_assert_eq!(&rec.posterior, &posterior_from_chain(&rec.chain, &prior, &b));
            prop_assert!(is_member(&rec.posterior, &prior, &g, &b));
            prop_assert!(is_extreme(&rec.posterior, &prior, &g, &b).unwrap());
            let w = integer_weight_matrix(&rec.posterior, &prior, &b).unwrap().expect("integer weights");
            for &(i, j) in g.edges() {
                prop_assert!((-1..=1).contains(&w.get(i, j)));
            }
            prop_assert!(w.is_antisymmetric());
            prop_assert!(w.is_path_additive());
        }
    }

    #[test]
    fn feasible_set_grows_with_the_budget((g, prior, b) in instance(6)) {
        let bigger = Budget::new(b.t() * ratio(3, 2)).unwrap();
        for v in vertex_enumeration_with_cap(&g, &prior, &b, 6).unwrap() {
            prop_assert!(is_member(&v, &prior, &g, &bigger));
        }
    }

    #[test]
    fn decompositions_reproduce_the_posterior(((g, prior, b), seed) in (instance(6), any::<u64>())) {
        let vertices = enumerate_extreme_posteriors(&g, &prior, &b).unwrap().posteriors();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mu = random_convex_combination(&vertices, vertices.len().min(5), &mut rng);
        let s = decompose_into_extremes(&mu, &g, &prior, &b).unwrap();
        prop_assert_eq!(s.barycenter(), mu.probs().to_vec());
        prop_assert!(s.len() <= g.num_states());
        for v in s.support() {
            prop_assert!(vertices.contains(v));
        }
    }

    #[test]
    fn rationals_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = ratio(p, q);
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }

    #[test]
    fn tuples_round_trip(sizes in proptest::collection::vec(2usize..5, 1..4)) {
        let dims = DimensionSpec::new(sizes).unwrap();
        for s in 0..dims.num_states() {
            prop_assert_eq!(dims.index_of(&dims.tuple_of(s)), s);
        }
        if dims.num_states() <= 12 {
            let g = differential_graph(&dims);
            let deepest = enumerate_all_semichains(&g).unwrap().iter().map(|c| c.num_levels()).max();
            prop_assert_eq!(deepest, Some(max_level(&dims)));
        }
    }
}

#[test]
fn uniform_on_a_square_has_six_vertices() {
    let g = differential_graph(&DimensionSpec::new(vec![2, 2]).unwrap());
    let prior = Prior::uniform(4).unwrap();
    let b = Budget::new(ratio(2, 1)).unwrap();
    let vs: Vec<Posterior> = enumerate_extreme_posteriors(&g, &prior, &b).unwrap().posteriors();
    assert_eq!(vs.len(), 6);
}
