use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use matchq::graph::canonical_form;
use matchq::io::{GraphFile, PolicyFile, RatesFile};
use matchq::rng::stream;
use matchq::{apply_transition, match_decision, ArrivalRates, Graph, NodeSet, Policy, PriorityTable, QueueState};

fn graph_strategy(max_nodes: usize) -> impl Strategy<Value = Graph> {
    (2..=max_nodes).prop_flat_map(|p| {
        let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect();
        proptest::sample::subsequence(pairs.clone(), 0..=pairs.len()).prop_map(move |e| Graph::new(p, &e).unwrap())
    })
}

// A graph with a random priority table and an admissible state.
fn model_strategy() -> impl Strategy<Value = (Graph, PriorityTable, QueueState, u64)> {
    (graph_strategy(8), any::<u64>(), proptest::collection::vec(0u64..6, 8)).prop_map(|(g, seed, levels)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = (0..g.node_count())
            .map(|i| {
                let mut o = g.neighbors(i).to_vec();
                o.shuffle(&mut rng);
                o
            })
            .collect();
        let table = PriorityTable::new(&g, order).unwrap();
        let mut q = vec![0; g.node_count()];
        for i in 0..g.node_count() {
            if g.neighbors(i).iter().all(|j| q[j] == 0) {
                q[i] = levels[i];
            }
        }
        (g, table, QueueState(q), seed)
    })
}

proptest! {
    #[test]
    fn nodeset_ops_match_btreeset(a in proptest::collection::btree_set(0usize..64, 0..20),
                                  b in proptest::collection::btree_set(0usize..64, 0..20)) {
        let sa: NodeSet = a.iter().copied().collect();
        let sb: NodeSet = b.iter().copied().collect();
        let set = |s: NodeSet| s.iter().collect::<BTreeSet<_>>();
        prop_assert_eq!(set(sa | sb), a.union(&b).copied().collect::<BTreeSet<_>>());
        prop_assert_eq!(set(sa & sb), a.intersection(&b).copied().collect::<BTreeSet<_>>());
        prop_assert_eq!(set(sa - sb), a.difference(&b).copied().collect::<BTreeSet<_>>());
        prop_assert_eq!(sa.len(), a.len());
        prop_assert_eq!(sa.first(), a.first().copied());
        prop_assert_eq!(sa.to_vec(), a.iter().copied().collect::<Vec<_>>());
    }

    #[test]
    fn decisions_are_admissible_and_non_idling((g, table, q, seed) in model_strategy()) {
        let mut rng = stream(seed, 0);
        for policy in [Policy::Priority(table), Policy::MatchLongest, Policy::Uniform] {
            for i in 0..g.node_count() {
                let d = match_decision(&policy, &g, &q, i, &mut rng).unwrap();
                let waiting: Vec<usize> = g.neighbors(i).iter().filter(|&j| q.0[j] > 0).collect();
                match d {
                    None => prop_assert!(waiting.is_empty()),
                    Some(j) => {
                        prop_assert!(waiting.contains(&j));
                        if let Policy::Priority(t) = &policy {
                            prop_assert_eq!(Some(&j), t.order(i).iter().find(|&&k| q.0[k] > 0));
                        }
                    }
                }
                let next = apply_transition(&q, i, d);
                prop_assert!(g.edges().iter().all(|&(a, b)| next.0[a] == 0 || next.0[b] == 0));
            }
        }
    }

    #[test]
    fn file_formats_round_trip((g, table, _, _) in model_strategy(),
                               rates in proptest::collection::vec(1e-6f64..10.0, 8)) {
        let text = serde_json::to_string(&GraphFile::from_graph(&g)).unwrap();
        prop_assert_eq!(&matchq::io::parse_graph(&text).unwrap(), &g);

        let lam = rates[..g.node_count()].to_vec();
        let text = serde_json::to_string(&RatesFile { rates: lam.clone() }).unwrap();
        prop_assert_eq!(matchq::io::parse_rates(&text, &g).unwrap(), ArrivalRates::new(lam).unwrap());

        for policy in [Policy::Priority(table), Policy::MatchLongest, Policy::Uniform] {
            let text = serde_json::to_string(&PolicyFile::from_policy(&policy)).unwrap();
            prop_assert_eq!(matchq::io::parse_policy(&text, &g).unwrap(), policy);
        }
    }

    #[test]
    fn canonical_form_is_relabel_invariant(g in graph_strategy(8), seed in any::<u64>()) {
        let p = g.node_count();
        let mut perm: Vec<usize> = (0..p).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(i, j)| (perm[i], perm[j])).collect();
        let h = Graph::new(p, &edges).unwrap();
        prop_assert_eq!(canonical_form(&g), canonical_form(&h));
        prop_assert_eq!(g.is_bipartite(), h.is_bipartite());
        prop_assert_eq!(g.is_separable(), h.is_separable());
    }
}
