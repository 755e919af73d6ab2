use matchq::randgraph::{grow_and_match, grow_and_match_observed, matching_is_valid, tutte_condition_estimate};
use matchq::simulate::simulate_observed;
use matchq::{counterexample, ArrivalRates, Family, Graph, Policy, PriorityTable, QueueState, SimConfig};

// Feeding the growth process the arrival rates of a matching model with the
// same seed reproduces the model's queue vector after every arrival.
#[test]
fn unmatched_counts_follow_the_queue() {
    let cases =
        [counterexample(Family::PendantPriority, 0.2).unwrap(), counterexample(Family::FiveCycleUniform, 0.1).unwrap()];
    for inst in cases.iter() {
        let policies = [inst.policy.clone(), Policy::MatchLongest];
        for policy in &policies {
            let p = inst.graph.node_count();
            let mut queue = Vec::new();
            let cfg = SimConfig::new(1, 1e12, QueueState::zero(p), 77).max_events(20_000);
            simulate_observed(&inst.graph, &inst.rates, policy, &cfg, |_, q| queue.push(q.to_vec())).unwrap();
            let mut grown = Vec::new();
            grow_and_match_observed(&inst.graph, &inst.rates, policy, 20_000, 77, 1_000, |s| {
                grown.push(s.unmatched.clone())
            })
            .unwrap();
            assert_eq!(queue, grown);
        }
    }
}

#[test]
fn checkpoints_carry_the_size_identity() {
    let g = Graph::five_cycle();
    let mu = ArrivalRates::new(vec![1.0, 2.0, 1.0, 2.0, 1.5]).unwrap();
    let lex = Policy::Priority(PriorityTable::lexicographic(&g));
    let run = grow_and_match(&g, &mu, &lex, 50_000, 4, 5_000).unwrap();
    assert_eq!(run.trajectory.len(), 10);
    for c in &run.trajectory {
        assert_eq!(c.matched + c.unmatched.iter().sum::<u64>(), c.n);
        assert_eq!(c.matched % 2, 0);
    }
    assert!(matching_is_valid(&run.state));
    let mut buf = Vec::new();
    run.write_trajectory_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("n,matched_count,unmatched_1,unmatched_2,unmatched_3,unmatched_4,unmatched_5\n5000,"));
}

#[test]
fn bipartite_template_with_unequal_sides_leaves_the_excess() {
    // types 1 and 3 can only match type 2: a third of the nodes stay single
    let g = Graph::path(3);
    let mu = ArrivalRates::new(vec![1.0, 1.0, 1.0]).unwrap();
    let run = grow_and_match(&g, &mu, &Policy::Uniform, 300_000, 2, 300_000).unwrap();
    let frac = 1.0 - run.trajectory[0].matched_fraction();
    assert!((frac - 1.0 / 3.0).abs() < 0.01, "{frac}");
    let margins = tutte_condition_estimate(&g, &mu, 20).unwrap();
    let worst = margins.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max);
    assert!((worst - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn non_separable_template_leaves_a_linear_fraction_unmatched() {
    let inst = counterexample(Family::PendantPriority, 0.2).unwrap();
    let run = grow_and_match(&inst.graph, &inst.rates, &inst.policy, 200_000, 9, 200_000).unwrap();
    let frac = 1.0 - run.trajectory[0].matched_fraction();
    // the growing type accumulates at the fluid drift
    assert!((frac - inst.predicted_drift / inst.rates.total()).abs() < 0.01, "{frac}");
}
