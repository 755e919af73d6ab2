use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use matchq::marginal::closed::{fivecycle_uniform_drift, pendant_uniform_drift};
use matchq::marginal::{fluid_node_reports_5cycle, report_from, stationary_numeric, MarginalChain};
use matchq::simulate::Termination;
use matchq::{
    build_marginal, drift_estimate, fluid_report, simulate, ArrivalRates, Family, FluidOptions, Graph, MarginalError,
    Policy, PriorityTable, QueueState, SimConfig,
};

// Global balance of `probs` under the chain's own rates, over the explored
// states; jumps to states outside the box are ignored on both sides.
fn balance_defect(chain: &MarginalChain, states: &[Vec<u32>], probs: &[f64]) -> f64 {
    use std::collections::HashMap;
    let index: HashMap<&[u32], usize> = states.iter().enumerate().map(|(k, x)| (x.as_slice(), k)).collect();
    let mut net = vec![0.0; states.len()];
    for (k, x) in states.iter().enumerate() {
        for l in 0..chain.dim() {
            for (dir, rate) in [(1i64, chain.up_rate(x, l)), (-1, chain.down_rate(x, l))] {
                if rate == 0.0 {
                    continue;
                }
                let mut y = x.clone();
                y[l] = (y[l] as i64 + dir) as u32;
                if let Some(&t) = index.get(y.as_slice()) {
                    net[k] -= probs[k] * rate;
                    net[t] += probs[k] * rate;
                }
            }
        }
    }
    net.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

// A path 4-5-6-7 hangs off the pendant hub; seen from node 1 the marginal
// chain has four coordinates.
fn long_tail() -> Graph {
    Graph::from_one_based(7, &[(1, 2), (1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)]).unwrap()
}

#[test]
fn numeric_law_balances_on_a_three_dimensional_chain() {
    let g = long_tail();
    let rates = ArrivalRates::new(vec![0.1, 0.1, 0.9, 0.3, 0.35, 0.3, 0.2]).unwrap();
    for policy in [Policy::Priority(PriorityTable::lexicographic(&g)), Policy::Uniform] {
        let chain = build_marginal(&g, &rates, &policy, 0).unwrap();
        assert_eq!(chain.coords, vec![3, 4, 5, 6]);
        let dist = stationary_numeric(&chain, 30, 1e-12).unwrap();
        assert!((dist.total() - 1.0).abs() < 1e-12);
        assert!(balance_defect(&chain, &dist.states, &dist.probs) < 1e-12);
    }
}

#[test]
fn arms_satisfy_detailed_balance() {
    // pendant seen from node 4: two birth-death arms glued at the origin
    let rates = ArrivalRates::new(vec![0.1, 0.15, 0.45, 0.3]).unwrap();
    let chain = build_marginal(&Graph::pendant(), &rates, &Family::PendantPriority.policy(), 3).unwrap();
    let dist = stationary_numeric(&chain, 120, 1e-12).unwrap();
    for (x, p) in dist.states.iter().zip(&dist.probs) {
        for l in 0..2 {
            let mut y = x.clone();
            y[l] += 1;
            let q = dist.prob(&y);
            if q > 0.0 {
                assert!((p * chain.up_rate(x, l) - q * chain.down_rate(&y, l)).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn guard_probabilities_reproduce_the_drift() {
    let rates = ArrivalRates::new(Family::FiveCyclePriority.rates(0.15)).unwrap();
    let g = Graph::five_cycle();
    let r = fluid_report(&g, &rates, &Family::FiveCyclePriority.policy(), 4, 2.0, &FluidOptions::default()).unwrap();
    assert_eq!(r.guard_probs.iter().map(|g| g.0).collect::<Vec<_>>(), vec![2, 3]);
    let served: f64 = r.guard_probs.iter().map(|&(j, p)| rates[j] * p).sum();
    assert!((r.drift - (rates[4] - served)).abs() < 1e-15);
    assert!(r.guard_probs.iter().all(|&(_, p)| (0.0..=1.0).contains(&p)));
    assert!(r.drift > 0.0 && r.tail_mass < 1e-9);
}

#[test]
fn uniform_closed_forms_match_numeric_solves() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut tried = 0;
    while tried < 40 {
        let five = tried % 2 == 1;
        let fam = if five { Family::FiveCycleUniform } else { Family::PendantUniform };
        let eps = rng.random_range(0.02..fam.max_epsilon());
        let mut lam = fam.rates(eps);
        // jitter off the family line
        for l in lam.iter_mut() {
            *l *= rng.random_range(0.9..1.1);
        }
        let closed = if five { fivecycle_uniform_drift(&lam) } else { pendant_uniform_drift(&lam) };
        let Ok(closed) = closed else { continue };
        tried += 1;
        let rates = ArrivalRates::new(lam).unwrap();
        let r =
            fluid_report(&fam.graph(), &rates, &Policy::Uniform, fam.unstable_node(), 1.0, &FluidOptions::default())
                .unwrap();
        assert!((r.drift - closed).abs() < 1e-9, "{five} {} vs {closed}", r.drift);
    }
}

#[test]
fn fivecycle_side_nodes_match_the_generic_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let g = Graph::five_cycle();
    let policy = Family::FiveCyclePriority.policy();
    let mut checked = 0;
    while checked < 30 {
        let lam: Vec<f64> = (0..5).map(|_| rng.random_range(0.05..0.5)).collect();
        let Ok(nodes) = fluid_node_reports_5cycle(&lam) else { continue };
        let rates = ArrivalRates::new(lam.clone()).unwrap();
        // node 3's marginal chain lives on nodes 2 and 4
        if let Ok(r) = fluid_report(&g, &rates, &policy, 2, 1.0, &FluidOptions::default()) {
            assert!((r.drift - nodes.node3_drift).abs() < 1e-9, "{lam:?}: {} vs {}", r.drift, nodes.node3_drift);
            checked += 1;
        }
        // node 4's on nodes 1 and 3
        if let Ok(r) = fluid_report(&g, &rates, &policy, 3, 1.0, &FluidOptions::default()) {
            // truncation error scales with the mass left outside the box
            let tol = 1e-9 + 10.0 * r.tail_mass;
            assert!((r.drift - nodes.node4_drift).abs() < tol, "{lam:?}: {} vs {}", r.drift, nodes.node4_drift);
        }
    }
}

#[test]
fn match_the_longest_has_no_marginal_chain() {
    let rates = ArrivalRates::new(Family::PendantPriority.rates(0.2)).unwrap();
    let err = build_marginal(&Graph::pendant(), &rates, &Policy::MatchLongest, 3).unwrap_err();
    assert!(matches!(err, MarginalError::UnsupportedPolicy));
}

#[test]
fn heavy_tails_are_reported() {
    // node 1's arm is critical: ratio 0.3 / (0.2 + 0.1) = 1
    let rates = ArrivalRates::new(vec![0.3, 0.1, 0.2, 0.5]).unwrap();
    let opts = FluidOptions { limit: Some(60), ..FluidOptions::default() };
    let err = fluid_report(&Graph::pendant(), &rates, &Family::PendantPriority.policy(), 3, 1.0, &opts).unwrap_err();
    assert!(matches!(err, MarginalError::HeavyTail { limit: 60, .. }), "{err:?}");
}

#[test]
fn fluid_drift_matches_simulated_slope_off_the_closed_forms() {
    // pendant with a fifth node on the leaf: node 4 is now also served by
    // node 5, so the drift is not one of the closed forms
    let g = Graph::from_one_based(5, &[(1, 2), (1, 3), (2, 3), (3, 4), (4, 5)]).unwrap();
    let rates = ArrivalRates::new(vec![0.1, 0.1, 0.45, 0.4, 0.05]).unwrap();
    let policy = Policy::Priority(
        PriorityTable::new(&g, vec![vec![1, 2], vec![0, 2], vec![0, 1, 3], vec![2, 4], vec![3]]).unwrap(),
    );
    let r = fluid_report(&g, &rates, &policy, 3, 1.0, &FluidOptions::default()).unwrap();
    let n = 20_000;
    let slopes: Vec<f64> = (0..8)
        .map(|k| {
            let cfg = SimConfig::new(n, 2.0, QueueState::concentrated(5, 3, n), 3).replication(k).stride(10);
            let tr = simulate(&g, &rates, &policy, &cfg).unwrap();
            assert_eq!(tr.termination, Termination::Horizon);
            drift_estimate(&tr, 3, None).unwrap().slope
        })
        .collect();
    let m = slopes.iter().sum::<f64>() / slopes.len() as f64;
    assert!((m - r.drift).abs() < 0.006, "simulated {m}, fluid {}", r.drift);
}

#[test]
fn report_from_closed_law_agrees_with_numeric() {
    let lam = Family::PendantPriority.rates(0.3);
    let rates = ArrivalRates::new(lam.clone()).unwrap();
    let chain = build_marginal(&Graph::pendant(), &rates, &Family::PendantPriority.policy(), 3).unwrap();
    let (_, closed) = matchq::marginal::stationary_closed_pendant(&lam, 400).unwrap();
    let a = report_from(&chain, &closed, 1.0);
    let b =
        fluid_report(&Graph::pendant(), &rates, &Family::PendantPriority.policy(), 3, 1.0, &FluidOptions::default())
            .unwrap();
    assert!((a.drift - b.drift).abs() < 1e-10);
    assert!((a.drift - Family::PendantPriority.drift(&lam).unwrap()).abs() < 1e-10);
}
