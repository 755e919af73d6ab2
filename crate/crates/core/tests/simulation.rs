use matchq::simulate::{simulate_observed, Termination};
use matchq::{
    drift_estimate, hitting_time, simulate, ArrivalRates, Family, Graph, HittingTime, Policy, PriorityTable,
    QueueState, SimConfig, SimError,
};

fn admissible(g: &Graph, q: &[u64]) -> bool {
    g.edges().iter().all(|&(i, j)| q[i] == 0 || q[j] == 0)
}

#[test]
fn arrival_counts_are_poisson() {
    let g = Graph::five_cycle();
    let rates = ArrivalRates::new(vec![0.1, 0.3, 0.2, 0.15, 0.25]).unwrap();
    let t = 200_000.0;
    let cfg = SimConfig::new(1, t, QueueState::zero(5), 8).stride(1_000_000);
    let tr = simulate(&g, &rates, &Policy::Uniform, &cfg).unwrap();
    for (i, &a) in tr.arrivals.iter().enumerate() {
        let mean = rates[i] * t;
        assert!((a as f64 - mean).abs() < 4.0 * mean.sqrt(), "class {i}: {a} vs {mean}");
    }
    assert_eq!(tr.arrivals.iter().sum::<u64>(), tr.events);
}

#[test]
fn every_policy_keeps_states_admissible_and_non_idling() {
    let g = Graph::from_one_based(6, &[(1, 2), (2, 3), (3, 1), (3, 4), (4, 5), (5, 6), (6, 4)]).unwrap();
    let rates = ArrivalRates::new(vec![0.2, 0.1, 0.3, 0.15, 0.1, 0.15]).unwrap();
    for policy in [Policy::Priority(PriorityTable::lexicographic(&g)), Policy::MatchLongest, Policy::Uniform] {
        let mut prev = [0u64; 6];
        let cfg = SimConfig::new(1, 50_000.0, QueueState::zero(6), 2);
        simulate_observed(&g, &rates, &policy, &cfg, |ev, q| {
            assert!(admissible(&g, q));
            match ev.matched {
                Some(j) => {
                    assert!(g.has_edge(ev.class, j) && prev[j] == q[j] + 1);
                    if let Policy::MatchLongest = policy {
                        let best = g.neighbors(ev.class).iter().map(|k| prev[k]).max().unwrap();
                        assert_eq!(prev[j], best);
                    }
                }
                None => {
                    assert!(g.neighbors(ev.class).iter().all(|k| prev[k] == 0));
                    assert_eq!(q[ev.class], prev[ev.class] + 1);
                }
            }
            prev.copy_from_slice(q);
        })
        .unwrap();
    }
}

#[test]
fn runs_are_reproducible_per_replication() {
    let inst = matchq::counterexample(Family::PendantPriority, 0.2).unwrap();
    let cfg = SimConfig::new(100, 5.0, QueueState::concentrated(4, 3, 100), 42).replication(3);
    let a = simulate(&inst.graph, &inst.rates, &inst.policy, &cfg).unwrap();
    let b = simulate(&inst.graph, &inst.rates, &inst.policy, &cfg).unwrap();
    assert_eq!(a, b);
    let c = simulate(&inst.graph, &inst.rates, &inst.policy, &cfg.clone().replication(4)).unwrap();
    assert_ne!(a.times, c.times);
}

#[test]
fn stride_keeps_the_last_event() {
    let g = Graph::complete(3);
    let rates = ArrivalRates::new(vec![1.0; 3]).unwrap();
    let cfg = SimConfig::new(1, 1_000.0, QueueState::zero(3), 4).stride(7);
    let full = simulate(&g, &rates, &Policy::Uniform, &cfg.clone().stride(1)).unwrap();
    let thin = simulate(&g, &rates, &Policy::Uniform, &cfg).unwrap();
    assert_eq!(full.events, thin.events);
    assert_eq!(thin.len() as u64, full.events / 7 + !full.events.is_multiple_of(7) as u64);
    for k in 0..thin.len() - 1 {
        assert_eq!(thin.state(k), full.state(7 * k + 6));
    }
    assert_eq!(thin.state(thin.len() - 1), full.final_state.as_slice());
}

#[test]
fn triangle_empties_at_the_fluid_time() {
    // node 1 alone is loaded; it is drained at rate λ2 + λ3 - λ1 = 1/3 per
    // unit of scaled time, from level 1
    let g = Graph::complete(3);
    let rates = ArrivalRates::new(vec![1.0 / 3.0; 3]).unwrap();
    let n = 20_000;
    let mut times = Vec::new();
    for k in 0..10 {
        let cfg = SimConfig::new(n, 10.0, QueueState::concentrated(3, 0, n), 6)
            .replication(k)
            .stride(1_000)
            .stop_when_empty(0);
        let tr = simulate(&g, &rates, &Policy::Uniform, &cfg).unwrap();
        assert_eq!(tr.termination, Termination::Emptied);
        times.push(hitting_time(&tr, 0).time().unwrap());
    }
    let m = times.iter().sum::<f64>() / times.len() as f64;
    assert!((m - 3.0).abs() < 0.05, "{m}");
}

#[test]
fn triangle_is_recurrent_from_empty() {
    let g = Graph::complete(3);
    let rates = ArrivalRates::new(vec![0.3, 0.3, 0.4]).unwrap();
    let mut visits = 0;
    let mut total = 0u64;
    let mut max = 0;
    let cfg = SimConfig::new(1, 200_000.0, QueueState::zero(3), 10).stride(1_000_000);
    simulate_observed(&g, &rates, &Policy::MatchLongest, &cfg, |_, q| {
        let s = q.iter().sum::<u64>();
        visits += (s == 0) as u64;
        total += 1;
        max = max.max(s);
    })
    .unwrap();
    // positive recurrent: empty a positive fraction of the time, short excursions
    assert!(visits as f64 / total as f64 > 0.2, "{visits}/{total}");
    assert!(max < 60);
}

#[test]
fn slope_matches_the_fluid_drift_at_two_scales() {
    let inst = matchq::counterexample(Family::PendantUniform, 0.2).unwrap();
    for n in [2_000u64, 20_000] {
        let slopes: Vec<f64> = (0..10)
            .map(|k| {
                let cfg = SimConfig::new(n, 2.0, QueueState::concentrated(4, 3, n), 12).replication(k).stride(5);
                let tr = simulate(&inst.graph, &inst.rates, &inst.policy, &cfg).unwrap();
                drift_estimate(&tr, 3, None).unwrap().slope
            })
            .collect();
        let m = slopes.iter().sum::<f64>() / 10.0;
        let tol = 3.0 * (1.5 / (n as f64 * 10.0)).sqrt();
        assert!((m - inst.predicted_drift).abs() < tol, "n={n}: {m} vs {}", inst.predicted_drift);
    }
}

#[test]
fn hitting_time_reports_the_horizon_when_not_reached() {
    let inst = matchq::counterexample(Family::PendantPriority, 0.2).unwrap();
    let cfg = SimConfig::new(1_000, 3.0, QueueState::concentrated(4, 3, 1_000), 1).stride(50);
    let tr = simulate(&inst.graph, &inst.rates, &inst.policy, &cfg).unwrap();
    assert_eq!(hitting_time(&tr, 3), HittingTime::NeverWithinHorizon { horizon: 3.0 });
    assert!(matches!(hitting_time(&tr, 0), HittingTime::At(t) if t == 0.0));
}

#[test]
fn event_budget_and_bad_configs() {
    let g = Graph::pendant();
    let rates = ArrivalRates::new(vec![0.25; 4]).unwrap();
    let cfg = SimConfig::new(1, 1e9, QueueState::zero(4), 0).max_events(1_000);
    let tr = simulate(&g, &rates, &Policy::Uniform, &cfg).unwrap();
    assert_eq!((tr.events, tr.termination), (1_000, Termination::EventBudget));

    let bad = QueueState(vec![1, 1, 0, 0]);
    assert!(matches!(
        simulate(&g, &rates, &Policy::Uniform, &SimConfig::new(1, 1.0, bad, 0)),
        Err(SimError::Policy(_))
    ));
    let short = SimConfig::new(1, 1.0, QueueState::zero(4), 0);
    let tr = simulate(&g, &rates, &Policy::Uniform, &short).unwrap();
    assert!(matches!(drift_estimate(&tr, 0, None), Err(SimError::InsufficientSamples { .. })));
    let disconnected = Graph::from_one_based(4, &[(1, 2), (3, 4)]).unwrap();
    assert!(simulate(&disconnected, &rates, &Policy::Uniform, &short).is_err());
}

#[test]
fn csv_trace_format() {
    let g = Graph::path(2);
    let rates = ArrivalRates::new(vec![0.5, 0.5]).unwrap();
    let tr = simulate(&g, &rates, &Policy::Uniform, &SimConfig::new(1, 20.0, QueueState::zero(2), 3)).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,class,matched,q_1,q_2"));
    assert_eq!(lines.count(), tr.len());
}
