use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use std::hint::black_box;

use matchq::graph::{connected_graphs, DEFAULT_ENUMERATION_CAP};
use matchq::marginal::stationary_numeric;
use matchq::randgraph::grow_and_match;
use matchq::{
    build_marginal, classify, counterexample, ncond_check, simulate, ArrivalRates, Family, Graph, Policy, QueueState,
    SimConfig,
};

const EVENTS: u64 = 100_000;

fn simulation(c: &mut Criterion) {
    let inst = counterexample(Family::PendantPriority, 0.2).unwrap();
    let mut group = c.benchmark_group("simulate");
    group.throughput(Throughput::Elements(EVENTS));
    for policy in [inst.policy.clone(), Policy::MatchLongest, Policy::Uniform] {
        let cfg = SimConfig::new(1, 1e12, QueueState::concentrated(4, 3, 1_000), 1).max_events(EVENTS).stride(1_000);
        group.bench_function(policy.name(), |b| {
            b.iter(|| simulate(&inst.graph, &inst.rates, &policy, black_box(&cfg)).unwrap())
        });
    }
    group.finish();
}

fn marginal(c: &mut Criterion) {
    let mut group = c.benchmark_group("stationary_numeric");
    for fam in [Family::PendantPriority, Family::FiveCyclePriority] {
        let rates = ArrivalRates::new(fam.rates(fam.max_epsilon() / 2.0)).unwrap();
        let chain = build_marginal(&fam.graph(), &rates, &fam.policy(), fam.unstable_node()).unwrap();
        group.bench_function(format!("{fam:?}/L=200"), |b| b.iter(|| stationary_numeric(&chain, 200, 1e-12).unwrap()));
    }
    group.finish();
}

fn graphs(c: &mut Criterion) {
    let g7 = connected_graphs(7);
    c.bench_function("classify/all connected p=7", |b| b.iter(|| g7.iter().filter(|g| classify(g).is_ok()).count()));
    c.bench_function("connected_graphs/p=6", |b| b.iter(|| connected_graphs(black_box(6)).len()));
    let g = Graph::cycle(15);
    let rates = ArrivalRates::new((1..=15).map(|i| 1.0 + 0.01 * i as f64).collect()).unwrap();
    c.bench_function("ncond_check/C15", |b| b.iter(|| ncond_check(&g, &rates, DEFAULT_ENUMERATION_CAP).unwrap()));
}

fn randgraph(c: &mut Criterion) {
    let inst = counterexample(Family::PendantUniform, 0.2).unwrap();
    let mut group = c.benchmark_group("grow_and_match");
    group.throughput(Throughput::Elements(EVENTS));
    group.bench_function("pendant-uniform", |b| {
        b.iter(|| grow_and_match(&inst.graph, &inst.rates, &inst.policy, EVENTS, 3, EVENTS).unwrap())
    });
    group.finish();
}

criterion_group!(benches, simulation, marginal, graphs, randgraph);
criterion_main!(benches);
