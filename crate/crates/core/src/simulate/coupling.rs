//! Two replicas driven by one arrival stream.

use rand::Rng;
use serde::Serialize;

use super::{validate_model, ArrivalStream, SimError};
use crate::graph::{ArrivalRates, Graph, NodeSet};
use crate::policy::{apply_in_place, available, longest_neighbors, Policy, PolicyError, QueueState};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingConfig {
    pub events: u64,
    pub seed: u64,
    pub replication: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonExpansionReport {
    pub events: u64,
    /// `|x - y|`, the gap at time 0.
    pub bound: u64,
    pub max_gap: u64,
    pub final_gap: u64,
    /// First event after which the gap exceeded `bound`.
    pub first_violation: Option<u64>,
}

/// Runs the systems started at `x` and `y` on the same input and tracks their
/// 1-norm distance after every event.
///
/// Priority decisions are deterministic; match-the-longest shares the
/// tie-breaking uniform; the uniform policy draws one candidate per replica
/// and gives the second replica the first one's draw whenever both draws lie
/// in the intersection of the two candidate sets.
pub fn coupled_nonexpansive(
    graph: &Graph,
    rates: &ArrivalRates,
    policy: &Policy,
    x: &QueueState,
    y: &QueueState,
    config: &CouplingConfig,
) -> Result<NonExpansionReport, SimError> {
    validate_model(graph, rates, policy)?;
    x.check(graph)?;
    y.check(graph)?;
    let mut rng = stream(config.seed, config.replication);
    let input = ArrivalStream::new(rates);
    let (mut qx, mut qy) = (x.0.clone(), y.0.clone());
    let bound = x.distance(y);
    let mut report = NonExpansionReport { events: 0, bound, max_gap: bound, final_gap: bound, first_violation: None };

    for e in 0..config.events {
        let (_, c) = input.next(&mut rng);
        let (dx, dy) = match policy {
            Policy::Priority(_) => (policy.decide(graph, &qx, c, &mut rng), policy.decide(graph, &qy, c, &mut rng)),
            Policy::MatchLongest => {
                let u: f64 = rng.random();
                (shared_longest(graph, &qx, c, u), shared_longest(graph, &qy, c, u))
            }
            Policy::Uniform => coupled_uniform(graph, &qx, &qy, c, &mut rng),
        };
        apply_in_place(&mut qx, c, dx);
        apply_in_place(&mut qy, c, dy);
        let gap = l1(&qx, &qy);
        report.max_gap = report.max_gap.max(gap);
        if gap > bound && report.first_violation.is_none() {
            report.first_violation = Some(e + 1);
        }
        report.final_gap = gap;
        report.events = e + 1;
    }
    Ok(report)
}

fn l1(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).sum()
}

fn nth_by_uniform(set: NodeSet, u: f64) -> Option<usize> {
    if set.is_empty() {
        return None;
    }
    let k = ((u * set.len() as f64) as usize).min(set.len() - 1);
    set.iter().nth(k)
}

fn shared_longest(graph: &Graph, q: &[u64], c: usize, u: f64) -> Option<usize> {
    let (best, ties) = longest_neighbors(graph, q, c);
    if best == 0 {
        return None;
    }
    nth_by_uniform(ties, u)
}

fn coupled_uniform<R: Rng + ?Sized>(
    graph: &Graph,
    qx: &[u64],
    qy: &[u64],
    c: usize,
    rng: &mut R,
) -> (Option<usize>, Option<usize>) {
    let (ax, ay) = (available(graph, qx, c), available(graph, qy, c));
    let kx = nth_by_uniform(ax, rng.random());
    let ky = nth_by_uniform(ay, rng.random());
    let both = ax & ay;
    let in_both = |k: Option<usize>| k.is_some_and(|k| both.contains(k));
    if in_both(kx) && in_both(ky) {
        (kx, kx)
    } else {
        (kx, ky)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonChaosReport {
    pub events: u64,
    /// Largest `Σ_{i in part} |Q_i - Q̃_i|` seen.
    pub max_gap: u64,
    /// Arrivals to nodes outside `part` over the whole run.
    pub outside_arrivals: u64,
    /// Largest `gap - outside arrivals so far`; the bound holds iff this is ≤ 0.
    pub max_excess: i64,
    pub first_violation: Option<u64>,
}

/// Compares the system on `graph` with the one where every edge leaving
/// `part` is erased, both under the same priority orders (restricted on the
/// cut graph) and the same input. Queues outside `part` must start empty.
pub fn coupled_nonchaotic(
    graph: &Graph,
    part: NodeSet,
    rates: &ArrivalRates,
    policy: &Policy,
    initial: &QueueState,
    config: &CouplingConfig,
) -> Result<NonChaosReport, SimError> {
    validate_model(graph, rates, policy)?;
    initial.check(graph)?;
    let Policy::Priority(table) = policy else {
        return Err(PolicyError::NotPriority.into());
    };
    let outside = graph.all_nodes() - part;
    if outside.iter().any(|i| initial.0[i] > 0) {
        return Err(SimError::Config("queues outside the induced part must start empty".into()));
    }
    let cut_graph = graph.disconnect(part);
    let cut_policy = Policy::Priority(table.disconnect(part));

    let mut rng = stream(config.seed, config.replication);
    let input = ArrivalStream::new(rates);
    let (mut q, mut qt) = (initial.0.clone(), initial.0.clone());
    let mut report =
        NonChaosReport { events: 0, max_gap: 0, outside_arrivals: 0, max_excess: i64::MIN, first_violation: None };

    for e in 0..config.events {
        let (_, c) = input.next(&mut rng);
        let d = policy.decide(graph, &q, c, &mut rng);
        let dt = cut_policy.decide(&cut_graph, &qt, c, &mut rng);
        apply_in_place(&mut q, c, d);
        apply_in_place(&mut qt, c, dt);
        if outside.contains(c) {
            report.outside_arrivals += 1;
        }
        let gap: u64 = part.iter().map(|i| q[i].abs_diff(qt[i])).sum();
        report.max_gap = report.max_gap.max(gap);
        let excess = gap as i64 - report.outside_arrivals as i64;
        report.max_excess = report.max_excess.max(excess);
        if excess > 0 && report.first_violation.is_none() {
            report.first_violation = Some(e + 1);
        }
        report.events = e + 1;
    }
    Ok(report)
}
