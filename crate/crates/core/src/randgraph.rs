//! Online matching on a growing random graph.
//!
//! Nodes arrive one at a time with a random type; a new node is adjacent to
//! every earlier node whose type is adjacent in the template. A matching
//! policy either pairs the newcomer with an unmatched compatible node or
//! leaves it unmatched. Unmatched nodes per type evolve exactly like the
//! queues of the matching model fed with the same arrivals, so both are
//! driven by the same random stream in the same order.

use std::collections::VecDeque;
use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{ArrivalRates, Graph, GraphError, NodeSet};
use crate::policy::{apply_in_place, Policy, PolicyError};
use crate::rng::stream;
use crate::simulate::ArrivalStream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RandGraphError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GrownNode {
    pub kind: usize,
    pub partner: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthState {
    pub template: Graph,
    /// Type distribution.
    pub mu: Vec<f64>,
    pub nodes: Vec<GrownNode>,
    /// Unmatched nodes per type.
    pub unmatched: Vec<u64>,
    // Unmatched node ids per type, oldest first.
    waiting: Vec<VecDeque<usize>>,
    matched: u64,
}

impl GrowthState {
    pub fn new(template: &Graph, mu: &ArrivalRates) -> Self {
        let p = template.node_count();
        GrowthState {
            template: template.clone(),
            mu: mu.normalized().as_slice().to_vec(),
            nodes: Vec::new(),
            unmatched: vec![0; p],
            waiting: vec![VecDeque::new(); p],
            matched: 0,
        }
    }

    /// Matched nodes (twice the matching size), kept as a running count.
    pub fn matched_count(&self) -> u64 {
        self.matched
    }

    /// Matched pairs `(u, v)` with `u < v`.
    pub fn matching(&self) -> Vec<(usize, usize)> {
        self.nodes.iter().enumerate().filter_map(|(u, n)| n.partner.filter(|&v| u < v).map(|v| (u, v))).collect()
    }

    fn add(&mut self, kind: usize, partner_kind: Option<usize>) {
        let id = self.nodes.len();
        match partner_kind {
            Some(j) => {
                // The oldest waiting node of the chosen type.
                let v = self.waiting[j].pop_front().expect("policy picked a non-empty type");
                self.nodes[v].partner = Some(id);
                self.nodes.push(GrownNode { kind, partner: Some(v) });
                self.matched += 2;
            }
            None => {
                self.waiting[kind].push_back(id);
                self.nodes.push(GrownNode { kind, partner: None });
            }
        }
        apply_in_place(&mut self.unmatched, kind, partner_kind);
    }

    #[cfg(test)]
    pub(crate) fn corrupt_partner(&mut self, u: usize, v: Option<usize>) {
        self.nodes[u].partner = v;
    }
}

/// `(arrivals so far, matched nodes, unmatched per type)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checkpoint {
    pub n: u64,
    pub matched: u64,
    pub unmatched: Vec<u64>,
}

impl Checkpoint {
    pub fn matched_fraction(&self) -> f64 {
        self.matched as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRun {
    pub state: GrowthState,
    pub trajectory: Vec<Checkpoint>,
}

impl GrowthRun {
    /// CSV `n,matched_count,unmatched_1..unmatched_p`.
    pub fn write_trajectory_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["n".to_string(), "matched_count".into()];
        header.extend((1..=self.state.template.node_count()).map(|i| format!("unmatched_{i}")));
        w.write_record(&header)?;
        for c in &self.trajectory {
            let mut row = vec![c.n.to_string(), c.matched.to_string()];
            row.extend(c.unmatched.iter().map(u64::to_string));
            w.write_record(&row)?;
        }
        w.flush()
    }
}

/// Grows `n_nodes` nodes with types drawn from `weights / Σ weights`.
///
/// Passing the arrival rates of a matching model (and the same seed) gives
/// the unmatched counts of the queue simulated by
/// [`crate::simulate::simulate`] from the empty state, arrival by arrival.
pub fn grow_and_match(
    template: &Graph,
    weights: &ArrivalRates,
    policy: &Policy,
    n_nodes: u64,
    seed: u64,
    checkpoint_every: u64,
) -> Result<GrowthRun, RandGraphError> {
    grow_and_match_observed(template, weights, policy, n_nodes, seed, checkpoint_every, |_| {})
}

pub fn grow_and_match_observed(
    template: &Graph,
    weights: &ArrivalRates,
    policy: &Policy,
    n_nodes: u64,
    seed: u64,
    checkpoint_every: u64,
    observe: impl FnMut(&GrowthState),
) -> Result<GrowthRun, RandGraphError> {
    grow(template, weights, policy, n_nodes, (seed, 0), checkpoint_every, observe)
}

/// Replication `r` under master `seed`, on the same stream as replication `r`
/// of [`crate::simulate::simulate`].
pub fn grow_and_match_replication(
    template: &Graph,
    weights: &ArrivalRates,
    policy: &Policy,
    n_nodes: u64,
    seed: u64,
    replication: u64,
    checkpoint_every: u64,
) -> Result<GrowthRun, RandGraphError> {
    grow(template, weights, policy, n_nodes, (seed, replication), checkpoint_every, |_| {})
}

fn grow(
    template: &Graph,
    weights: &ArrivalRates,
    policy: &Policy,
    n_nodes: u64,
    (seed, replication): (u64, u64),
    checkpoint_every: u64,
    mut observe: impl FnMut(&GrowthState),
) -> Result<GrowthRun, RandGraphError> {
    if template.node_count() < 2 || !template.is_connected() {
        return Err(GraphError::NotConnected.into());
    }
    weights.check_len(template)?;
    policy.validate(template)?;
    let mut rng = stream(seed, replication);
    let input = ArrivalStream::new(weights);
    let mut state = GrowthState::new(template, weights);
    let mut trajectory = Vec::new();
    let every = checkpoint_every.max(1);
    for n in 1..=n_nodes {
        let (_, kind) = input.next(&mut rng);
        let choice = policy.decide(template, &state.unmatched, kind, &mut rng);
        state.add(kind, choice);
        observe(&state);
        if n % every == 0 || n == n_nodes {
            trajectory.push(Checkpoint { n, matched: state.matched_count(), unmatched: state.unmatched.clone() });
        }
    }
    Ok(GrowthRun { state, trajectory })
}

/// The partner map is an involution on matched nodes, every pair has
/// template-adjacent types, and the running counts agree with the nodes.
pub fn matching_is_valid(state: &GrowthState) -> bool {
    let mut unmatched = vec![0u64; state.template.node_count()];
    let mut matched = 0;
    for (u, node) in state.nodes.iter().enumerate() {
        match node.partner {
            None => unmatched[node.kind] += 1,
            Some(v) => {
                matched += 1;
                let Some(other) = state.nodes.get(v) else { return false };
                if v == u || other.partner != Some(u) || !state.template.has_edge(node.kind, other.kind) {
                    return false;
                }
            }
        }
    }
    unmatched == state.unmatched && matched == state.matched
}

/// `μ(I) - μ(E(I))` for every independent set `I` of the template.
pub fn tutte_condition_estimate(
    template: &Graph,
    mu: &ArrivalRates,
    cap: usize,
) -> Result<Vec<(NodeSet, f64)>, GraphError> {
    mu.check_len(template)?;
    let mu = mu.normalized();
    Ok(template
        .independent_sets(cap)?
        .into_iter()
        .map(|s| (s, mu.sum_over(s) - mu.sum_over(template.neighbors_of_set(s))))
        .collect())
}
