//! Matching policies and the one-step transition of the queue process.

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::graph::{Graph, NodeSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("priority order of node {node} must list each of its neighbors exactly once")]
    InvalidPriorityOrder { node: usize },
    #[error("state has positive queues at adjacent nodes {0} and {1}")]
    StateNotAdmissible(usize, usize),
    #[error("state length {got} does not match graph with {expected} nodes")]
    StateLength { expected: usize, got: usize },
    #[error("node {0} is not in the graph")]
    NodeOutOfRange(usize),
    #[error("this operation needs a priority policy")]
    NotPriority,
}

/// Per-node strict preference over neighbors: `order[i][0]` is served first.
#[derive(Clone, PartialEq, Eq)]
pub struct PriorityTable {
    order: Vec<Vec<usize>>,
}

impl PriorityTable {
    /// Each `order[i]` must be a permutation of the neighbors of `i`.
    pub fn new(graph: &Graph, order: Vec<Vec<usize>>) -> Result<Self, PolicyError> {
        if order.len() != graph.node_count() {
            return Err(PolicyError::InvalidPriorityOrder { node: order.len().min(graph.node_count()) + 1 });
        }
        for (i, o) in order.iter().enumerate() {
            let listed: NodeSet = o.iter().copied().filter(|&j| j < 64).collect();
            if o.len() != graph.degree(i) || listed != graph.neighbors(i) {
                return Err(PolicyError::InvalidPriorityOrder { node: i + 1 });
            }
        }
        Ok(PriorityTable { order })
    }

    /// Neighbors in increasing index order.
    pub fn lexicographic(graph: &Graph) -> Self {
        PriorityTable { order: (0..graph.node_count()).map(|i| graph.neighbors(i).to_vec()).collect() }
    }

    pub fn order(&self, i: usize) -> &[usize] {
        &self.order[i]
    }

    pub fn orders(&self) -> &[Vec<usize>] {
        &self.order
    }

    /// Neighbors that `j` prefers strictly over `i`.
    pub fn preferred_over(&self, j: usize, i: usize) -> NodeSet {
        self.order[j].iter().take_while(|&&k| k != i).copied().collect()
    }

    /// The same orders with neighbors outside each node's side of the cut
    /// `part` / complement removed, matching [`Graph::disconnect`].
    pub fn disconnect(&self, part: NodeSet) -> PriorityTable {
        let order = self
            .order
            .iter()
            .enumerate()
            .map(|(i, o)| o.iter().copied().filter(|&j| part.contains(j) == part.contains(i)).collect())
            .collect();
        PriorityTable { order }
    }
}

impl fmt::Debug for PriorityTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (i, o) in self.order.iter().enumerate() {
            m.entry(&(i + 1), &o.iter().map(|j| j + 1).collect::<Vec<_>>());
        }
        m.finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Policy {
    Priority(PriorityTable),
    /// Match the longest compatible queue, ties broken uniformly.
    MatchLongest,
    /// Uniform over compatible non-empty queues.
    Uniform,
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::Priority(_) => "priority",
            Policy::MatchLongest => "ml",
            Policy::Uniform => "uniform",
        }
    }

    pub fn validate(&self, graph: &Graph) -> Result<(), PolicyError> {
        match self {
            Policy::Priority(t) => PriorityTable::new(graph, t.order.clone()).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// The decision for an arrival at `arriving` without state validation.
    #[inline]
    pub(crate) fn decide<R: Rng + ?Sized>(
        &self,
        graph: &Graph,
        q: &[u64],
        arriving: usize,
        rng: &mut R,
    ) -> Option<usize> {
        match self {
            Policy::Priority(t) => t.order[arriving].iter().copied().find(|&j| q[j] > 0),
            Policy::MatchLongest => {
                let (best, ties) = longest_neighbors(graph, q, arriving);
                pick_nth(ties, best, rng)
            }
            Policy::Uniform => {
                let avail = available(graph, q, arriving);
                pick_nth(avail, 1, rng)
            }
        }
    }
}

/// Neighbors of `i` with a positive queue.
#[inline]
pub(crate) fn available(graph: &Graph, q: &[u64], i: usize) -> NodeSet {
    graph.neighbors(i).iter().filter(|&j| q[j] > 0).collect()
}

/// Maximal neighbor queue length and the neighbors attaining it.
#[inline]
pub(crate) fn longest_neighbors(graph: &Graph, q: &[u64], i: usize) -> (u64, NodeSet) {
    let mut best = 0;
    let mut ties = NodeSet::EMPTY;
    for j in graph.neighbors(i).iter() {
        if q[j] > best {
            best = q[j];
            ties = NodeSet::single(j);
        } else if q[j] == best && best > 0 {
            ties = ties.with(j);
        }
    }
    (best, ties)
}

// Uniform member of `set` (no draw when the set is empty or `guard` is 0).
#[inline]
fn pick_nth<R: Rng + ?Sized>(set: NodeSet, guard: u64, rng: &mut R) -> Option<usize> {
    if guard == 0 || set.is_empty() {
        return None;
    }
    let k = rng.random_range(0..set.len());
    set.iter().nth(k)
}

/// Queue lengths indexed by node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueueState(pub Vec<u64>);

impl QueueState {
    pub fn zero(nodes: usize) -> Self {
        QueueState(vec![0; nodes])
    }

    /// All mass `n` on a single node.
    pub fn concentrated(nodes: usize, node: usize, n: u64) -> Self {
        let mut q = vec![0; nodes];
        q[node] = n;
        QueueState(q)
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Checks the length and that no edge has both endpoints non-empty.
    pub fn check(&self, graph: &Graph) -> Result<(), PolicyError> {
        if self.0.len() != graph.node_count() {
            return Err(PolicyError::StateLength { expected: graph.node_count(), got: self.0.len() });
        }
        for (i, j) in graph.edges() {
            if self.0[i] > 0 && self.0[j] > 0 {
                return Err(PolicyError::StateNotAdmissible(i + 1, j + 1));
            }
        }
        Ok(())
    }

    /// `1` distance.
    pub fn distance(&self, other: &QueueState) -> u64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.abs_diff(*b)).sum()
    }
}

/// The partner chosen for an arrival at `arriving` in state `state`, or `None`
/// if the arrival must wait. Validates the state and policy first.
pub fn match_decision<R: Rng + ?Sized>(
    policy: &Policy,
    graph: &Graph,
    state: &QueueState,
    arriving: usize,
    rng: &mut R,
) -> Result<Option<usize>, PolicyError> {
    if arriving >= graph.node_count() {
        return Err(PolicyError::NodeOutOfRange(arriving + 1));
    }
    state.check(graph)?;
    policy.validate(graph)?;
    Ok(policy.decide(graph, &state.0, arriving, rng))
}

/// Applies an arrival at `arriving` matched with `decision`.
pub fn apply_transition(state: &QueueState, arriving: usize, decision: Option<usize>) -> QueueState {
    let mut next = state.clone();
    apply_in_place(&mut next.0, arriving, decision);
    next
}

#[inline]
pub(crate) fn apply_in_place(q: &mut [u64], arriving: usize, decision: Option<usize>) {
    match decision {
        Some(j) => {
            debug_assert!(q[j] > 0, "matched with an empty queue");
            q[j] -= 1;
        }
        None => q[arriving] += 1,
    }
}
