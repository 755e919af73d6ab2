//! Matching graphs and their structural classification.
//!
//! Nodes are `0..n` internally. Every file format and every human-facing
//! report uses 1-based labels; the conversion happens in [`crate::io`] and in
//! the `Display` impls here.

mod classify;
mod enumerate;
mod induced;
mod nodeset;

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classify::{classify, GraphClass, Witness};
pub use enumerate::{canonical_form, connected_graphs, is_isomorphic};
pub use induced::{find_induced_odd_cycle, find_induced_pendant, PENDANT_EDGES};
pub use nodeset::NodeSet;

/// Largest graph the bitmask representation supports.
pub const MAX_NODES: usize = 64;

/// Default cap on the node count for exhaustive independent-set enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("node index {index} out of range 1..={nodes}")]
    IndexOutOfRange { index: usize, nodes: usize },
    #[error("graph must have between 1 and {MAX_NODES} nodes, got {0}")]
    BadNodeCount(usize),
    #[error("graph has {nodes} nodes, enumeration cap is {cap}")]
    TooLarge { nodes: usize, cap: usize },
    #[error("graph is not connected")]
    NotConnected,
    #[error("connected non-bipartite non-separable graph without an induced pendant or odd cycle")]
    NoWitnessFound,
    #[error("arrival-rate vector has length {got}, graph has {expected} nodes")]
    RateLength { expected: usize, got: usize },
    #[error("arrival rate of node {node} must be finite and positive, got {value}")]
    BadRate { node: usize, value: f64 },
}

/// Simple undirected graph stored as adjacency bitmasks.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<u64>,
}

impl Graph {
    /// Builds a graph from 0-based edges, rejecting self-loops and duplicates.
    pub fn new(nodes: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if nodes == 0 || nodes > MAX_NODES {
            return Err(GraphError::BadNodeCount(nodes));
        }
        let mut adj = vec![0u64; nodes];
        for &(i, j) in edges {
            for k in [i, j] {
                if k >= nodes {
                    return Err(GraphError::IndexOutOfRange { index: k + 1, nodes });
                }
            }
            if i == j {
                return Err(GraphError::SelfLoop(i + 1));
            }
            if adj[i] & (1 << j) != 0 {
                return Err(GraphError::DuplicateEdge(i.min(j) + 1, i.max(j) + 1));
            }
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
        Ok(Graph { adj })
    }

    /// Same as [`Graph::new`] with 1-based labels, as used in the file formats.
    pub fn from_one_based(nodes: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut shifted = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            for k in [i, j] {
                if k == 0 || k > nodes {
                    return Err(GraphError::IndexOutOfRange { index: k, nodes });
                }
            }
            shifted.push((i - 1, j - 1));
        }
        Graph::new(nodes, &shifted)
    }

    pub(crate) fn from_masks(adj: Vec<u64>) -> Self {
        debug_assert!(adj.len() <= MAX_NODES);
        Graph { adj }
    }

    /// Triangle 1-2-3 with node 4 hanging off node 3.
    pub fn pendant() -> Self {
        Graph::from_one_based(4, &PENDANT_EDGES).expect("static graph")
    }

    /// The 5-cycle labelled as in the analyzed priority model:
    /// edges 1-2, 1-3, 2-4, 3-5, 4-5 (cycle order 1, 2, 4, 5, 3).
    pub fn five_cycle() -> Self {
        Graph::from_one_based(5, &FIVE_CYCLE_EDGES).expect("static graph")
    }

    /// Ring `0 - 1 - ... - (k-1) - 0`.
    pub fn cycle(k: usize) -> Self {
        assert!(k >= 3, "a cycle needs at least 3 nodes");
        let edges: Vec<_> = (0..k).map(|i| (i, (i + 1) % k)).collect();
        Graph::new(k, &edges).expect("static graph")
    }

    pub fn complete(k: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                edges.push((i, j));
            }
        }
        Graph::new(k, &edges).expect("static graph")
    }

    pub fn path(k: usize) -> Self {
        let edges: Vec<_> = (1..k).map(|i| (i - 1, i)).collect();
        Graph::new(k, &edges).expect("static graph")
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet::full(self.node_count())
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.node_count() {
            for j in NodeSet::from_mask(self.adj[i]).iter().filter(|&j| j > i) {
                out.push((i, j));
            }
        }
        out
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i] & (1 << j) != 0
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> NodeSet {
        NodeSet::from_mask(self.adj[i])
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].count_ones() as usize
    }

    /// Union of the neighborhoods of the members of `set`.
    pub fn neighbors_of_set(&self, set: NodeSet) -> NodeSet {
        set.iter().fold(NodeSet::EMPTY, |acc, i| acc | self.neighbors(i))
    }

    pub fn is_independent(&self, set: NodeSet) -> bool {
        set.iter().all(|i| (self.neighbors(i) & set).is_empty())
    }

    /// Subgraph induced by `nodes`; node `k` of the result is `nodes[k]`.
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let adj = nodes
            .iter()
            .map(|&u| {
                nodes.iter().enumerate().filter(|&(_, &v)| self.has_edge(u, v)).fold(0u64, |m, (k, _)| m | (1 << k))
            })
            .collect();
        Graph { adj }
    }

    pub fn complement(&self) -> Graph {
        let full = self.all_nodes().mask();
        let adj = (0..self.node_count()).map(|i| full & !self.adj[i] & !(1 << i)).collect();
        Graph { adj }
    }

    /// Removes every edge with exactly one endpoint in `part`.
    pub fn disconnect(&self, part: NodeSet) -> Graph {
        let rest = self.all_nodes() - part;
        let adj = (0..self.node_count())
            .map(|i| {
                let keep = if part.contains(i) { part } else { rest };
                self.adj[i] & keep.mask()
            })
            .collect();
        Graph { adj }
    }

    /// Connected components, each listed by its smallest node first.
    pub fn components(&self) -> Vec<NodeSet> {
        let mut seen = NodeSet::EMPTY;
        let mut out = Vec::new();
        for s in 0..self.node_count() {
            if seen.contains(s) {
                continue;
            }
            let mut comp = NodeSet::single(s);
            let mut frontier = NodeSet::single(s);
            while !frontier.is_empty() {
                let next = self.neighbors_of_set(frontier) - comp;
                comp = comp | next;
                frontier = next;
            }
            seen = seen | comp;
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Proper 2-colouring (`false`/`true` per node) if one exists.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let n = self.node_count();
        let mut colour: Vec<Option<bool>> = vec![None; n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            if colour[s].is_some() {
                continue;
            }
            colour[s] = Some(false);
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                let cu = colour[u].unwrap();
                for v in self.neighbors(u).iter() {
                    match colour[v] {
                        None => {
                            colour[v] = Some(!cu);
                            queue.push_back(v);
                        }
                        Some(cv) if cv == cu => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(colour.into_iter().map(Option::unwrap).collect())
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }

    /// All non-empty independent sets, in increasing order of their bitmask.
    pub fn independent_sets(&self, cap: usize) -> Result<Vec<NodeSet>, GraphError> {
        if self.node_count() > cap {
            return Err(GraphError::TooLarge { nodes: self.node_count(), cap });
        }
        let mut out = Vec::new();
        self.extend_independent(NodeSet::EMPTY, self.all_nodes(), &mut out);
        out.sort_unstable_by_key(|s| s.mask());
        Ok(out)
    }

    fn extend_independent(&self, current: NodeSet, candidates: NodeSet, out: &mut Vec<NodeSet>) {
        let mut rest = candidates;
        while let Some(v) = rest.first() {
            rest.remove(v);
            let with_v = current.with(v);
            out.push(with_v);
            self.extend_independent(with_v, rest - self.neighbors(v), out);
        }
    }

    /// Partition into `q >= 2` maximal independent sets with all cross edges present.
    ///
    /// Equivalent test: every connected component of the complement is a clique
    /// of the complement, i.e. an independent set of `self`.
    pub fn separability(&self) -> Separability {
        let comps = self.complement().components();
        if comps.len() < 2 || !comps.iter().all(|&c| self.is_independent(c)) {
            return Separability::NotSeparable;
        }
        Separability::Separable { order: comps.len(), parts: comps }
    }

    pub fn is_separable(&self) -> bool {
        matches!(self.separability(), Separability::Separable { .. })
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self.edges().iter().map(|(i, j)| format!("{}-{}", i + 1, j + 1)).collect();
        write!(f, "Graph({} nodes: {})", self.node_count(), edges.join(" "))
    }
}

pub(crate) const FIVE_CYCLE_EDGES: [(usize, usize); 5] = [(1, 2), (1, 3), (2, 4), (3, 5), (4, 5)];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Separability {
    NotSeparable,
    Separable { order: usize, parts: Vec<NodeSet> },
}

/// Strictly positive Poisson intensities, one per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalRates(Vec<f64>);

impl ArrivalRates {
    pub fn new(rates: Vec<f64>) -> Result<Self, GraphError> {
        if let Some((i, &r)) = rates.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r > 0.0)) {
            return Err(GraphError::BadRate { node: i + 1, value: r });
        }
        Ok(ArrivalRates(rates))
    }

    /// Allows zero entries (at least one rate must stay positive). Only the
    /// coupling experiments use this; classes with zero intensity sit outside
    /// the stability theory.
    pub fn allow_zero(rates: Vec<f64>) -> Result<Self, GraphError> {
        if let Some((i, &r)) = rates.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r >= 0.0)) {
            return Err(GraphError::BadRate { node: i + 1, value: r });
        }
        if !rates.iter().any(|&r| r > 0.0) {
            return Err(GraphError::BadRate { node: 1, value: 0.0 });
        }
        Ok(ArrivalRates(rates))
    }

    pub fn for_graph(rates: Vec<f64>, graph: &Graph) -> Result<Self, GraphError> {
        let r = ArrivalRates::new(rates)?;
        r.check_len(graph)?;
        Ok(r)
    }

    pub fn check_len(&self, graph: &Graph) -> Result<(), GraphError> {
        if self.0.len() != graph.node_count() {
            return Err(GraphError::RateLength { expected: graph.node_count(), got: self.0.len() });
        }
        Ok(())
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn sum_over(&self, set: NodeSet) -> f64 {
        set.iter().map(|i| self.0[i]).sum()
    }

    /// The probability vector `λ / Σλ`.
    pub fn normalized(&self) -> ArrivalRates {
        let t = self.total();
        ArrivalRates(self.0.iter().map(|r| r / t).collect())
    }
}

impl std::ops::Index<usize> for ArrivalRates {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Outcome of checking the necessary stability condition.
#[derive(Debug, Clone, PartialEq)]
pub enum Ncond {
    /// Every independent set has strictly less arrival mass than its
    /// neighborhood; `slack` is the smallest margin, attained at `tightest`.
    Satisfied { slack: f64, tightest: NodeSet },
    /// `witness` maximizes `λ(I) - λ(E(I))`, which is `excess >= 0`.
    Violated { witness: NodeSet, excess: f64 },
}

impl Ncond {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, Ncond::Satisfied { .. })
    }
}

/// Exhaustive check of `λ(I) < λ(E(I))` over all independent sets `I`.
pub fn ncond_check(graph: &Graph, rates: &ArrivalRates, cap: usize) -> Result<Ncond, GraphError> {
    rates.check_len(graph)?;
    let sets = graph.independent_sets(cap)?;
    // (excess, set) with the maximal excess; ties go to the lexicographically
    // smallest sorted node list.
    let mut best: Option<(f64, NodeSet)> = None;
    for set in sets {
        let excess = rates.sum_over(set) - rates.sum_over(graph.neighbors_of_set(set));
        best = match best {
            None => Some((excess, set)),
            Some((e, s)) if excess > e || (excess == e && set.lex_cmp(&s).is_lt()) => Some((excess, set)),
            keep => keep,
        };
    }
    let (excess, set) = best.expect("a graph has at least one independent set");
    Ok(if excess < 0.0 {
        Ncond::Satisfied { slack: -excess, tightest: set }
    } else {
        Ncond::Violated { witness: set, excess }
    })
}

/// Smallest `λ(E(I)) - λ(I)` over all independent sets.
pub fn ncond_slack(graph: &Graph, rates: &ArrivalRates, cap: usize) -> Result<f64, GraphError> {
    Ok(match ncond_check(graph, rates, cap)? {
        Ncond::Satisfied { slack, .. } => slack,
        Ncond::Violated { excess, .. } => -excess,
    })
}
