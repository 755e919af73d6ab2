use super::{find_induced_odd_cycle, find_induced_pendant, Graph, GraphError, NodeSet, Separability};

/// Induced subgraph certifying that maximal policies can fail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// `emb[k]` plays pendant label `k+1`.
    Pendant([usize; 4]),
    /// `emb[k]` plays label `k+1` of [`Graph::five_cycle`].
    FiveCycle([usize; 5]),
}

impl Witness {
    pub fn nodes(&self) -> &[usize] {
        match self {
            Witness::Pendant(e) => e,
            Witness::FiveCycle(e) => e,
        }
    }

    /// The small graph this witness embeds.
    pub fn pattern(&self) -> Graph {
        match self {
            Witness::Pendant(_) => Graph::pendant(),
            Witness::FiveCycle(_) => Graph::five_cycle(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphClass {
    Bipartite {
        colouring: Vec<bool>,
    },
    Separable {
        order: usize,
        parts: Vec<NodeSet>,
    },
    /// Non-bipartite, non-separable, and an induced pendant or 5-cycle exists.
    NonSeparableWithWitness(Witness),
    /// Non-bipartite, non-separable, no induced pendant or 5-cycle; the shortest
    /// induced odd cycle (length at least 7) is reported.
    NonSeparableOddCycle {
        cycle: Vec<usize>,
    },
}

/// Places a connected graph in the stability taxonomy.
///
/// A pendant witness is preferred over a 5-cycle witness when both exist.
pub fn classify(graph: &Graph) -> Result<GraphClass, GraphError> {
    if !graph.is_connected() {
        return Err(GraphError::NotConnected);
    }
    if let Some(colouring) = graph.bipartition() {
        return Ok(GraphClass::Bipartite { colouring });
    }
    if let Separability::Separable { order, parts } = graph.separability() {
        return Ok(GraphClass::Separable { order, parts });
    }
    if let Some(emb) = find_induced_pendant(graph) {
        return Ok(GraphClass::NonSeparableWithWitness(Witness::Pendant(emb)));
    }
    if let Some(c) = find_induced_odd_cycle(graph, 5).filter(|c| c.len() == 5) {
        // Cycle order of the labelled 5-cycle is 1, 2, 4, 5, 3.
        let emb = [c[0], c[1], c[4], c[2], c[3]];
        return Ok(GraphClass::NonSeparableWithWitness(Witness::FiveCycle(emb)));
    }
    match find_induced_odd_cycle(graph, 7) {
        Some(cycle) => Ok(GraphClass::NonSeparableOddCycle { cycle }),
        None => Err(GraphError::NoWitnessFound),
    }
}
