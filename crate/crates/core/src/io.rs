//! JSON file formats. All node labels in files are 1-based.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::{ArrivalRates, Graph, GraphError};
use crate::marginal::{FluidReport, Rho};
use crate::policy::{Policy, PolicyError, PriorityTable};
use crate::stability::{Provenance, UnstableInstance};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("priority order for node {0} is missing")]
    MissingOrder(usize),
    #[error("bad node label {0:?} in priority orders")]
    BadLabel(String),
}

/// `{"nodes": p, "edges": [[i, j], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub nodes: usize,
    pub edges: Vec<[usize; 2]>,
}

impl GraphFile {
    pub fn from_graph(g: &Graph) -> Self {
        GraphFile { nodes: g.node_count(), edges: g.edges().into_iter().map(|(i, j)| [i + 1, j + 1]).collect() }
    }

    pub fn to_graph(&self) -> Result<Graph, GraphError> {
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_one_based(self.nodes, &edges)
    }
}

/// `{"rates": [...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesFile {
    pub rates: Vec<f64>,
}

/// `{"kind": "priority", "order": {"3": [1, 2, 4], ...}}`, `{"kind": "ml"}` or
/// `{"kind": "uniform"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PolicyFile {
    Priority { order: BTreeMap<String, Vec<usize>> },
    Ml,
    Uniform,
}

impl PolicyFile {
    pub fn from_policy(p: &Policy) -> Self {
        match p {
            Policy::Priority(t) => PolicyFile::Priority {
                order: t
                    .orders()
                    .iter()
                    .enumerate()
                    .map(|(i, o)| ((i + 1).to_string(), o.iter().map(|j| j + 1).collect()))
                    .collect(),
            },
            Policy::MatchLongest => PolicyFile::Ml,
            Policy::Uniform => PolicyFile::Uniform,
        }
    }

    /// Nodes without neighbors may be omitted from the order map.
    pub fn to_policy(&self, graph: &Graph) -> Result<Policy, IoError> {
        match self {
            PolicyFile::Ml => Ok(Policy::MatchLongest),
            PolicyFile::Uniform => Ok(Policy::Uniform),
            PolicyFile::Priority { order } => {
                let p = graph.node_count();
                let mut table: Vec<Option<Vec<usize>>> = vec![None; p];
                for (k, v) in order {
                    let i: usize = k.trim().parse().map_err(|_| IoError::BadLabel(k.clone()))?;
                    if i == 0 || i > p {
                        return Err(IoError::BadLabel(k.clone()));
                    }
                    if v.iter().any(|&j| j == 0 || j > p) {
                        return Err(PolicyError::InvalidPriorityOrder { node: i }.into());
                    }
                    table[i - 1] = Some(v.iter().map(|j| j - 1).collect());
                }
                let mut rows = Vec::with_capacity(p);
                for (i, row) in table.into_iter().enumerate() {
                    match row {
                        Some(r) => rows.push(r),
                        None if graph.degree(i) == 0 => rows.push(Vec::new()),
                        None => return Err(IoError::MissingOrder(i + 1)),
                    }
                }
                Ok(Policy::Priority(PriorityTable::new(graph, rows)?))
            }
        }
    }
}

pub fn parse_graph(text: &str) -> Result<Graph, IoError> {
    Ok(serde_json::from_str::<GraphFile>(text)?.to_graph()?)
}

pub fn parse_rates(text: &str, graph: &Graph) -> Result<ArrivalRates, IoError> {
    let f: RatesFile = serde_json::from_str(text)?;
    Ok(ArrivalRates::for_graph(f.rates, graph)?)
}

pub fn parse_policy(text: &str, graph: &Graph) -> Result<Policy, IoError> {
    serde_json::from_str::<PolicyFile>(text)?.to_policy(graph)
}

/// Instance files bundle the three formats above with the unstable node and
/// how the instance was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub graph: GraphFile,
    pub rates: Vec<f64>,
    pub policy: PolicyFile,
    pub unstable_node: usize,
    pub predicted_drift: f64,
    #[serde(default)]
    pub provenance: Value,
}

impl InstanceFile {
    pub fn from_instance(inst: &UnstableInstance) -> Self {
        InstanceFile {
            graph: GraphFile::from_graph(&inst.graph),
            rates: inst.rates.as_slice().to_vec(),
            policy: PolicyFile::from_policy(&inst.policy),
            unstable_node: inst.unstable_node + 1,
            predicted_drift: inst.predicted_drift,
            provenance: provenance_json(&inst.provenance),
        }
    }

    pub fn to_parts(&self) -> Result<(Graph, ArrivalRates, Policy), IoError> {
        let g = self.graph.to_graph()?;
        let r = ArrivalRates::for_graph(self.rates.clone(), &g)?;
        let p = self.policy.to_policy(&g)?;
        Ok((g, r, p))
    }
}

fn provenance_json(p: &Provenance) -> Value {
    match p {
        Provenance::Family { family, epsilon } => json!({"family": family, "epsilon": epsilon}),
        Provenance::Embedded { family, epsilon, embedding, tau, beta, gamma, hat_total, residual_drift } => json!({
            "family": family,
            "epsilon": epsilon,
            "embedding": embedding.iter().map(|v| v + 1).collect::<Vec<_>>(),
            "tau": tau,
            "beta": beta,
            "gamma": gamma,
            "hat_total": hat_total,
            "residual_drift": residual_drift,
        }),
    }
}

/// `{i0, guard_probs, drift, rho, method, tail_mass}`; an infinite `rho` is
/// written as the string `"inf"`.
pub fn fluid_report_json(r: &FluidReport) -> Value {
    let guard: BTreeMap<String, f64> = r.guard_probs.iter().map(|(j, g)| ((j + 1).to_string(), *g)).collect();
    json!({
        "i0": r.i0 + 1,
        "guard_probs": guard,
        "drift": r.drift,
        "rho": rho_json(r.rho),
        "method": r.method,
        "tail_mass": r.tail_mass,
    })
}

pub fn rho_json(rho: Rho) -> Value {
    match rho {
        Rho::Finite(t) => json!(t),
        Rho::Infinite => json!("inf"),
    }
}
