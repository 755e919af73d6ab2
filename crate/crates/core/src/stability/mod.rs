//! Stability regions of the analyzed models, unstable instances, and an
//! empirical classifier.

mod empirical;
mod family;
mod region;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{ArrivalRates, Graph, GraphError, NodeSet};
use crate::marginal::MarginalError;
use crate::policy::PolicyError;
use crate::simulate::SimError;

pub use empirical::{empirical_classify, EmpiricalBudget, EmpiricalEvidence, NodeCall, NodeEvidence, ScaleStats};
pub use family::{
    construct_nonmaximal, construct_nonmaximal_with, counterexample, Family, Provenance, UnstableInstance,
};
pub use region::{fivecycle_region, pendant_region};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("epsilon {eps} outside (0, {max}] for {family:?}")]
    EpsilonOutOfRange { family: Family, eps: f64, max: f64 },
    #[error("drift vanishes at epsilon {eps} for {family:?}")]
    BoundaryDegenerate { family: Family, eps: f64 },
    #[error("construction not applicable: {0}")]
    NotApplicable(String),
    #[error("stability condition fails at {0} for the constructed rates")]
    NcondFails(NodeSet),
    #[error("simulation of node {node} hit the event budget")]
    BudgetExceeded { node: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Marginal(#[from] MarginalError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    StableExact,
    UnstableExact,
    StableEmpirical,
    UnstableEmpirical,
    Inconclusive,
}

/// A strict inequality `lhs < rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; the inequality holds iff this is positive.
    pub margin: f64,
}

impl Inequality {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Inequality { name: name.into(), lhs, rhs, margin: rhs - lhs }
    }

    pub fn holds(&self) -> bool {
        self.lhs < self.rhs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    Exact { checks: Vec<Inequality>, first_failure: Option<String> },
    Empirical(EmpiricalEvidence),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

impl StabilityVerdict {
    pub(crate) fn exact(checks: Vec<Inequality>) -> Self {
        let first_failure = checks.iter().find(|c| !c.holds()).map(|c| c.name.clone());
        let verdict = if first_failure.is_none() { Verdict::StableExact } else { Verdict::UnstableExact };
        StabilityVerdict { verdict, evidence: Evidence::Exact { checks, first_failure } }
    }

    pub fn is_stable(&self) -> bool {
        matches!(self.verdict, Verdict::StableExact | Verdict::StableEmpirical)
    }

    pub fn is_unstable(&self) -> bool {
        matches!(self.verdict, Verdict::UnstableExact | Verdict::UnstableEmpirical)
    }

    pub fn first_failure(&self) -> Option<&str> {
        match &self.evidence {
            Evidence::Exact { first_failure, .. } => first_failure.as_deref(),
            Evidence::Empirical(_) => None,
        }
    }
}

/// The stability-condition inequalities `λ(I) < λ(E(I))`, one per
/// independent set, smaller sets first and lexicographic within a size.
pub fn ncond_inequalities(graph: &Graph, rates: &ArrivalRates) -> Result<Vec<Inequality>, GraphError> {
    rates.check_len(graph)?;
    let mut sets = graph.independent_sets(crate::graph::DEFAULT_ENUMERATION_CAP)?;
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then(a.lex_cmp(b)));
    Ok(sets
        .into_iter()
        .map(|s| Inequality::new(format!("ncond {s}"), rates.sum_over(s), rates.sum_over(graph.neighbors_of_set(s))))
        .collect())
}
