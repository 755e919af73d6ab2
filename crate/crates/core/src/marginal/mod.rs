//! Marginal chains seen from a saturated node, their stationary laws, and
//! the resulting fluid drifts.

mod chain;
pub mod closed;
mod solve;

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{ArrivalRates, Graph, GraphError};
use crate::policy::{Policy, PolicyError};

pub use chain::{build_marginal, MarginalChain, MarginalKind};
pub use closed::{fluid_node_reports_5cycle, stationary_closed_5cycle, stationary_closed_pendant, FiveCycleNodeDrifts};
pub use solve::{stationary_numeric, stationary_numeric_capped, DEFAULT_MAX_STATES, DEFAULT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarginalError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("node {0} is not in the graph")]
    NodeOutOfRange(usize),
    #[error("no marginal generator for match-the-longest")]
    UnsupportedPolicy,
    #[error("rates outside the region where the closed form applies: {0}")]
    RatesOutsideRegion(String),
    #[error("truncated chain is reducible")]
    Reducible,
    #[error("balance residual {residual:e} above tolerance")]
    NotConverged { residual: f64 },
    #[error("truncated state space exceeds {limit} states")]
    TooManyStates { limit: usize },
    #[error(
        "stationary mass {tail_mass:e} on the truncation boundary (side {limit}); marginal chain looks non-ergodic"
    )]
    HeavyTail { tail_mass: f64, limit: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    ClosedFormPendant,
    ClosedForm5Cycle,
    NumericTruncated,
}

/// Probability vector on a finite list of marginal states.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDist {
    pub states: Vec<Vec<u32>>,
    pub probs: Vec<f64>,
    /// Numeric solves: mass on the truncation boundary. Closed forms: exact
    /// mass of the states beyond the listed support.
    pub tail_mass: f64,
    pub method: Method,
    index: HashMap<Vec<u32>, usize>,
}

impl StationaryDist {
    pub(crate) fn new(states: Vec<Vec<u32>>, probs: Vec<f64>, tail_mass: f64, method: Method) -> Self {
        let index = states.iter().enumerate().map(|(k, s)| (s.clone(), k)).collect();
        StationaryDist { states, probs, tail_mass, method, index }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Probability of `x` (zero off the support).
    pub fn prob(&self, x: &[u32]) -> f64 {
        self.index.get(x).map_or(0.0, |&k| self.probs[k])
    }

    pub fn mass(&self, mut pred: impl FnMut(&[u32]) -> bool) -> f64 {
        self.states.iter().zip(&self.probs).filter(|(x, _)| pred(x)).map(|(_, p)| p).sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rho {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidReport {
    pub i0: usize,
    /// Per neighbor `j` of `i0`: the stationary probability that `j` serves
    /// `i0` (priority), or the expected share `1/(r+1)` of `j`'s arrivals that
    /// go to `i0` (uniform).
    pub guard_probs: Vec<(usize, f64)>,
    pub drift: f64,
    pub rho: Rho,
    pub method: Method,
    pub tail_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidOptions {
    /// Box side; `None` starts at 200 and shrinks until the state space fits.
    pub limit: Option<u32>,
    pub tol: f64,
    pub max_states: usize,
    /// Boundary mass above which the marginal chain is deemed non-ergodic.
    pub max_tail: f64,
}

impl Default for FluidOptions {
    fn default() -> Self {
        FluidOptions { limit: None, tol: DEFAULT_TOL, max_states: DEFAULT_MAX_STATES, max_tail: 1e-6 }
    }
}

/// Drift of `i0` in the fluid limit and the resulting emptying time from
/// level `q0`, using a numeric stationary solve of the marginal chain.
pub fn fluid_report(
    graph: &Graph,
    rates: &ArrivalRates,
    policy: &Policy,
    i0: usize,
    q0: f64,
    opts: &FluidOptions,
) -> Result<FluidReport, MarginalError> {
    let chain = build_marginal(graph, rates, policy, i0)?;
    let (dist, limit) = match opts.limit {
        Some(l) => (stationary_numeric_capped(&chain, l, opts.tol, opts.max_states)?, l),
        None => {
            let mut l = 200;
            loop {
                match stationary_numeric_capped(&chain, l, opts.tol, opts.max_states) {
                    Err(MarginalError::TooManyStates { .. }) if l > 8 => l /= 2,
                    other => break (other?, l),
                }
            }
        }
    };
    if dist.tail_mass > opts.max_tail {
        return Err(MarginalError::HeavyTail { tail_mass: dist.tail_mass, limit });
    }
    Ok(report_from(&chain, &dist, q0))
}

/// Guard probabilities and drift of `chain` under `dist`.
pub fn report_from(chain: &MarginalChain, dist: &StationaryDist, q0: f64) -> FluidReport {
    let mut guard: Vec<(usize, f64)> = chain.guard_nodes().into_iter().map(|j| (j, 0.0)).collect();
    for (x, p) in dist.states.iter().zip(&dist.probs) {
        for (k, (_, w)) in chain.guard_weights(x).into_iter().enumerate() {
            guard[k].1 += p * w;
        }
    }
    let served: f64 = guard.iter().map(|&(j, g)| chain.rate_of(j).unwrap() * g).sum();
    let drift = chain.lambda_i0() - served;
    FluidReport {
        i0: chain.i0,
        guard_probs: guard,
        drift,
        rho: rho(q0, drift),
        method: dist.method,
        tail_mass: dist.tail_mass,
    }
}

/// Time for the fluid queue to empty from `q0` at constant `drift`.
pub fn rho(q0: f64, drift: f64) -> Rho {
    if drift < 0.0 {
        Rho::Finite(q0 / -drift)
    } else {
        Rho::Infinite
    }
}
