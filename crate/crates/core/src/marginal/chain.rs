use crate::graph::{ArrivalRates, Graph};
use crate::policy::Policy;

use super::MarginalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalKind {
    Priority,
    Uniform,
}

// One neighbor class `j` that can serve a coordinate (or, for the drift,
// node i0). Masks are over coordinate indices.
#[derive(Debug, Clone, PartialEq)]
struct Server {
    rate: f64,
    // Priority: coordinates that must be empty. Uniform: coordinates whose
    // positive queues compete for `j`'s arrivals.
    mask: u64,
    // Uniform only: `j` also sees the saturated queue at i0.
    shares_with_i0: bool,
}

impl Server {
    #[inline]
    fn rate_at(&self, kind: MarginalKind, positive: u64) -> f64 {
        match kind {
            MarginalKind::Priority => {
                if positive & self.mask == 0 {
                    self.rate
                } else {
                    0.0
                }
            }
            MarginalKind::Uniform => {
                let r = (positive & self.mask).count_ones() + self.shares_with_i0 as u32;
                if r == 0 {
                    0.0
                } else {
                    self.rate / r as f64
                }
            }
        }
    }
}

/// The process of the queues far from `i0` while `i0` is saturated.
///
/// Coordinates are the nodes of `S = V \ ({i0} ∪ E(i0))` in increasing order.
/// Node `i0` never empties, so its neighbors stay empty, and an arrival at one
/// of them is matched with `i0` whenever the policy would pick it.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalChain {
    pub i0: usize,
    pub kind: MarginalKind,
    /// Graph nodes behind each coordinate.
    pub coords: Vec<usize>,
    lambda_i0: f64,
    up: Vec<f64>,
    // Coordinates adjacent to each coordinate.
    blockers: Vec<u64>,
    down: Vec<Vec<Server>>,
    // Neighbors of i0, with the guard that lets them match i0.
    guards: Vec<(usize, Server)>,
}

impl MarginalChain {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn lambda_i0(&self) -> f64 {
        self.lambda_i0
    }

    #[inline]
    pub(crate) fn positive_mask(x: &[u32]) -> u64 {
        x.iter().enumerate().fold(0, |m, (k, &v)| if v > 0 { m | (1 << k) } else { m })
    }

    /// Rate of `x -> x + e_l`.
    pub fn up_rate(&self, x: &[u32], l: usize) -> f64 {
        if Self::positive_mask(x) & self.blockers[l] == 0 {
            self.up[l]
        } else {
            0.0
        }
    }

    /// Rate of `x -> x - e_l`.
    pub fn down_rate(&self, x: &[u32], l: usize) -> f64 {
        if x[l] == 0 {
            return 0.0;
        }
        let pos = Self::positive_mask(x);
        self.down[l].iter().map(|s| s.rate_at(self.kind, pos)).sum()
    }

    /// Neighbors `j` of `i0` with the rate at which `j`'s arrivals are matched
    /// with `i0` in state `x` (`λ_j` times the guard indicator or share).
    pub fn i0_service(&self, x: &[u32]) -> Vec<(usize, f64)> {
        let pos = Self::positive_mask(x);
        self.guards.iter().map(|(j, s)| (*j, s.rate_at(self.kind, pos))).collect()
    }

    /// The per-`j` guard weights: for priority, the indicator that every
    /// coordinate `j` prefers over `i0` is empty; for uniform, `1/(r + 1)`
    /// with `r` the number of positive coordinates adjacent to `j`.
    pub fn guard_weights(&self, x: &[u32]) -> Vec<(usize, f64)> {
        let pos = Self::positive_mask(x);
        self.guards.iter().map(|(j, s)| (*j, s.rate_at(self.kind, pos) / s.rate)).collect()
    }

    pub fn rate_of(&self, j: usize) -> Option<f64> {
        self.guards.iter().find(|(k, _)| *k == j).map(|(_, s)| s.rate)
    }

    pub fn guard_nodes(&self) -> Vec<usize> {
        self.guards.iter().map(|(j, _)| *j).collect()
    }
}

pub fn build_marginal(
    graph: &Graph,
    rates: &ArrivalRates,
    policy: &Policy,
    i0: usize,
) -> Result<MarginalChain, MarginalError> {
    rates.check_len(graph)?;
    policy.validate(graph)?;
    if i0 >= graph.node_count() {
        return Err(MarginalError::NodeOutOfRange(i0 + 1));
    }
    let kind = match policy {
        Policy::Priority(_) => MarginalKind::Priority,
        Policy::Uniform => MarginalKind::Uniform,
        Policy::MatchLongest => return Err(MarginalError::UnsupportedPolicy),
    };
    let near = graph.neighbors(i0).with(i0);
    let coords: Vec<usize> = (graph.all_nodes() - near).to_vec();
    let coord_of = |v: usize| coords.iter().position(|&c| c == v);
    let to_mask = |nodes: crate::graph::NodeSet| nodes.iter().filter_map(coord_of).fold(0u64, |m, k| m | (1 << k));
    let lam = rates.as_slice();

    let server = |j: usize, target: usize| -> Option<Server> {
        match policy {
            Policy::Priority(t) => {
                let ahead = t.preferred_over(j, target);
                // If j would rather serve i0, the saturated queue absorbs it.
                (target == i0 || !ahead.contains(i0)).then(|| Server {
                    rate: lam[j],
                    mask: to_mask(ahead),
                    shares_with_i0: false,
                })
            }
            _ => {
                Some(Server { rate: lam[j], mask: to_mask(graph.neighbors(j)), shares_with_i0: graph.has_edge(j, i0) })
            }
        }
    };

    let up = coords.iter().map(|&v| lam[v]).collect();
    let blockers = coords.iter().map(|&v| to_mask(graph.neighbors(v))).collect();
    let down = coords.iter().map(|&v| graph.neighbors(v).iter().filter_map(|j| server(j, v)).collect()).collect();
    let guards = graph
        .neighbors(i0)
        .iter()
        .map(|j| {
            let mut s = server(j, i0).expect("i0 always eligible");
            if kind == MarginalKind::Uniform {
                s.shares_with_i0 = true;
            }
            (j, s)
        })
        .collect();
    Ok(MarginalChain { i0, kind, coords, lambda_i0: lam[i0], up, blockers, down, guards })
}
