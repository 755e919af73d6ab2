use serde::Serialize;

use crate::graph::{
    classify, ncond_check, ncond_slack, ArrivalRates, Graph, GraphClass, GraphError, Ncond, NodeSet, Witness,
    DEFAULT_ENUMERATION_CAP,
};
use crate::marginal::closed::{fivecycle_drift, fivecycle_uniform_drift, pendant_drift, pendant_uniform_drift};
use crate::marginal::{fluid_report, FluidOptions};
use crate::policy::{Policy, PriorityTable};

use super::StabilityError;

/// One-parameter families of rates that satisfy the stability condition yet
/// make a fixed policy unstable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    PendantPriority,
    FiveCyclePriority,
    PendantUniform,
    FiveCycleUniform,
}

impl Family {
    pub const ALL: [Family; 4] =
        [Family::PendantPriority, Family::FiveCyclePriority, Family::PendantUniform, Family::FiveCycleUniform];

    /// Right end of the admissible `ε` interval `(0, max]`.
    pub fn max_epsilon(self) -> f64 {
        match self {
            Family::PendantPriority => 2.0 / 5.0,
            Family::FiveCyclePriority => 2.0 / 9.0,
            Family::PendantUniform => 7.0 / 15.0,
            Family::FiveCycleUniform => 7.0 / 23.0,
        }
    }

    pub fn default_epsilon(self) -> f64 {
        self.max_epsilon() / 2.0
    }

    pub fn graph(self) -> Graph {
        match self {
            Family::PendantPriority | Family::PendantUniform => Graph::pendant(),
            Family::FiveCyclePriority | Family::FiveCycleUniform => Graph::five_cycle(),
        }
    }

    pub fn rates(self, eps: f64) -> Vec<f64> {
        match self {
            Family::PendantPriority => vec![eps / 2.0, eps / 2.0, 0.5 - eps / 4.0, 0.5 - 3.0 * eps / 4.0],
            Family::FiveCyclePriority => {
                let mid = 0.25 - eps / 8.0;
                vec![eps / 2.0, eps / 2.0, mid, mid, 0.5 - 3.0 * eps / 4.0]
            }
            Family::PendantUniform => vec![eps, eps, 0.5 - eps / 2.0, 0.5 - 3.0 * eps / 4.0],
            Family::FiveCycleUniform => {
                let mid = 0.25 - eps / 4.0;
                vec![eps, eps, mid, mid, 0.5 - 3.0 * eps / 4.0]
            }
        }
    }

    pub fn policy(self) -> Policy {
        let g = self.graph();
        let order = match self {
            // node 3 serves 1 and 2 before 4
            Family::PendantPriority => vec![vec![1, 2], vec![0, 2], vec![0, 1, 3], vec![2]],
            Family::FiveCyclePriority => vec![vec![1, 2], vec![0, 3], vec![0, 4], vec![1, 4], vec![3, 2]],
            Family::PendantUniform | Family::FiveCycleUniform => return Policy::Uniform,
        };
        Policy::Priority(PriorityTable::new(&g, order).expect("static orders"))
    }

    /// The node whose queue grows.
    pub fn unstable_node(self) -> usize {
        match self {
            Family::PendantPriority | Family::PendantUniform => 3,
            Family::FiveCyclePriority | Family::FiveCycleUniform => 4,
        }
    }

    /// Fluid drift of the unstable node from the closed-form marginal law.
    pub fn drift(self, lam: &[f64]) -> Result<f64, StabilityError> {
        Ok(match self {
            Family::PendantPriority => pendant_drift(lam)?,
            Family::FiveCyclePriority => fivecycle_drift(lam)?,
            Family::PendantUniform => pendant_uniform_drift(lam)?,
            Family::FiveCycleUniform => fivecycle_uniform_drift(lam)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Family {
        family: Family,
        epsilon: f64,
    },
    /// An unstable family member embedded as an induced subgraph, with a small
    /// total rate `hat_total` spread over the remaining nodes.
    Embedded {
        family: Family,
        epsilon: f64,
        /// `embedding[k]` is the node playing label `k+1` of the family graph.
        embedding: Vec<usize>,
        tau: f64,
        beta: f64,
        gamma: f64,
        hat_total: f64,
        /// `beta - hat_total`: the drift of the unstable node stays above this.
        residual_drift: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnstableInstance {
    pub graph: Graph,
    pub rates: ArrivalRates,
    pub policy: Policy,
    pub unstable_node: usize,
    /// Fluid drift of the unstable node in the family model.
    pub predicted_drift: f64,
    pub provenance: Provenance,
}

// Drift magnitudes below this are treated as zero.
const DEGENERATE: f64 = 1e-12;

pub fn counterexample(family: Family, eps: f64) -> Result<UnstableInstance, StabilityError> {
    let max = family.max_epsilon();
    // The closed upper end is kept exact despite rounding in `max`.
    if !(eps > 0.0 && eps <= max * (1.0 + 1e-15)) {
        return Err(StabilityError::EpsilonOutOfRange { family, eps, max });
    }
    let lam = family.rates(eps);
    let beta = family.drift(&lam)?;
    if beta <= DEGENERATE {
        return Err(StabilityError::BoundaryDegenerate { family, eps });
    }
    let graph = family.graph();
    let rates = ArrivalRates::for_graph(lam, &graph)?;
    if let Ncond::Violated { witness, .. } = ncond_check(&graph, &rates, DEFAULT_ENUMERATION_CAP)? {
        return Err(StabilityError::NcondFails(witness));
    }
    Ok(UnstableInstance {
        graph,
        rates,
        policy: family.policy(),
        unstable_node: family.unstable_node(),
        predicted_drift: beta,
        provenance: Provenance::Family { family, epsilon: eps },
    })
}

/// [`construct_nonmaximal_with`] at each family's default `ε`.
pub fn construct_nonmaximal(graph: &Graph) -> Result<UnstableInstance, StabilityError> {
    construct_nonmaximal_with(graph, None)
}

/// Builds rates in the stability region of `graph` and a priority policy
/// under which one queue drifts to infinity.
///
/// An induced pendant or 5-cycle gets the rates and priorities of the
/// corresponding unstable family; every other node gets an equal share of a
/// total rate just below `γ = min(τ, β) / 2`, where `τ` is the stability
/// slack of the family rates on the induced subgraph and `β` the family drift.
/// Orders at the embedded nodes list embedded neighbors in family order,
/// then the other neighbors by index; the remaining orders are by index.
pub fn construct_nonmaximal_with(graph: &Graph, eps: Option<f64>) -> Result<UnstableInstance, StabilityError> {
    let witness = match classify(graph) {
        Ok(GraphClass::NonSeparableWithWitness(w)) => w,
        Ok(GraphClass::Bipartite { .. }) => return Err(StabilityError::NotApplicable("graph is bipartite".into())),
        Ok(GraphClass::Separable { .. }) => return Err(StabilityError::NotApplicable("graph is separable".into())),
        Ok(GraphClass::NonSeparableOddCycle { .. }) => {
            return Err(StabilityError::NotApplicable(
                "no induced pendant or 5-cycle; only long induced odd cycles".into(),
            ))
        }
        Err(GraphError::NotConnected) => return Err(StabilityError::NotApplicable("graph is not connected".into())),
        Err(e) => return Err(e.into()),
    };
    let family = match witness {
        Witness::Pendant(_) => Family::PendantPriority,
        Witness::FiveCycle(_) => Family::FiveCyclePriority,
    };
    let eps = eps.unwrap_or(family.default_epsilon());
    let base = counterexample(family, eps)?;
    let emb = witness.nodes().to_vec();
    let small = family.graph();

    let tau = ncond_slack(&small, &base.rates, DEFAULT_ENUMERATION_CAP)?;
    let beta =
        fluid_report(&small, &base.rates, &base.policy, base.unstable_node, 1.0, &FluidOptions::default())?.drift;
    let gamma = 0.5 * tau.min(beta);

    let p = graph.node_count();
    let embedded: NodeSet = emb.iter().copied().collect();
    let hat = graph.all_nodes() - embedded;
    let hat_total = if hat.is_empty() { 0.0 } else { gamma * (1.0 - 1e-6) };
    let mut lam = vec![0.0; p];
    for (k, &v) in emb.iter().enumerate() {
        lam[v] = base.rates[k];
    }
    for v in hat.iter() {
        lam[v] = hat_total / hat.len() as f64;
    }
    let rates = ArrivalRates::for_graph(lam, graph)?;

    let Policy::Priority(small_table) = &base.policy else { unreachable!("priority families only") };
    let mut order = PriorityTable::lexicographic(graph).orders().to_vec();
    for (k, &v) in emb.iter().enumerate() {
        let mut o: Vec<usize> = small_table.order(k).iter().map(|&l| emb[l]).collect();
        o.extend((graph.neighbors(v) & hat).iter());
        order[v] = o;
    }
    let policy = Policy::Priority(PriorityTable::new(graph, order)?);

    if let Ncond::Violated { witness, .. } = ncond_check(graph, &rates, DEFAULT_ENUMERATION_CAP)? {
        return Err(StabilityError::NcondFails(witness));
    }
    Ok(UnstableInstance {
        graph: graph.clone(),
        rates,
        policy,
        unstable_node: emb[family.unstable_node()],
        predicted_drift: beta,
        provenance: Provenance::Embedded {
            family,
            epsilon: eps,
            embedding: emb,
            tau,
            beta,
            gamma,
            hat_total,
            residual_drift: beta - hat_total,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_drifts_match_their_closed_expressions() {
        for k in 1..40 {
            let t = k as f64 / 40.0;
            let e = t * Family::PendantPriority.max_epsilon();
            let want = (e / 4.0) * (1.0 - 2.5 * e) / (0.5 + 0.75 * e);
            let got = Family::PendantPriority.drift(&Family::PendantPriority.rates(e)).unwrap();
            assert!((got - want).abs() < 1e-14, "{e}");

            let e = t * Family::FiveCyclePriority.max_epsilon();
            let want = (e / 8.0) * (1.0 - 4.5 * e) / (0.25 + 0.875 * e);
            let got = Family::FiveCyclePriority.drift(&Family::FiveCyclePriority.rates(e)).unwrap();
            assert!((got - want).abs() < 1e-14, "{e}");

            let e = t * Family::PendantUniform.max_epsilon();
            let want = e * (7.0 - 15.0 * e) / (4.0 * (1.0 + 7.0 * e));
            let got = Family::PendantUniform.drift(&Family::PendantUniform.rates(e)).unwrap();
            assert!((got - want).abs() < 1e-14, "{e}");

            let e = t * Family::FiveCycleUniform.max_epsilon();
            let want = e * (7.0 - 23.0 * e) / (4.0 * (1.0 + 15.0 * e));
            let got = Family::FiveCycleUniform.drift(&Family::FiveCycleUniform.rates(e)).unwrap();
            assert!((got - want).abs() < 1e-14, "{e}");
        }
    }

    #[test]
    fn epsilon_range_and_boundary() {
        for f in Family::ALL {
            assert!(matches!(counterexample(f, 0.0), Err(StabilityError::EpsilonOutOfRange { .. })));
            assert!(matches!(counterexample(f, f.max_epsilon() * 1.01), Err(StabilityError::EpsilonOutOfRange { .. })));
            assert!(matches!(counterexample(f, f.max_epsilon()), Err(StabilityError::BoundaryDegenerate { .. })));
        }
    }

    fn close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-15, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn default_members() {
        let i = counterexample(Family::PendantPriority, 0.2).unwrap();
        close(i.rates.as_slice(), &[0.1, 0.1, 0.45, 0.35]);
        assert!((i.predicted_drift - 0.0384615).abs() < 1e-7);
        let i = counterexample(Family::FiveCycleUniform, 0.2).unwrap();
        close(i.rates.as_slice(), &[0.2, 0.2, 0.2, 0.2, 0.35]);
        assert!((i.predicted_drift - 0.03).abs() < 1e-12);
    }

    #[test]
    fn pendant_reduces_to_family() {
        let i = construct_nonmaximal(&Graph::pendant()).unwrap();
        let f = counterexample(Family::PendantPriority, 0.2).unwrap();
        assert_eq!(i.rates, f.rates);
        assert_eq!(i.policy, f.policy);
        assert_eq!(i.unstable_node, 3);
    }

    #[test]
    fn separable_not_applicable() {
        assert!(matches!(construct_nonmaximal(&Graph::complete(4)), Err(StabilityError::NotApplicable(_))));
    }
}
