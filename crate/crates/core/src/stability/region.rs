use crate::graph::{ArrivalRates, Graph};
use crate::marginal::closed::{fivecycle_a, fluid_node_reports_5cycle};
use crate::marginal::stationary_closed_5cycle;
use crate::marginal::stationary_closed_pendant;

use super::{ncond_inequalities, Inequality, StabilityError, StabilityVerdict};

/// Exact region of the pendant under the priority policy in which node 3
/// serves nodes 1 and 2 before node 4.
pub fn pendant_region(lam: &[f64]) -> Result<StabilityVerdict, StabilityError> {
    let graph = Graph::pendant();
    let rates = ArrivalRates::for_graph(lam.to_vec(), &graph)?;
    let mut checks = ncond_inequalities(&graph, &rates)?;
    if let Ok((alpha, _)) = stationary_closed_pendant(lam, 0) {
        checks.push(Inequality::new("node 4: λ4 < α·λ3", lam[3], alpha * lam[2]));
    }
    Ok(StabilityVerdict::exact(checks))
}

/// Exact region of the 5-cycle under the priorities
/// 1:[2,3] 2:[1,4] 3:[1,5] 4:[2,5] 5:[4,3].
pub fn fivecycle_region(lam: &[f64]) -> Result<StabilityVerdict, StabilityError> {
    let graph = Graph::five_cycle();
    let rates = ArrivalRates::for_graph(lam.to_vec(), &graph)?;
    let mut checks = ncond_inequalities(&graph, &rates)?;
    if checks.iter().all(Inequality::holds) {
        let (alpha, _) = stationary_closed_5cycle(lam, 0)?;
        let nodes = fluid_node_reports_5cycle(lam)?;
        checks.push(Inequality::new("node 5: λ5 < a·α̃", lam[4], fivecycle_a(lam) * alpha));
        checks.push(Inequality::new("node 3: λ3 < c·α(2,4)", lam[2], nodes.c * nodes.alpha_24));
        checks.push(Inequality::new("node 4: λ4 < λ2·α(1,3) + λ5", lam[3], lam[1] * nodes.alpha_13 + lam[4]));
    }
    Ok(StabilityVerdict::exact(checks))
}
