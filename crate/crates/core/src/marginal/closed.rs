//! Closed forms for the pendant and the 5-cycle.
//!
//! Rates are indexed by 0-based node; `lam[k]` is the rate of label `k+1` of
//! [`Graph::pendant`] or [`Graph::five_cycle`]. In both analyzed models the
//! marginal chain of the unstable node lives on two half-lines glued at the
//! origin, so its stationary law is a pair of geometric arms.

use crate::graph::{ncond_check, ArrivalRates, Graph, Ncond, DEFAULT_ENUMERATION_CAP};

use super::{MarginalError, Method, StationaryDist};

fn check_len(lam: &[f64], n: usize) -> Result<(), MarginalError> {
    if lam.len() != n || lam.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
        return Err(MarginalError::RatesOutsideRegion(format!("need {n} positive finite rates")));
    }
    Ok(())
}

fn ratio(up: f64, down: f64, what: &str) -> Result<f64, MarginalError> {
    let r = up / down;
    if r < 1.0 {
        Ok(r)
    } else {
        Err(MarginalError::RatesOutsideRegion(format!("{what}: arm ratio {r} is not below 1")))
    }
}

/// Chain on `{(i, 0)} ∪ {(0, j)}` with arm ratios `r1`, `r2`; returns the
/// mass at the origin and the law truncated to `i, j ≤ support`.
fn two_arms(r1: f64, r2: f64, support: u32, method: Method) -> (f64, StationaryDist) {
    let alpha = 1.0 / (1.0 + r1 / (1.0 - r1) + r2 / (1.0 - r2));
    let mut states = vec![vec![0, 0]];
    let mut probs = vec![alpha];
    for (axis, r) in [(0usize, r1), (1, r2)] {
        let mut p = alpha;
        for k in 1..=support {
            p *= r;
            let mut x = vec![0, 0];
            x[axis] = k;
            states.push(x);
            probs.push(p);
        }
    }
    let s = support as i32 + 1;
    let tail = alpha * (r1.powi(s) / (1.0 - r1) + r2.powi(s) / (1.0 - r2));
    (alpha, StationaryDist::new(states, probs, tail, method))
}

/// Pendant, priority of node 3 for nodes 1 and 2 over node 4, seen from a
/// saturated node 4.
pub fn stationary_closed_pendant(lam: &[f64], support: u32) -> Result<(f64, StationaryDist), MarginalError> {
    check_len(lam, 4)?;
    let r1 = ratio(lam[0], lam[2] + lam[1], "node 1")?;
    let r2 = ratio(lam[1], lam[2] + lam[0], "node 2")?;
    Ok(two_arms(r1, r2, support, Method::ClosedFormPendant))
}

/// `α` of the pendant written as a sum.
pub fn pendant_alpha(lam: &[f64]) -> f64 {
    1.0 / (1.0 + lam[0] / (lam[2] + lam[1] - lam[0]) + lam[1] / (lam[2] + lam[0] - lam[1]))
}

/// `α` of the pendant written as a single fraction.
pub fn pendant_alpha_factored(lam: &[f64]) -> f64 {
    (lam[2].powi(2) - (lam[0] - lam[1]).powi(2)) / (lam[2] * (lam[2] + lam[0] + lam[1]))
}

/// Fluid drift of node 4 in the pendant priority model.
pub fn pendant_drift(lam: &[f64]) -> Result<f64, MarginalError> {
    let (alpha, _) = stationary_closed_pendant(lam, 0)?;
    Ok(lam[3] - alpha * lam[2])
}

/// Fluid drift of node 4 in the pendant under the uniform policy: node 3
/// splits its arrivals between node 4 and a non-empty node 1 or 2, which acts
/// on the arms like halving `λ_3`.
pub fn pendant_uniform_drift(lam: &[f64]) -> Result<f64, MarginalError> {
    check_len(lam, 4)?;
    let halved = [lam[0], lam[1], lam[2] / 2.0, lam[3]];
    let (alpha, _) = stationary_closed_pendant(&halved, 0)?;
    Ok(lam[3] - lam[2] / 2.0 * (1.0 + alpha))
}

/// 5-cycle with the priorities 1:[2,3] 2:[1,4] 3:[1,5] 4:[2,5] 5:[4,3], seen
/// from a saturated node 5.
pub fn stationary_closed_5cycle(lam: &[f64], support: u32) -> Result<(f64, StationaryDist), MarginalError> {
    check_len(lam, 5)?;
    let r1 = ratio(lam[0], lam[2] + lam[1], "node 1")?;
    let r2 = ratio(lam[1], lam[0] + lam[3], "node 2")?;
    Ok(two_arms(r1, r2, support, Method::ClosedForm5Cycle))
}

/// Coefficient `a` with node-5 drift `λ_5 - a α̃`.
pub fn fivecycle_a(lam: &[f64]) -> f64 {
    lam[2] * (lam[0] + lam[3]) / (lam[0] + lam[3] - lam[1]) + lam[3] * (lam[1] + lam[2]) / (lam[1] + lam[2] - lam[0])
}

pub fn fivecycle_drift(lam: &[f64]) -> Result<f64, MarginalError> {
    let (alpha, _) = stationary_closed_5cycle(lam, 0)?;
    Ok(lam[4] - fivecycle_a(lam) * alpha)
}

/// Node-5 drift of the 5-cycle under the uniform policy. Nodes 3 and 4 split
/// their arrivals with node 5 whenever nodes 1, resp. 2, are non-empty.
pub fn fivecycle_uniform_drift(lam: &[f64]) -> Result<f64, MarginalError> {
    check_len(lam, 5)?;
    let halved = [lam[0], lam[1], lam[2] / 2.0, lam[3] / 2.0, lam[4]];
    let (alpha, _) = stationary_closed_5cycle(&halved, 0)?;
    let r1 = halved[0] / (halved[2] + halved[1]);
    let r2 = halved[1] / (halved[0] + halved[3]);
    let x1_empty = alpha / (1.0 - r2);
    let x2_empty = alpha / (1.0 - r1);
    Ok(lam[4] - lam[2] / 2.0 * (1.0 + x1_empty) - lam[3] / 2.0 * (1.0 + x2_empty))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveCycleNodeDrifts {
    pub alpha_24: f64,
    pub c: f64,
    /// `λ_3 - c α_(2,4)`.
    pub node3_drift: f64,
    /// P(Q_1 = 0) while node 4 is saturated. Queue 1 is drained by nodes 2
    /// and 3, and queue 3 only fills while queue 1 is empty, so the mass at
    /// `Q_1 = 0` is `(λ_2 + λ_3 - λ_1) / λ_2`, capped at 1.
    pub alpha_13: f64,
    /// `λ_4 - λ_5 - λ_2 α_(1,3)`.
    pub node4_drift: f64,
}

/// Drifts of nodes 3 and 4 in the 5-cycle priority model.
pub fn fluid_node_reports_5cycle(lam: &[f64]) -> Result<FiveCycleNodeDrifts, MarginalError> {
    check_len(lam, 5)?;
    let rates = ArrivalRates::new(lam.to_vec())?;
    if let Ncond::Violated { witness, .. } = ncond_check(&Graph::five_cycle(), &rates, DEFAULT_ENUMERATION_CAP)? {
        return Err(MarginalError::RatesOutsideRegion(format!("stability condition fails at {witness}")));
    }
    let [l1, l2, l3, l4, l5] = [lam[0], lam[1], lam[2], lam[3], lam[4]];
    let alpha_24 = 1.0 / (1.0 + l2 / (l1 + l4 - l2) + l4 / (l5 + l2 - l4));
    let c = l5 * (l1 + l4) / (l1 + l4 - l2) + l1 * (l5 + l2) / (l5 + l2 - l4);
    let alpha_13 = (1.0 - (l1 - l3) / l2).min(1.0);
    Ok(FiveCycleNodeDrifts {
        alpha_24,
        c,
        node3_drift: l3 - c * alpha_24,
        alpha_13,
        node4_drift: l4 - l5 - l2 * alpha_13,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PENDANT: [f64; 4] = [0.1, 0.1, 0.45, 0.35];
    const FIVE: [f64; 5] = [0.1, 0.1, 0.225, 0.225, 0.35];

    #[test]
    fn pendant_alpha_value() {
        let (alpha, dist) = stationary_closed_pendant(&PENDANT, 200).unwrap();
        assert!((alpha - 9.0 / 13.0).abs() < 1e-15);
        assert!((pendant_alpha_factored(&PENDANT) - alpha).abs() < 1e-15);
        assert!((dist.total() + dist.tail_mass - 1.0).abs() < 1e-14);
        assert!((pendant_drift(&PENDANT).unwrap() - 0.5 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn pendant_symmetric_rates() {
        let lam = [0.2, 0.2, 0.5, 0.1];
        let (alpha, _) = stationary_closed_pendant(&lam, 0).unwrap();
        assert!((alpha - 0.5 / 0.9).abs() < 1e-15);
    }

    #[test]
    fn pendant_arms_balance() {
        let lam = [0.13, 0.07, 0.41, 0.2];
        let (_, d) = stationary_closed_pendant(&lam, 50).unwrap();
        for i in 0..50 {
            let lhs = d.prob(&[i, 0]) * lam[0];
            let rhs = d.prob(&[i + 1, 0]) * (lam[2] + lam[1]);
            assert!((lhs - rhs).abs() < 1e-16);
        }
    }

    #[test]
    fn pendant_outside_region() {
        assert!(matches!(
            stationary_closed_pendant(&[0.5, 0.1, 0.3, 0.1], 10),
            Err(MarginalError::RatesOutsideRegion(_))
        ));
    }

    #[test]
    fn five_cycle_values() {
        let (alpha, d) = stationary_closed_5cycle(&FIVE, 200).unwrap();
        assert!((alpha - 9.0 / 17.0).abs() < 1e-15);
        assert!((fivecycle_a(&FIVE) - 0.65).abs() < 1e-15);
        assert!((fivecycle_drift(&FIVE).unwrap() - 0.1 / 17.0).abs() < 1e-15);
        assert!((d.total() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn uniform_drifts() {
        // ε = 0.2 members of the two uniform families
        assert!((pendant_uniform_drift(&[0.2, 0.2, 0.4, 0.35]).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!((fivecycle_uniform_drift(&[0.2, 0.2, 0.2, 0.2, 0.35]).unwrap() - 0.03).abs() < 1e-15);
    }

    #[test]
    fn node_drifts_limits() {
        // a small λ1 keeps {2,5} and {3,4} both inside the condition
        let d = fluid_node_reports_5cycle(&[0.01, 0.15, 0.25, 0.2, 0.3]).unwrap();
        assert_eq!(d.alpha_13, 1.0);
        assert!(d.node4_drift < 0.0);
        // λ3 < λ1: part of node 2's service is lost to an empty queue 1
        let d = fluid_node_reports_5cycle(&[0.2, 0.3, 0.1, 0.2, 0.15]).unwrap();
        assert!((d.alpha_13 - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.node4_drift - (0.2 + 0.2 - 0.3 - 0.1 - 0.15)).abs() < 1e-15);
        let d = fluid_node_reports_5cycle(&[0.2, 0.2, 0.3, 0.1, 0.3]).unwrap();
        assert!(d.node4_drift < 0.0);
    }
}
