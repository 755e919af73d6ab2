//! Simulation-based stability calls.
//!
//! For each node `i`, the system is started with `n` items at `i` and run
//! until that queue empties or the scaled horizon ends, at two or more scales
//! `n` and several seeds. The thresholds below are heuristics: a finite run
//! cannot tell a null-recurrent queue from a slowly transient one.

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{ArrivalRates, Graph};
use crate::policy::{Policy, QueueState};
use crate::simulate::{drift_estimate, hitting_time, simulate, SimConfig, Termination};

use super::{Evidence, StabilityError, StabilityVerdict, Verdict};

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalBudget {
    /// Increasing fluid scales; the largest one carries the decision.
    pub scales: Vec<u64>,
    pub replications: u64,
    /// Scaled time per run.
    pub horizon: f64,
    pub seed: u64,
    pub max_events_per_run: Option<u64>,
}

impl EmpiricalBudget {
    pub fn new(seed: u64) -> Self {
        EmpiricalBudget { scales: vec![1_000, 10_000], replications: 8, horizon: 30.0, seed, max_events_per_run: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeCall {
    Empties,
    Grows,
    Unclear,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleStats {
    pub scale: u64,
    pub runs: u64,
    /// Runs whose queue emptied within the horizon.
    pub hits: u64,
    pub mean_hitting_time: Option<f64>,
    /// Coefficient of variation of the hitting times (all runs hit).
    pub hitting_cv: Option<f64>,
    /// Mean over seeds of the fitted scaled drift and its standard error
    /// across seeds; runs that emptied too early to fit are skipped.
    pub mean_slope: Option<f64>,
    pub slope_se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeEvidence {
    pub node: usize,
    pub call: NodeCall,
    pub scales: Vec<ScaleStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalEvidence {
    pub seed: u64,
    pub horizon: f64,
    pub nodes: Vec<NodeEvidence>,
}

/// Slopes must clear this many standard errors to count as growth.
pub const SLOPE_Z: f64 = 3.0;
/// Hitting times must have at most this coefficient of variation.
pub const MAX_HITTING_CV: f64 = 0.25;
/// Mean hitting times at different scales may differ by this fraction.
pub const SCALE_AGREEMENT: f64 = 0.25;

struct Run {
    hit: Option<f64>,
    slope: Option<f64>,
}

pub fn empirical_classify(
    graph: &Graph,
    rates: &ArrivalRates,
    policy: &Policy,
    budget: &EmpiricalBudget,
) -> Result<StabilityVerdict, StabilityError> {
    let p = graph.node_count();
    let r = budget.replications;
    let ns = budget.scales.len() as u64;
    let jobs: Vec<(usize, usize, u64)> =
        (0..p).flat_map(|i| (0..budget.scales.len()).flat_map(move |s| (0..r).map(move |k| (i, s, k)))).collect();
    let runs: Vec<Run> = jobs
        .par_iter()
        .map(|&(i, s, k)| -> Result<Run, StabilityError> {
            let n = budget.scales[s];
            let mut cfg = SimConfig::new(n, budget.horizon, QueueState::concentrated(p, i, n), budget.seed)
                .replication((i as u64 * ns + s as u64) * r + k)
                .target_samples(rates, 2_000)
                .stop_when_empty(i);
            cfg.max_events = budget.max_events_per_run;
            let tr = simulate(graph, rates, policy, &cfg)?;
            if tr.termination == Termination::EventBudget {
                return Err(StabilityError::BudgetExceeded { node: i + 1 });
            }
            Ok(Run { hit: hitting_time(&tr, i).time(), slope: drift_estimate(&tr, i, None).ok().map(|d| d.slope) })
        })
        .collect::<Result<_, _>>()?;

    let mut nodes = Vec::with_capacity(p);
    for i in 0..p {
        let scales: Vec<ScaleStats> = (0..budget.scales.len())
            .map(|s| {
                let base = (i * budget.scales.len() + s) * r as usize;
                stats(budget.scales[s], &runs[base..base + r as usize])
            })
            .collect();
        nodes.push(NodeEvidence { node: i, call: call(&scales), scales });
    }
    let verdict = if nodes.iter().any(|n| n.call == NodeCall::Grows) {
        Verdict::UnstableEmpirical
    } else if nodes.iter().all(|n| n.call == NodeCall::Empties) {
        Verdict::StableEmpirical
    } else {
        Verdict::Inconclusive
    };
    Ok(StabilityVerdict {
        verdict,
        evidence: Evidence::Empirical(EmpiricalEvidence { seed: budget.seed, horizon: budget.horizon, nodes }),
    })
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = if v.len() > 1 { v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64 } else { 0.0 };
    (m, var.sqrt())
}

fn stats(scale: u64, runs: &[Run]) -> ScaleStats {
    let hits: Vec<f64> = runs.iter().filter_map(|r| r.hit).collect();
    let slopes: Vec<f64> = runs.iter().filter_map(|r| r.slope).collect();
    let all_hit = hits.len() == runs.len();
    let (mh, sh) = if hits.is_empty() { (f64::NAN, f64::NAN) } else { mean_sd(&hits) };
    let (ms, ss) = if slopes.len() >= 2 { mean_sd(&slopes) } else { (f64::NAN, f64::NAN) };
    ScaleStats {
        scale,
        runs: runs.len() as u64,
        hits: hits.len() as u64,
        mean_hitting_time: (!hits.is_empty()).then_some(mh),
        hitting_cv: (all_hit && mh > 0.0).then(|| sh / mh),
        mean_slope: ms.is_finite().then_some(ms),
        slope_se: ss.is_finite().then(|| ss / (slopes.len() as f64).sqrt()),
    }
}

fn call(scales: &[ScaleStats]) -> NodeCall {
    let top = scales.last().expect("at least one scale");
    let grows = top.hits == 0
        && matches!((top.mean_slope, top.slope_se), (Some(m), Some(se)) if m > SLOPE_Z * se && m > 0.0)
        && scales.iter().all(|s| s.mean_slope.is_some_and(|m| m > 0.0));
    if grows {
        return NodeCall::Grows;
    }
    let concentrated = scales.iter().all(|s| s.hits == s.runs && s.hitting_cv.is_some_and(|cv| cv <= MAX_HITTING_CV));
    let agree = scales.iter().all(|s| {
        let (a, b) = (s.mean_hitting_time.unwrap_or(f64::NAN), top.mean_hitting_time.unwrap_or(f64::NAN));
        (a - b).abs() <= SCALE_AGREEMENT * b.max(1e-12)
    });
    if concentrated && agree {
        NodeCall::Empties
    } else {
        NodeCall::Unclear
    }
}
