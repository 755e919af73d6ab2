//! Event-driven simulation of the matching queue, with fluid scaling.
//!
//! Arrivals are generated by a single exponential clock of rate `λ̄` whose
//! marks are drawn with probabilities `λ_i / λ̄`. Each event consumes the
//! random stream in the same order: inter-arrival time, class, then whatever
//! the policy needs to break ties.

mod coupling;
mod trace;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

use crate::graph::{ArrivalRates, Graph, GraphError};
use crate::policy::{apply_in_place, Policy, PolicyError, QueueState};
use crate::rng::stream;

pub use coupling::{coupled_nonchaotic, coupled_nonexpansive, CouplingConfig, NonChaosReport, NonExpansionReport};
pub use trace::{drift_estimate, hitting_time, DriftEstimate, HittingTime, SimTrace, Termination};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("only {got} trace samples in the drift window, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },
}

/// One simulation run. Times in `horizon` are in fluid (scaled) units: the
/// run covers real time `scale * horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scale: u64,
    pub horizon: f64,
    pub initial_state: QueueState,
    pub seed: u64,
    /// Index of the independent sub-stream under `seed`.
    pub replication: u64,
    /// Record every `trace_stride`-th event (the last event is always kept).
    pub trace_stride: u64,
    /// End the run as soon as this node's queue is empty.
    pub stop_when_empty: Option<usize>,
    pub max_events: Option<u64>,
}

impl SimConfig {
    pub fn new(scale: u64, horizon: f64, initial_state: QueueState, seed: u64) -> Self {
        SimConfig {
            scale,
            horizon,
            initial_state,
            seed,
            replication: 0,
            trace_stride: 1,
            stop_when_empty: None,
            max_events: None,
        }
    }

    pub fn replication(mut self, r: u64) -> Self {
        self.replication = r;
        self
    }

    pub fn stride(mut self, k: u64) -> Self {
        self.trace_stride = k;
        self
    }

    /// Picks a stride giving roughly `samples` trace points over the horizon.
    pub fn target_samples(mut self, rates: &ArrivalRates, samples: u64) -> Self {
        let expected = rates.total() * self.scale as f64 * self.horizon;
        self.trace_stride = ((expected / samples as f64) as u64).max(1);
        self
    }

    pub fn stop_when_empty(mut self, node: usize) -> Self {
        self.stop_when_empty = Some(node);
        self
    }

    pub fn max_events(mut self, m: u64) -> Self {
        self.max_events = Some(m);
        self
    }
}

/// What happened at one arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    /// Real (unscaled) time.
    pub time: f64,
    pub class: usize,
    pub matched: Option<usize>,
}

/// Superposed Poisson input: exponential gaps of rate `λ̄`, categorical marks.
#[derive(Debug, Clone)]
pub struct ArrivalStream {
    gap: Exp<f64>,
    class: WeightedIndex<f64>,
}

impl ArrivalStream {
    pub fn new(rates: &ArrivalRates) -> Self {
        ArrivalStream {
            gap: Exp::new(rates.total()).expect("positive total rate"),
            class: WeightedIndex::new(rates.as_slice()).expect("validated rates"),
        }
    }

    /// Inter-arrival time and class of the next item.
    #[inline]
    pub fn next<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, usize) {
        let dt = self.gap.sample(rng);
        let c = self.class.sample(rng);
        (dt, c)
    }
}

pub(crate) fn validate_model(graph: &Graph, rates: &ArrivalRates, policy: &Policy) -> Result<(), SimError> {
    if graph.node_count() < 2 || !graph.is_connected() {
        return Err(GraphError::NotConnected.into());
    }
    rates.check_len(graph)?;
    policy.validate(graph)?;
    Ok(())
}

pub fn simulate(
    graph: &Graph,
    rates: &ArrivalRates,
    policy: &Policy,
    config: &SimConfig,
) -> Result<SimTrace, SimError> {
    simulate_observed(graph, rates, policy, config, |_, _| {})
}

/// [`simulate`] with a callback invoked after every event with the new state.
pub fn simulate_observed(
    graph: &Graph,
    rates: &ArrivalRates,
    policy: &Policy,
    config: &SimConfig,
    mut observe: impl FnMut(&Event, &[u64]),
) -> Result<SimTrace, SimError> {
    validate_model(graph, rates, policy)?;
    config.initial_state.check(graph)?;
    if config.scale == 0 {
        return Err(SimError::Config("scale must be at least 1".into()));
    }
    if !(config.horizon.is_finite() && config.horizon > 0.0) {
        return Err(SimError::Config("horizon must be positive and finite".into()));
    }
    if config.trace_stride == 0 {
        return Err(SimError::Config("trace stride must be at least 1".into()));
    }
    if let Some(i) = config.stop_when_empty {
        if i >= graph.node_count() {
            return Err(PolicyError::NodeOutOfRange(i + 1).into());
        }
    }

    let p = graph.node_count();
    let mut rng = stream(config.seed, config.replication);
    let input = ArrivalStream::new(rates);
    let end = config.horizon * config.scale as f64;
    let mut q = config.initial_state.0.clone();
    let mut trace = SimTrace::start(config, p);

    let stop_now = |q: &[u64]| config.stop_when_empty.is_some_and(|i| q[i] == 0);
    if stop_now(&q) {
        trace.termination = Termination::Emptied;
        return Ok(trace);
    }

    let mut t = 0.0;
    loop {
        if config.max_events.is_some_and(|m| trace.events >= m) {
            trace.termination = Termination::EventBudget;
            break;
        }
        let (dt, class) = input.next(&mut rng);
        t += dt;
        if t > end {
            break;
        }
        let matched = policy.decide(graph, &q, class, &mut rng);
        apply_in_place(&mut q, class, matched);
        let ev = Event { time: t, class, matched };
        trace.record(&ev, &q);
        observe(&ev, &q);
        if stop_now(&q) {
            trace.termination = Termination::Emptied;
            break;
        }
    }
    trace.finish(q, t.min(end));
    Ok(trace)
}
