//! Stochastic matching queues on graphs.
//!
//! Items of class `i` arrive at rate `λ_i` and are matched on arrival with a
//! waiting item of an adjacent class chosen by a policy, or wait. This crate
//! simulates such systems, computes fluid drifts through the marginal chain
//! seen from a saturated queue, evaluates exact stability regions for the
//! pendant and the 5-cycle, and builds unstable instances on any graph that
//! contains one of them as an induced subgraph.

pub mod graph;
pub mod io;
pub mod marginal;
pub mod policy;
pub mod randgraph;
pub mod rng;
pub mod simulate;
pub mod stability;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use graph::{classify, ncond_check, ArrivalRates, Graph, GraphClass, GraphError, Ncond, NodeSet, Witness};
pub use marginal::{build_marginal, fluid_report, FluidOptions, FluidReport, MarginalError, Rho, StationaryDist};
pub use policy::{apply_transition, match_decision, Policy, PolicyError, PriorityTable, QueueState};
pub use simulate::{drift_estimate, hitting_time, simulate, HittingTime, SimConfig, SimError, SimTrace};
pub use stability::{
    construct_nonmaximal, counterexample, empirical_classify, fivecycle_region, pendant_region, Family, StabilityError,
    StabilityVerdict, UnstableInstance, Verdict,
};
