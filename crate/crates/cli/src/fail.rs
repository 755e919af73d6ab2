use std::fmt;

use matchq::io::IoError;
use matchq::randgraph::RandGraphError;
use matchq::stability::StabilityError;
use matchq::{GraphError, MarginalError, PolicyError, SimError};

/// Parse and validation errors.
pub const EXIT_INPUT: u8 = 2;
/// The requested analysis does not apply to this graph or these rates.
pub const EXIT_REGION: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;
pub const EXIT_IO: u8 = 1;

#[derive(Debug)]
pub struct Fail {
    pub code: u8,
    pub msg: String,
}

impl Fail {
    pub fn input(msg: impl Into<String>) -> Self {
        Fail { code: EXIT_INPUT, msg: msg.into() }
    }

    pub fn region(msg: impl Into<String>) -> Self {
        Fail { code: EXIT_REGION, msg: msg.into() }
    }

    pub fn budget(msg: impl Into<String>) -> Self {
        Fail { code: EXIT_BUDGET, msg: msg.into() }
    }

    pub fn context(mut self, what: &str) -> Self {
        self.msg = format!("{what}: {}", self.msg);
        self
    }
}

impl fmt::Display for Fail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail { code: EXIT_IO, msg: e.to_string() }
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail::input(format!("malformed JSON: {e}"))
    }
}

impl From<GraphError> for Fail {
    fn from(e: GraphError) -> Self {
        Fail::input(e.to_string())
    }
}

impl From<PolicyError> for Fail {
    fn from(e: PolicyError) -> Self {
        Fail::input(e.to_string())
    }
}

impl From<IoError> for Fail {
    fn from(e: IoError) -> Self {
        Fail::input(e.to_string())
    }
}

impl From<RandGraphError> for Fail {
    fn from(e: RandGraphError) -> Self {
        Fail::input(e.to_string())
    }
}

impl From<SimError> for Fail {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InsufficientSamples { .. } => Fail::region(e.to_string()),
            _ => Fail::input(e.to_string()),
        }
    }
}

impl From<MarginalError> for Fail {
    fn from(e: MarginalError) -> Self {
        match e {
            MarginalError::Graph(g) => g.into(),
            MarginalError::Policy(p) => p.into(),
            MarginalError::NodeOutOfRange(_) => Fail::input(e.to_string()),
            MarginalError::TooManyStates { .. } => Fail::budget(e.to_string()),
            _ => Fail::region(e.to_string()),
        }
    }
}

impl From<StabilityError> for Fail {
    fn from(e: StabilityError) -> Self {
        match e {
            StabilityError::EpsilonOutOfRange { .. } => Fail::input(e.to_string()),
            StabilityError::BudgetExceeded { .. } => Fail::budget(e.to_string()),
            StabilityError::Graph(g) => g.into(),
            StabilityError::Policy(p) => p.into(),
            StabilityError::Marginal(m) => m.into(),
            StabilityError::Sim(s) => s.into(),
            _ => Fail::region(e.to_string()),
        }
    }
}
