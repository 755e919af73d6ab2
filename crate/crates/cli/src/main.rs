use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod fail;
mod inputs;
mod manifest;

/// Stability analysis and simulation of matching queues on graphs.
///
/// Node labels on the command line and in files are 1-based. Graph files are
/// `{"nodes": p, "edges": [[i, j], ...]}`, rates files `{"rates": [...]}` (or an
/// inline list `0.1,0.2,...`), policy files `{"kind": "priority", "order":
/// {"1": [2, 3], ...}}` or one of the words `ml`, `uniform`, `lex`.
#[derive(Parser)]
#[command(name = "matchq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a graph: bipartite, separable, or non-separable with a witness.
    Analyze {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the necessary stability condition over all independent sets.
    Ncond {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        rates: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fluid drift of a saturated node from the marginal chain of its neighbors.
    Fluid {
        #[command(flatten)]
        model: ModelArgs,
        /// Saturated node; defaults to the instance's unstable node.
        #[arg(long)]
        node: Option<usize>,
        /// Initial fluid level of the node.
        #[arg(long, default_value_t = 1.0)]
        q0: f64,
        /// Side of the truncation box for the numeric solve.
        #[arg(long)]
        limit: Option<u32>,
    },
    /// Simulate the queue process; traces go to --out, one file per replication.
    Simulate(SimulateArgs),
    /// Exact region check for the two analyzed families, or an empirical call.
    Stability(StabilityArgs),
    /// Member of one of the unstable families at a given epsilon.
    Counterexample {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Defaults to half the family's upper bound.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rates inside the stability condition and a priority policy that is
    /// unstable anyway, on a graph containing an induced pendant or 5-cycle.
    ConstructNonmaximal {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grow a random multipartite graph from a template and match it online.
    Randgraph(RandgraphArgs),
}

#[derive(Args, Clone)]
pub struct ModelArgs {
    /// Instance file (graph, rates, policy and unstable node).
    #[arg(long)]
    instance: Option<String>,
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    rates: Option<String>,
    #[arg(long)]
    policy: Option<String>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Fluid scale n: the run covers real time n * horizon.
    #[arg(long, default_value_t = 1)]
    scale: u64,
    /// Scaled time horizon.
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replications: u64,
    /// Start with round(n * q0) items at this node, and report its drift.
    #[arg(long)]
    node: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    q0: f64,
    /// Scaled initial levels for every node, comma-separated; overrides --node's start.
    #[arg(long, value_delimiter = ',')]
    init: Option<Vec<f64>>,
    /// Approximate number of trace samples per run.
    #[arg(long, default_value_t = 2_000)]
    samples: u64,
    /// Stop a run when the --node queue empties.
    #[arg(long)]
    stop_when_empty: bool,
    #[arg(long)]
    max_events: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    /// Required for the empirical method.
    #[arg(long)]
    seed: Option<u64>,
    /// Fluid scales for the empirical method, comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1_000u64, 10_000])]
    scale: Vec<u64>,
    #[arg(long, default_value_t = 8)]
    replications: u64,
    #[arg(long, default_value_t = 30.0)]
    horizon: f64,
    #[arg(long)]
    max_events: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RandgraphArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of nodes to grow.
    #[arg(long, alias = "nodes")]
    scale: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replications: u64,
    /// Checkpoint interval; defaults to a hundredth of --scale.
    #[arg(long)]
    checkpoint: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Exact for the pendant and 5-cycle priority models, empirical otherwise.
    Auto,
    Exact,
    Empirical,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    PendantPriority,
    FiveCyclePriority,
    PendantUniform,
    FiveCycleUniform,
}

impl FamilyArg {
    fn family(self) -> matchq::Family {
        match self {
            FamilyArg::PendantPriority => matchq::Family::PendantPriority,
            FamilyArg::FiveCyclePriority => matchq::Family::FiveCyclePriority,
            FamilyArg::PendantUniform => matchq::Family::PendantUniform,
            FamilyArg::FiveCycleUniform => matchq::Family::FiveCycleUniform,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { graph, out } => commands::analyze(&graph, out.as_deref()),
        Command::Ncond { graph, rates, format, out } => commands::ncond(&graph, &rates, format, out.as_deref()),
        Command::Fluid { model, node, q0, limit } => commands::fluid(&model, node, q0, limit),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Stability(args) => commands::stability(&args),
        Command::Counterexample { family, epsilon, out } => {
            commands::counterexample(family.family(), epsilon, out.as_deref())
        }
        Command::ConstructNonmaximal { graph, epsilon, out } => {
            commands::construct_nonmaximal(&graph, epsilon, out.as_deref())
        }
        Command::Randgraph(args) => commands::randgraph(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
