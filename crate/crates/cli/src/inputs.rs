//! Loading graphs, rates, policies and instances from files or inline values,
//! and remembering what was read for the manifest.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use matchq::io::{parse_graph, parse_policy, parse_rates, InstanceFile};
use matchq::{ArrivalRates, Graph, Policy, PriorityTable};

use crate::fail::Fail;
use crate::manifest::InputDigest;

#[derive(Default)]
pub struct Inputs {
    pub digests: Vec<InputDigest>,
}

pub struct Model {
    pub graph: Graph,
    pub rates: ArrivalRates,
    pub policy: Policy,
    /// Unstable node of a loaded instance file, 0-based.
    pub unstable_node: Option<usize>,
}

impl Inputs {
    fn record(&mut self, role: &str, source: &str, bytes: &[u8]) {
        self.digests.push(InputDigest {
            role: role.to_string(),
            source: source.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
    }

    fn read(&mut self, role: &str, path: &str) -> Result<String, Fail> {
        let text = fs::read_to_string(path).map_err(|e| Fail::input(format!("cannot read {role} file {path}: {e}")))?;
        self.record(role, path, text.as_bytes());
        Ok(text)
    }

    pub fn graph(&mut self, path: &str) -> Result<Graph, Fail> {
        let text = self.read("graph", path)?;
        parse_graph(&text).map_err(|e| Fail::from(e).context(path))
    }

    /// A JSON rates file, or an inline comma-separated list.
    pub fn rates(&mut self, arg: &str, graph: &Graph) -> Result<ArrivalRates, Fail> {
        if let Some(values) = inline_numbers(arg) {
            self.record("rates", "inline", arg.as_bytes());
            return Ok(ArrivalRates::for_graph(values?, graph)?);
        }
        let text = self.read("rates", arg)?;
        parse_rates(&text, graph).map_err(|e| Fail::from(e).context(arg))
    }

    /// A JSON policy file, or one of `ml`, `uniform`, `lex`.
    pub fn policy(&mut self, arg: &str, graph: &Graph) -> Result<Policy, Fail> {
        let builtin = match arg {
            "ml" => Some(Policy::MatchLongest),
            "uniform" => Some(Policy::Uniform),
            "lex" => Some(Policy::Priority(PriorityTable::lexicographic(graph))),
            _ => None,
        };
        if let Some(p) = builtin.filter(|_| !Path::new(arg).exists()) {
            self.record("policy", "inline", arg.as_bytes());
            return Ok(p);
        }
        let text = self.read("policy", arg)?;
        parse_policy(&text, graph).map_err(|e| Fail::from(e).context(arg))
    }

    pub fn instance(&mut self, path: &str) -> Result<Model, Fail> {
        let text = self.read("instance", path)?;
        let file: InstanceFile = serde_json::from_str(&text).map_err(|e| Fail::from(e).context(path))?;
        let (graph, rates, policy) = file.to_parts().map_err(|e| Fail::from(e).context(path))?;
        if file.unstable_node == 0 || file.unstable_node > graph.node_count() {
            return Err(Fail::input(format!("{path}: unstable_node {} out of range", file.unstable_node)));
        }
        Ok(Model { graph, rates, policy, unstable_node: Some(file.unstable_node - 1) })
    }

    /// Either `--instance`, or `--graph` with `--rates` and `--policy`.
    pub fn model(&mut self, src: &crate::ModelArgs) -> Result<Model, Fail> {
        if let Some(path) = &src.instance {
            if src.graph.is_some() || src.rates.is_some() || src.policy.is_some() {
                return Err(Fail::input("--instance cannot be combined with --graph, --rates or --policy"));
            }
            return self.instance(path);
        }
        let need = |v: &Option<String>, flag: &str| {
            v.clone().ok_or_else(|| Fail::input(format!("{flag} is required without --instance")))
        };
        let graph = self.graph(&need(&src.graph, "--graph")?)?;
        let rates = self.rates(&need(&src.rates, "--rates")?, &graph)?;
        let policy = self.policy(&need(&src.policy, "--policy")?, &graph)?;
        Ok(Model { graph, rates, policy, unstable_node: None })
    }
}

fn inline_numbers(arg: &str) -> Option<Result<Vec<f64>, Fail>> {
    let numeric = arg.chars().all(|c| c.is_ascii_digit() || ".,eE+- ".contains(c));
    if !numeric || arg.is_empty() {
        return None;
    }
    if Path::new(arg).exists() {
        return None;
    }
    Some(
        arg.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| Fail::input(format!("bad number {s:?} in {arg:?}"))))
            .collect(),
    )
}

/// 1-based label from the command line to a 0-based index.
pub fn node_index(label: usize, graph: &Graph) -> Result<usize, Fail> {
    if label == 0 || label > graph.node_count() {
        return Err(Fail::input(format!("node {label} is not in 1..={}", graph.node_count())));
    }
    Ok(label - 1)
}
