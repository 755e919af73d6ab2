use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use matchq::graph::DEFAULT_ENUMERATION_CAP;
use matchq::io::{fluid_report_json, InstanceFile};
use matchq::randgraph::{grow_and_match_replication, matching_is_valid, tutte_condition_estimate, GrowthRun};
use matchq::simulate::Termination;
use matchq::stability::{ncond_inequalities, EmpiricalBudget, Evidence, Inequality};
use matchq::{
    classify, drift_estimate, empirical_classify, fivecycle_region, fluid_report, hitting_time, ncond_check,
    pendant_region, simulate as run_sim, Family, FluidOptions, Graph, GraphClass, Ncond, NodeSet, QueueState,
    SimConfig, SimTrace, StabilityVerdict, UnstableInstance, Witness,
};

use crate::fail::Fail;
use crate::inputs::{node_index, Inputs, Model};
use crate::manifest::{Manifest, Sink};
use crate::{Format, Method, ModelArgs, RandgraphArgs, SimulateArgs, StabilityArgs};

fn one_based(nodes: &[usize]) -> Vec<usize> {
    nodes.iter().map(|i| i + 1).collect()
}

fn parts_text(parts: &[NodeSet]) -> String {
    parts
        .iter()
        .map(|p| p.to_one_based().iter().map(usize::to_string).collect::<Vec<_>>().join(","))
        .map(|s| format!("{{{s}}}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn model_params(src: &ModelArgs) -> Value {
    json!({"instance": src.instance, "graph": src.graph, "rates": src.rates, "policy": src.policy})
}

pub fn analyze(graph_path: &str, out: Option<&Path>) -> Result<(), Fail> {
    let mut inputs = Inputs::default();
    let g = inputs.graph(graph_path)?;
    let class = classify(&g)?;
    let report = match &class {
        GraphClass::Bipartite { colouring } => {
            let sides: Vec<NodeSet> =
                [false, true].iter().map(|&c| (0..g.node_count()).filter(|&i| colouring[i] == c).collect()).collect();
            json!({
                "class": "Bipartite",
                "parts": sides.iter().map(|s| s.to_one_based()).collect::<Vec<_>>(),
                "summary": format!("Bipartite: {}", parts_text(&sides)),
            })
        }
        GraphClass::Separable { order, parts } => json!({
            "class": "Separable",
            "order": order,
            "parts": parts.iter().map(|s| s.to_one_based()).collect::<Vec<_>>(),
            "summary": format!("Separable order {order}: {}", parts_text(parts)),
        }),
        GraphClass::NonSeparableWithWitness(w) => {
            let (kind, label) = match w {
                Witness::Pendant(_) => ("pendant", "induced pendant"),
                Witness::FiveCycle(_) => ("five_cycle", "induced 5-cycle"),
            };
            let nodes = one_based(w.nodes());
            json!({
                "class": "NonSeparable",
                "in_g7": false,
                "witness": {"kind": kind, "nodes": nodes},
                "summary": format!("NonSeparable, in G7c, {label} at nodes {nodes:?}"),
            })
        }
        GraphClass::NonSeparableOddCycle { cycle } => {
            let nodes = one_based(cycle);
            json!({
                "class": "NonSeparable",
                "in_g7": true,
                "witness": {"kind": "odd_cycle", "nodes": nodes},
                "summary": format!("NonSeparable, in G7, shortest induced odd cycle {nodes:?}"),
            })
        }
    };
    let mut report = report;
    report["nodes"] = json!(g.node_count());
    report["edges"] = json!(g.edge_count());
    let manifest = Manifest::new("analyze", None, json!({"graph": graph_path}), inputs.digests);
    Sink::new(out, manifest)?.finish("analysis.json", report)
}

fn inequalities_csv(checks: &[Inequality]) -> Result<String, Fail> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["inequality", "lhs", "rhs", "margin", "holds"]).map_err(csv_err)?;
    for c in checks {
        w.write_record([
            c.name.clone(),
            c.lhs.to_string(),
            c.rhs.to_string(),
            c.margin.to_string(),
            c.holds().to_string(),
        ])
        .map_err(csv_err)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Fail::from(e.into_error()))?).expect("csv output is UTF-8"))
}

fn csv_err(e: csv::Error) -> Fail {
    Fail::from(std::io::Error::other(e))
}

pub fn ncond(graph_path: &str, rates_arg: &str, format: Format, out: Option<&Path>) -> Result<(), Fail> {
    let mut inputs = Inputs::default();
    let g = inputs.graph(graph_path)?;
    let rates = inputs.rates(rates_arg, &g)?;
    let result = ncond_check(&g, &rates, DEFAULT_ENUMERATION_CAP)?;
    let checks = ncond_inequalities(&g, &rates)?;
    let manifest = Manifest::new("ncond", None, json!({"graph": graph_path, "rates": rates_arg}), inputs.digests);
    let sink = Sink::new(out, manifest)?;
    if format == Format::Csv {
        return sink.finish_table("ncond.csv", inequalities_csv(&checks)?);
    }
    let head = match result {
        Ncond::Satisfied { slack, tightest } => {
            json!({"satisfied": true, "slack": slack, "tightest": tightest.to_one_based()})
        }
        Ncond::Violated { witness, excess } => {
            json!({"satisfied": false, "witness": witness.to_one_based(), "excess": excess})
        }
    };
    let mut report = head;
    report["inequalities"] = json!(checks);
    sink.finish("ncond.json", report)
}

fn pick_node(model: &Model, node: Option<usize>) -> Result<usize, Fail> {
    match (node, model.unstable_node) {
        (Some(label), _) => node_index(label, &model.graph),
        (None, Some(i)) => Ok(i),
        (None, None) => Err(Fail::input("--node is required without an instance file")),
    }
}

pub fn fluid(src: &ModelArgs, node: Option<usize>, q0: f64, limit: Option<u32>) -> Result<(), Fail> {
    let mut inputs = Inputs::default();
    let model = inputs.model(src)?;
    let i0 = pick_node(&model, node)?;
    if !(q0.is_finite() && q0 >= 0.0) {
        return Err(Fail::input(format!("--q0 must be finite and non-negative, got {q0}")));
    }
    let opts = FluidOptions { limit, ..FluidOptions::default() };
    let r = fluid_report(&model.graph, &model.rates, &model.policy, i0, q0, &opts)?;
    let mut params = model_params(src);
    params["node"] = json!(i0 + 1);
    params["q0"] = json!(q0);
    params["limit"] = json!(limit);
    let manifest = Manifest::new("fluid", None, params, inputs.digests);
    Sink::new(None, manifest)?.finish("fluid.json", fluid_report_json(&r))
}

fn trace_json(tr: &SimTrace, w: &mut dyn Write) -> std::io::Result<()> {
    let states: Vec<&[u64]> = (0..tr.len()).map(|k| tr.state(k)).collect();
    let doc = json!({
        "scale": tr.scale,
        "seed": tr.seed,
        "replication": tr.replication,
        "t": tr.times,
        "class": tr.classes.iter().map(|c| c + 1).collect::<Vec<_>>(),
        "matched": tr.matched.iter().map(|m| m.map(|j| j + 1)).collect::<Vec<_>>(),
        "q": states,
    });
    serde_json::to_writer(&mut *w, &doc)?;
    writeln!(w)
}

fn mean_sd(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let sd = (xs.len() > 1).then(|| (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt());
    (Some(m), sd)
}

pub fn simulate(a: &SimulateArgs) -> Result<(), Fail> {
    let mut inputs = Inputs::default();
    let model = inputs.model(&a.model)?;
    let p = model.graph.node_count();
    let node = match a.node {
        Some(label) => Some(node_index(label, &model.graph)?),
        None => model.unstable_node,
    };
    if a.scale == 0 || a.replications == 0 || a.samples == 0 {
        return Err(Fail::input("--scale, --replications and --samples must be positive"));
    }
    let n = a.scale as f64;
    let init = match (&a.init, node) {
        (Some(levels), _) => {
            if levels.len() != p || levels.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Fail::input(format!("--init needs {p} non-negative levels")));
            }
            QueueState(levels.iter().map(|x| (x * n).round() as u64).collect())
        }
        (None, Some(i)) => QueueState::concentrated(p, i, (a.q0 * n).round() as u64),
        (None, None) => QueueState::zero(p),
    };
    let mut base = SimConfig::new(a.scale, a.horizon, init, a.seed).target_samples(&model.rates, a.samples);
    if a.stop_when_empty {
        base = base.stop_when_empty(node.ok_or_else(|| Fail::input("--stop-when-empty needs --node"))?);
    }
    if let Some(m) = a.max_events {
        base = base.max_events(m);
    }
    let traces: Vec<SimTrace> = (0..a.replications)
        .into_par_iter()
        .map(|k| run_sim(&model.graph, &model.rates, &model.policy, &base.clone().replication(k)))
        .collect::<Result<_, _>>()?;

    let mut params = model_params(&a.model);
    params["scale"] = json!(a.scale);
    params["horizon"] = json!(a.horizon);
    params["replications"] = json!(a.replications);
    params["node"] = json!(node.map(|i| i + 1));
    params["q0"] = json!(a.q0);
    params["init"] = json!(a.init);
    params["samples"] = json!(a.samples);
    params["stop_when_empty"] = json!(a.stop_when_empty);
    params["max_events"] = json!(a.max_events);
    let manifest = Manifest::new("simulate", Some(a.seed), params, inputs.digests);
    let mut sink = Sink::new(a.out.as_deref(), manifest)?;

    let mut runs = Vec::new();
    let mut slopes = Vec::new();
    let mut budget_hit = false;
    for tr in &traces {
        let name = match a.format {
            Format::Csv => format!("trace_rep{}.csv", tr.replication),
            Format::Json => format!("trace_rep{}.json", tr.replication),
        };
        match a.format {
            Format::Csv => sink.file(&name, |w| tr.write_csv(w))?,
            Format::Json => sink.file(&name, |w| trace_json(tr, w))?,
        }
        budget_hit |= tr.termination == Termination::EventBudget;
        let hits: Vec<Option<f64>> = (0..p).map(|i| hitting_time(tr, i).time()).collect();
        let drift = node.map(|i| match drift_estimate(tr, i, None) {
            Ok(d) => {
                slopes.push(d.slope);
                json!({"slope": d.slope, "stderr": d.stderr, "window": [d.window.0, d.window.1], "samples": d.samples})
            }
            Err(e) => json!({"error": e.to_string()}),
        });
        runs.push(json!({
            "replication": tr.replication,
            "trace": sink.has_dir().then_some(name),
            "events": tr.events,
            "termination": tr.termination,
            "scaled_end": tr.scaled_end(),
            "final_state": tr.final_state.0,
            "hitting_times": hits,
            "drift": drift,
        }));
    }
    let (mean, sd) = mean_sd(&slopes);
    let report = json!({
        "runs": runs,
        "node": node.map(|i| i + 1),
        "mean_slope": mean,
        "slope_sd": sd,
    });
    sink.finish("summary.json", report)?;
    if budget_hit {
        return Err(Fail::budget("at least one run hit --max-events before the horizon"));
    }
    Ok(())
}

fn exact_region(model: &Model) -> Option<Result<StabilityVerdict, Fail>> {
    let lam = model.rates.as_slice();
    if model.graph == Graph::pendant() && model.policy == Family::PendantPriority.policy() {
        return Some(pendant_region(lam).map_err(Fail::from));
    }
    if model.graph == Graph::five_cycle() && model.policy == Family::FiveCyclePriority.policy() {
        return Some(fivecycle_region(lam).map_err(Fail::from));
    }
    None
}

fn verdict_json(v: &StabilityVerdict) -> Value {
    let mut doc = json!(v);
    // report node labels 1-based, like everything else
    if let Some(nodes) = doc.pointer_mut("/evidence/empirical/nodes").and_then(Value::as_array_mut) {
        for n in nodes {
            if let Some(i) = n["node"].as_u64() {
                n["node"] = json!(i + 1);
            }
        }
    }
    doc
}

fn empirical_csv(v: &StabilityVerdict) -> Result<String, Fail> {
    let Evidence::Empirical(ev) = &v.evidence else { unreachable!("empirical verdict") };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "node",
        "scale",
        "runs",
        "hits",
        "mean_hitting_time",
        "hitting_cv",
        "mean_slope",
        "slope_se",
        "call",
    ])
    .map_err(csv_err)?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    for node in &ev.nodes {
        for s in &node.scales {
            w.write_record([
                (node.node + 1).to_string(),
                s.scale.to_string(),
                s.runs.to_string(),
                s.hits.to_string(),
                opt(s.mean_hitting_time),
                opt(s.hitting_cv),
                opt(s.mean_slope),
                opt(s.slope_se),
                format!("{:?}", node.call),
            ])
            .map_err(csv_err)?;
        }
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Fail::from(e.into_error()))?).expect("csv output is UTF-8"))
}

pub fn stability(a: &StabilityArgs) -> Result<(), Fail> {
    let mut inputs = Inputs::default();
    let model = inputs.model(&a.model)?;
    let exact = match a.method {
        Method::Empirical => None,
        Method::Auto => exact_region(&model),
        Method::Exact => Some(exact_region(&model).unwrap_or_else(|| {
            Err(Fail::region("exact regions are known only for the pendant and 5-cycle priority models"))
        })),
    };
    let mut params = model_params(&a.model);
    let (verdict, seed) = match exact {
        Some(v) => {
            params["method"] = json!("exact");
            (v?, None)
        }
        None => {
            let seed = a.seed.ok_or_else(|| Fail::input("--seed is required for the empirical method"))?;
            if a.scale.is_empty() || a.scale.contains(&0) || a.replications == 0 {
                return Err(Fail::input("--scale values and --replications must be positive"));
            }
            let budget = EmpiricalBudget {
                scales: a.scale.clone(),
                replications: a.replications,
                horizon: a.horizon,
                seed,
                max_events_per_run: a.max_events,
            };
            params["method"] = json!("empirical");
            params["scale"] = json!(a.scale);
            params["replications"] = json!(a.replications);
            params["horizon"] = json!(a.horizon);
            params["max_events"] = json!(a.max_events);
            (empirical_classify(&model.graph, &model.rates, &model.policy, &budget)?, Some(seed))
        }
    };
    let manifest = Manifest::new("stability", seed, params, inputs.digests);
    let sink = Sink::new(a.out.as_deref(), manifest)?;
    match (a.format, &verdict.evidence) {
        (Format::Csv, Evidence::Exact { checks, .. }) => sink.finish_table("stability.csv", inequalities_csv(checks)?),
        (Format::Csv, Evidence::Empirical(_)) => sink.finish_table("stability.csv", empirical_csv(&verdict)?),
        (Format::Json, _) => sink.finish("stability.json", verdict_json(&verdict)),
    }
}

fn emit_instance(
    command: &'static str,
    inst: &UnstableInstance,
    params: Value,
    inputs: Inputs,
    out: Option<&Path>,
) -> Result<(), Fail> {
    let manifest = Manifest::new(command, None, params, inputs.digests);
    let file = InstanceFile::from_instance(inst);
    Sink::new(out, manifest)?.finish("instance.json", serde_json::to_value(&file)?)
}

pub fn counterexample(family: Family, epsilon: Option<f64>, out: Option<&Path>) -> Result<(), Fail> {
    let eps = epsilon.unwrap_or(family.max_epsilon() / 2.0);
    let inst = matchq::counterexample(family, eps)?;
    let params = json!({"family": family, "epsilon": eps});
    emit_instance("counterexample", &inst, params, Inputs::default(), out)
}

pub fn construct_nonmaximal(graph_path: &str, epsilon: Option<f64>, out: Option<&Path>) -> Result<(), Fail> {
    let mut inputs = Inputs::default();
    let g = inputs.graph(graph_path)?;
    let inst = matchq::stability::construct_nonmaximal_with(&g, epsilon)?;
    let params = json!({"graph": graph_path, "epsilon": epsilon});
    emit_instance("construct-nonmaximal", &inst, params, inputs, out)
}

fn trajectory_json(run: &GrowthRun, w: &mut dyn Write) -> std::io::Result<()> {
    let doc: Vec<Value> = run
        .trajectory
        .iter()
        .map(|c| json!({"n": c.n, "matched_count": c.matched, "unmatched": c.unmatched}))
        .collect();
    serde_json::to_writer(&mut *w, &doc)?;
    writeln!(w)
}

pub fn randgraph(a: &RandgraphArgs) -> Result<(), Fail> {
    let mut inputs = Inputs::default();
    let model = inputs.model(&a.model)?;
    if a.scale == 0 || a.replications == 0 {
        return Err(Fail::input("--scale and --replications must be positive"));
    }
    let every = a.checkpoint.unwrap_or((a.scale / 100).max(1));
    if every == 0 {
        return Err(Fail::input("--checkpoint must be positive"));
    }
    let runs: Vec<GrowthRun> = (0..a.replications)
        .into_par_iter()
        .map(|k| grow_and_match_replication(&model.graph, &model.rates, &model.policy, a.scale, a.seed, k, every))
        .collect::<Result<_, _>>()?;
    let margins = tutte_condition_estimate(&model.graph, &model.rates, DEFAULT_ENUMERATION_CAP)?;
    let worst = margins.iter().cloned().max_by(|x, y| x.1.total_cmp(&y.1));

    let mut params = model_params(&a.model);
    params["scale"] = json!(a.scale);
    params["replications"] = json!(a.replications);
    params["checkpoint"] = json!(every);
    let manifest = Manifest::new("randgraph", Some(a.seed), params, inputs.digests);
    let mut sink = Sink::new(a.out.as_deref(), manifest)?;
    let mut summaries = Vec::new();
    for (k, run) in runs.iter().enumerate() {
        let name = match a.format {
            Format::Csv => format!("trajectory_rep{k}.csv"),
            Format::Json => format!("trajectory_rep{k}.json"),
        };
        match a.format {
            Format::Csv => sink.file(&name, |w| run.write_trajectory_csv(w))?,
            Format::Json => sink.file(&name, |w| trajectory_json(run, w))?,
        }
        let last = run.trajectory.last();
        summaries.push(json!({
            "replication": k,
            "trajectory": sink.has_dir().then_some(name),
            "nodes": run.state.nodes.len(),
            "matched": run.state.matched_count(),
            "unmatched": run.state.unmatched,
            "unmatched_fraction": last.map(|c| 1.0 - c.matched_fraction()),
            "matching_valid": matching_is_valid(&run.state),
        }));
    }
    let report = json!({
        "runs": summaries,
        // λ(I) - λ(E(I)) per independent set, normalized: a positive value
        // forces that fraction of nodes to stay unmatched
        "tutte_worst": worst.map(|(set, m)| json!({"set": set.to_one_based(), "margin": m})),
    });
    sink.finish("summary.json", report)
}
