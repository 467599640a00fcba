use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use qmetric_core::algebra::{
    is_magic_unitary, search_quantum_rep_with, spectral_obstruction, verify_intertwiner, verify_rep_relations,
    GameAlgebraRep, SearchParams,
};
use qmetric_core::game::{
    correlation_from_deterministic, correlation_from_projections, find_perfect_deterministic, is_bisynchronous,
    is_synchronous, isom_rule, rule_table, simulate_rounds,
};
use qmetric_core::metric::{
    enumerate_isometries, min_complete_graph, validate_metric, FiniteMetricSpace, GraphJson, MetricJson,
    WeightedGraph,
};
use qmetric_core::qgraph::{
    bimodule_from_adjacency, filtration_from_quantum_graph, is_delta_form, verify_quantum_adjacency,
    verify_quantum_graph_os, QuantumGraphInput,
};
use qmetric_core::wstar::{
    conjugation_invariance_check, filtration_from_graph_with, filtration_from_metric, recover_metric,
    verify_filtration_axioms, QuantumMetricFiltration,
};

use crate::{Command, GameCmd, MetricCmd, Opts, QgraphCmd, RepCmd, WstarCmd};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("expected {expected} --in file(s) ({what}), got {got}")]
    InputCount { expected: &'static str, what: &'static str, got: usize },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed {what} in {path}: {source}")]
    Parse { what: &'static str, path: PathBuf, source: serde_json::Error },
    #[error("invalid {what} in {path}: {message}")]
    Invalid { what: &'static str, path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
}

/// Result of a command: whether the checked property holds, the JSON report
/// and a one-line human summary.
pub struct Output {
    pub holds: bool,
    pub report: String,
    pub summary: String,
}

fn output(holds: bool, report: &impl Serialize, summary: impl Into<String>) -> Output {
    Output { holds, report: serde_json::to_string(report).expect("reports serialize"), summary: summary.into() }
}

fn inputs<'a>(opts: &'a Opts, n: usize, what: &'static str) -> Result<&'a [PathBuf], CliError> {
    if opts.inputs.len() != n {
        let expected = ["none", "one", "two", "three"][n.min(3)];
        return Err(CliError::InputCount { expected, what, got: opts.inputs.len() });
    }
    Ok(&opts.inputs)
}

fn read_json<T: DeserializeOwned>(path: &Path, what: &'static str) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse { what, path: path.into(), source })
}

fn read_metric(path: &Path) -> Result<FiniteMetricSpace, CliError> {
    let raw: MetricJson = read_json(path, "metric")?;
    FiniteMetricSpace::try_from(raw).map_err(|e| CliError::Invalid { what: "metric", path: path.into(), message: e.to_string() })
}

fn read_graph(path: &Path) -> Result<WeightedGraph, CliError> {
    let raw: GraphJson = read_json(path, "graph")?;
    WeightedGraph::try_from(raw).map_err(|e| CliError::Invalid { what: "graph", path: path.into(), message: e.to_string() })
}

fn read_pair(opts: &Opts) -> Result<(FiniteMetricSpace, FiniteMetricSpace), CliError> {
    let files = inputs(opts, 2, "X and Y metrics")?;
    Ok((read_metric(&files[0])?, read_metric(&files[1])?))
}

/// A filtration file, or a metric file turned into its filtration.
fn read_filtration_or_metric(path: &Path) -> Result<QuantumMetricFiltration, CliError> {
    let value: serde_json::Value = read_json(path, "filtration or metric")?;
    if value.get("points").is_some() {
        let raw: MetricJson =
            serde_json::from_value(value).map_err(|source| CliError::Parse { what: "metric", path: path.into(), source })?;
        let x = FiniteMetricSpace::try_from(raw)
            .map_err(|e| CliError::Invalid { what: "metric", path: path.into(), message: e.to_string() })?;
        return Ok(filtration_from_metric(&x));
    }
    serde_json::from_value(value).map_err(|source| CliError::Parse { what: "filtration", path: path.into(), source })
}

pub fn run(command: &Command, opts: &Opts) -> Result<Output, CliError> {
    match command {
        Command::Metric(cmd) => metric(cmd, opts),
        Command::Game(cmd) => game(cmd, opts),
        Command::Rep(cmd) => rep(cmd, opts),
        Command::Wstar(cmd) => wstar(cmd, opts),
        Command::Qgraph(cmd) => qgraph(cmd, opts),
    }
}

fn metric(cmd: &MetricCmd, opts: &Opts) -> Result<Output, CliError> {
    match cmd {
        MetricCmd::Validate => {
            let path = &inputs(opts, 1, "metric")?[0];
            let raw: MetricJson = read_json(path, "metric")?;
            Ok(match validate_metric(raw.points, raw.distances) {
                Ok(x) => output(true, &json!({ "valid": true, "metric": MetricJson::from(&x) }), "valid metric"),
                Err(e) => output(false, &json!({ "valid": false, "error": e, "message": e.to_string() }), e.to_string()),
            })
        }
        MetricCmd::Isometries => {
            let (x, y) = read_pair(opts)?;
            let isos = enumerate_isometries(&x, &y);
            Ok(output(!isos.is_empty(), &isos, format!("{} isometries", isos.len())))
        }
        MetricCmd::Mcg => {
            let g = read_graph(&inputs(opts, 1, "graph")?[0])?;
            Ok(match min_complete_graph(&g) {
                Ok(x) => output(true, &MetricJson::from(&x), format!("shortest-path metric on {} points", x.len())),
                Err(e) => output(false, &json!({ "error": e, "message": e.to_string() }), e.to_string()),
            })
        }
    }
}

fn game(cmd: &GameCmd, opts: &Opts) -> Result<Output, CliError> {
    match cmd {
        GameCmd::Rules => {
            let (x, y) = read_pair(opts)?;
            let game = isom_rule(&x, &y);
            let (sync, bisync) = (is_synchronous(&game), is_bisynchronous(&game));
            let report = json!({
                "N": x.len() + y.len(),
                "synchronous": sync,
                "bisynchronous": bisync,
                "rule": rule_table(&game),
            });
            Ok(output(sync && bisync, &report, format!("synchronous: {sync}, bisynchronous: {bisync}")))
        }
        GameCmd::Solve => {
            let (x, y) = read_pair(opts)?;
            let found = find_perfect_deterministic(&isom_rule(&x, &y));
            let summary = match &found {
                Some(s) => format!("perfect deterministic strategy {:?}", s.f),
                None => "no perfect deterministic strategy: X and Y are not isometric".into(),
            };
            Ok(output(found.is_some(), &found, summary))
        }
        GameCmd::Simulate { dist } => {
            if !(2..=3).contains(&opts.inputs.len()) {
                return Err(CliError::InputCount { expected: "two or three", what: "X, Y [, REP]", got: opts.inputs.len() });
            }
            let (x, y) = (read_metric(&opts.inputs[0])?, read_metric(&opts.inputs[1])?);
            let game = isom_rule(&x, &y);
            let corr = match opts.inputs.get(2) {
                Some(path) => {
                    let rep: GameAlgebraRep = read_json(path, "representation")?;
                    correlation_from_projections(&rep, opts.tol)
                        .map_err(|e| CliError::Invalid { what: "representation", path: path.clone(), message: e.to_string() })?
                }
                None => match find_perfect_deterministic(&game) {
                    Some(s) => correlation_from_deterministic(&s).expect("strategy sized to the game"),
                    None => {
                        return Err(CliError::Usage(
                            "X and Y are not isometric; pass a representation as the third --in".into(),
                        ))
                    }
                },
            };
            let t = simulate_rounds(&corr, &game, opts.rounds, opts.seed, (*dist).into())
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let summary = format!("won {}/{} rounds", t.wins, t.total);
            Ok(output(true, &t, summary))
        }
    }
}

fn rep(cmd: &RepCmd, opts: &Opts) -> Result<Output, CliError> {
    match cmd {
        RepCmd::Verify => {
            let files = inputs(opts, 3, "REP, X and Y")?;
            let rep: GameAlgebraRep = read_json(&files[0], "representation")?;
            let (x, y) = (read_metric(&files[1])?, read_metric(&files[2])?);
            let magic = is_magic_unitary(&rep, opts.tol);
            let relations = verify_rep_relations(&rep, &x, &y, opts.tol)
                .map_err(|e| CliError::Invalid { what: "representation", path: files[0].clone(), message: e.to_string() })?;
            let intertwiner = verify_intertwiner(&rep, &x, &y, opts.tol).ok();
            let tw_pass = intertwiner.as_ref().is_some_and(|c| c.pass);
            let holds = magic.pass && relations.pass && tw_pass;
            let failed: Vec<&str> =
                magic.failed().chain(relations.failed()).map(|c| c.name.as_str()).collect();
            let report = json!({ "pass": holds, "magic_unitary": magic, "relations": relations, "intertwiner": intertwiner });
            let summary = if holds {
                "representation passes all relations".to_string()
            } else {
                format!("failed: {}{}", failed.join(", "), if tw_pass { "" } else { " (intertwiner)" })
            };
            Ok(output(holds, &report, summary))
        }
        RepCmd::Search { max_iters, restarts } => {
            let (x, y) = read_pair(opts)?;
            if opts.d == 0 {
                return Err(CliError::Usage("--d must be at least 1".into()));
            }
            let params = SearchParams { restarts: *restarts, max_iters: *max_iters };
            let out = search_quantum_rep_with(&x, &y, opts.d, opts.seed, &params);
            let summary = if out.is_found() { format!("found a d={} representation", opts.d) } else { "not found".into() };
            Ok(output(out.is_found(), &out, summary))
        }
        RepCmd::Obstruct => {
            let (x, y) = read_pair(opts)?;
            let report = spectral_obstruction(&x, &y);
            let summary = format!("obstructed: {} ({})", report.obstructed, report.reason);
            Ok(output(true, &report, summary))
        }
    }
}

fn wstar(cmd: &WstarCmd, opts: &Opts) -> Result<Output, CliError> {
    match cmd {
        WstarCmd::FromMetric => {
            let x = read_metric(&inputs(opts, 1, "metric")?[0])?;
            let f = filtration_from_metric(&x);
            Ok(output(true, &f, format!("{} breakpoints, dims {:?}", f.breakpoints().len(), f.dims())))
        }
        WstarCmd::FromGraph { algebra } => {
            let path = &inputs(opts, 1, "graph")?[0];
            let g = read_graph(path)?;
            Ok(match filtration_from_graph_with(&g, (*algebra).into()) {
                Ok(f) => output(true, &f, format!("{} breakpoints, dims {:?}", f.breakpoints().len(), f.dims())),
                Err(e) => output(false, &json!({ "error": e.to_string() }), e.to_string()),
            })
        }
        WstarCmd::Verify => {
            let f: QuantumMetricFiltration = read_json(&inputs(opts, 1, "filtration")?[0], "filtration")?;
            let report = verify_filtration_axioms(&f);
            let failed: Vec<&str> = report.failed().map(|c| c.name.as_str()).collect();
            let summary = if report.pass { "all axioms hold".to_string() } else { format!("failed: {}", failed.join(", ")) };
            Ok(output(report.pass, &report, summary))
        }
        WstarCmd::Recover => {
            let f: QuantumMetricFiltration = read_json(&inputs(opts, 1, "filtration")?[0], "filtration")?;
            Ok(match recover_metric(&f) {
                Ok(x) => output(true, &MetricJson::from(&x), format!("recovered metric on {} points", x.len())),
                Err(e) => output(false, &json!({ "error": e.to_string() }), e.to_string()),
            })
        }
        WstarCmd::Invariance => {
            let files = inputs(opts, 3, "REP, V and W")?;
            let rep: GameAlgebraRep = read_json(&files[0], "representation")?;
            let (fv, fw) = (read_filtration_or_metric(&files[1])?, read_filtration_or_metric(&files[2])?);
            let report = conjugation_invariance_check(&rep, &fv, &fw, opts.tol).map_err(|e| CliError::Usage(e.to_string()))?;
            let failed: Vec<&str> = report.failed().map(|c| c.name.as_str()).collect();
            let summary =
                if report.pass { "conjugation invariant at every breakpoint".to_string() } else { format!("failed: {}", failed.join(", ")) };
            Ok(output(report.pass, &report, summary))
        }
    }
}

fn qgraph(cmd: &QgraphCmd, opts: &Opts) -> Result<Output, CliError> {
    let path = &inputs(opts, 1, "quantum graph")?[0];
    let input: QuantumGraphInput = read_json(path, "quantum graph")?;
    let (q, a) = input.load().map_err(|e| CliError::Invalid { what: "quantum graph", path: path.clone(), message: e.to_string() })?;
    let fail = |e: &dyn std::fmt::Display| output(false, &json!({ "error": e.to_string() }), e.to_string());
    match cmd {
        QgraphCmd::Verify => {
            let delta2 = match is_delta_form(&q) {
                Ok(d) => d,
                Err(e) => return Ok(fail(&e)),
            };
            let report = match verify_quantum_adjacency(&q, &a) {
                Ok(r) => r,
                Err(e) => return Ok(fail(&e)),
            };
            let failed: Vec<&str> = report.failed().map(|c| c.name.as_str()).collect();
            let summary = if report.pass { format!("quantum adjacency matrix, δ² = {delta2}") } else { format!("failed: {}", failed.join(", ")) };
            Ok(output(report.pass, &json!({ "delta_squared": delta2, "axioms": report }), summary))
        }
        QgraphCmd::Bimodule => {
            let s = match bimodule_from_adjacency(&q, &a) {
                Ok(s) => s,
                Err(e) => return Ok(fail(&e)),
            };
            let os = verify_quantum_graph_os(&s, &q.algebra());
            let summary = format!("dim S = {}, quantum graph: {}", s.dim(), os.pass);
            Ok(output(os.pass, &json!({ "dim": s.dim(), "subspace": s, "quantum_graph": os }), summary))
        }
        QgraphCmd::Filtration => {
            let s = match bimodule_from_adjacency(&q, &a) {
                Ok(s) => s,
                Err(e) => return Ok(fail(&e)),
            };
            Ok(match filtration_from_quantum_graph(&s, &q.algebra()) {
                Ok(f) => output(true, &f, format!("{} breakpoints, dims {:?}", f.breakpoints().len(), f.dims())),
                Err(e) => fail(&e),
            })
        }
    }
}
