//! Fully resolved command parameters. A manifest stores one of these, and
//! replaying it needs nothing else.

use std::fs;
use std::path::{Path, PathBuf};

use graphcorr::baselines::{chordal_cholesky_sample, diagonal_dominance, partial_orthogonalization};
use graphcorr::experiments::{
    run_distribution_experiment, run_feasibility_grid, run_runtime_benchmark, DistributionConfig,
    FeasibilityConfig, RuntimeConfig,
};
use graphcorr::graph::{is_chordal, Graph, GraphModelParams};
use graphcorr::io::{
    read_graph, read_matrix, write_graph, write_json, write_matrix, DiagnosticsFile, GraphSidecar,
};
use graphcorr::projections::SymmetricMatrix;
use graphcorr::rng::derive_seed;
use graphcorr::solver::{
    check_membership, sample_cbar_uniform, solve_projection, MembershipTolerances, SolveStatus,
    SolverConfig,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::failure::{
    CmdResult, Failure, EXIT_INFEASIBLE, EXIT_MAX_ITERATIONS, EXIT_OK, EXIT_STRUCTURE,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "parameters", rename_all = "snake_case")]
pub enum Params {
    Graph(GraphParams),
    Generate(GenerateParams),
    Baseline(BaselineParams),
    Check(CheckParams),
    Experiment(ExperimentParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphParams {
    /// Model with every knob resolved.
    pub graph: GraphModelParams,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    File { path: PathBuf, p: Option<usize> },
    Model { graph: GraphModelParams, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum CbarSource {
    Uniform { seed: u64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateParams {
    pub graph: GraphSource,
    pub cbar: CbarSource,
    pub solver: SolverConfig,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    /// Diagonal dominance.
    Dd,
    /// Partial orthogonalization.
    Po,
    /// Cholesky sampling on a chordal graph.
    Chol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineParams {
    pub method: BaselineMethod,
    pub graph: PathBuf,
    pub p: Option<usize>,
    pub seed: u64,
    /// Vector order for partial orthogonalization; natural order when absent.
    pub order: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckParams {
    pub matrix: PathBuf,
    pub graph: PathBuf,
    pub p: Option<usize>,
    pub b: f64,
    pub tolerances: MembershipTolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "config", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Distribution(DistributionConfig),
    Feasibility(FeasibilityConfig),
    Runtime(RuntimeConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    pub experiment: ExperimentConfig,
    /// Distribution only: also write every generated matrix.
    pub write_matrices: bool,
}

/// What a finished command leaves behind besides its output files.
pub struct Completion {
    pub code: u8,
    pub outputs: Vec<String>,
    pub root_seed: Option<u64>,
    pub extra: Value,
    /// Printed to stderr for nonzero codes.
    pub message: Option<String>,
}

impl Params {
    pub fn name(&self) -> &'static str {
        match self {
            Params::Graph(_) => "graph",
            Params::Generate(_) => "generate",
            Params::Baseline(_) => "baseline",
            Params::Check(_) => "check",
            Params::Experiment(_) => "experiment",
        }
    }

    pub fn execute(&self, out: &Path) -> CmdResult<Completion> {
        fs::create_dir_all(out)?;
        match self {
            Params::Graph(p) => run_graph(p, out),
            Params::Generate(p) => run_generate(p, out),
            Params::Baseline(p) => run_baseline(p, out),
            Params::Check(p) => run_check(p, out),
            Params::Experiment(p) => run_experiment(p, out),
        }
    }
}

/// Node count from the flag, else the sidecar, else `fallback`.
fn load_graph(path: &Path, p: Option<usize>, fallback: Option<usize>) -> CmdResult<Graph> {
    let sidecar = graphcorr::io::sidecar_path(path);
    let p = match (p, fallback) {
        (Some(p), _) => Some(p),
        (None, Some(f)) if !sidecar.exists() => Some(f),
        _ => None,
    };
    read_graph(path, p).map_err(|e| Failure::from(e).context(path.display()))
}

fn load_matrix(path: &Path) -> CmdResult<SymmetricMatrix> {
    read_matrix(path).map_err(|e| Failure::from(e).context(path.display()))
}

fn write_edges(out: &Path, g: &Graph, target_density: Option<f64>) -> CmdResult<(Vec<String>, bool)> {
    let (chordal, _) = is_chordal(g);
    let sidecar = GraphSidecar {
        target_density,
        chordal: Some(chordal),
        ..GraphSidecar::describe(g)
    };
    write_graph(&out.join("edges.csv"), g, &sidecar)?;
    Ok((vec!["edges.csv".into(), "edges.json".into()], chordal))
}

fn run_graph(params: &GraphParams, out: &Path) -> CmdResult<Completion> {
    let g = params.graph.generate(params.seed)?;
    let (outputs, chordal) = write_edges(out, &g, Some(params.graph.target_density))?;
    Ok(Completion {
        code: EXIT_OK,
        outputs,
        root_seed: Some(params.seed),
        extra: json!({
            "edge_count": g.edge_count(),
            "chordal_verified": chordal,
        }),
        message: None,
    })
}

fn run_generate(params: &GenerateParams, out: &Path) -> CmdResult<Completion> {
    let (g, target_density) = match &params.graph {
        GraphSource::File { path, p } => (load_graph(path, *p, None)?, None),
        GraphSource::Model { graph, seed } => (graph.generate(*seed)?, Some(graph.target_density)),
    };
    let cbar = match &params.cbar {
        CbarSource::Uniform { seed } => sample_cbar_uniform(g.node_count(), *seed),
        CbarSource::File { path } => load_matrix(path)?,
    };
    let outcome = solve_projection(&cbar, &g, &params.solver)?;
    let (mut outputs, _) = write_edges(out, &g, target_density)?;
    let diagnostics = DiagnosticsFile::from_outcome(&outcome, params.seed);
    write_json(&out.join("diagnostics.json"), &diagnostics)?;
    outputs.push("diagnostics.json".into());
    if let Some(m) = &outcome.matrix {
        write_matrix(&out.join("matrix.csv"), m)?;
        outputs.push("matrix.csv".into());
    }
    let (code, message) = match outcome.status {
        SolveStatus::Solved => (EXIT_OK, None),
        SolveStatus::Infeasible => (
            EXIT_INFEASIBLE,
            Some(format!("infeasible: gap stalled at {:.3e}", outcome.diagnostics.gap)),
        ),
        SolveStatus::MaxIterations => (
            EXIT_MAX_ITERATIONS,
            Some(format!(
                "iteration cap {} reached with gap {:.3e}",
                outcome.diagnostics.iterations, outcome.diagnostics.gap
            )),
        ),
    };
    Ok(Completion {
        code,
        outputs,
        root_seed: params.seed,
        extra: json!({ "status": outcome.status.as_str() }),
        message,
    })
}

fn run_baseline(params: &BaselineParams, out: &Path) -> CmdResult<Completion> {
    let g = load_graph(&params.graph, params.p, None)?;
    let m = match params.method {
        BaselineMethod::Dd => diagonal_dominance(&g, params.seed),
        BaselineMethod::Po => {
            let natural: Vec<usize> = (0..g.node_count()).collect();
            partial_orthogonalization(&g, params.seed, params.order.as_deref().unwrap_or(&natural))?
        }
        BaselineMethod::Chol => match chordal_cholesky_sample(&g, params.seed) {
            Err(graphcorr::Error::NotChordal { cycle }) => {
                return Err(Failure {
                    code: EXIT_STRUCTURE,
                    message: format!(
                        "graph is not chordal: chordless cycle {}",
                        cycle.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("-")
                    ),
                })
            }
            other => other?,
        },
    };
    write_matrix(&out.join("matrix.csv"), &m)?;
    Ok(Completion {
        code: EXIT_OK,
        outputs: vec!["matrix.csv".into()],
        root_seed: Some(params.seed),
        extra: Value::Null,
        message: None,
    })
}

fn run_check(params: &CheckParams, out: &Path) -> CmdResult<Completion> {
    let m = load_matrix(&params.matrix)?;
    let g = load_graph(&params.graph, params.p, Some(m.dim()))?;
    let report = check_membership(&m, &g, params.b, &params.tolerances)?;
    write_json(&out.join("report.json"), &report)?;
    let ok = report.all_ok();
    let failed: Vec<&str> = [
        ("diagonal", report.diag_ok),
        ("pattern", report.pattern_ok),
        ("psd", report.psd_ok),
        ("bound", report.bound_ok),
        ("mean", report.mean_ok),
    ]
    .iter()
    .filter(|(_, ok)| !ok)
    .map(|(name, _)| *name)
    .collect();
    Ok(Completion {
        code: if ok { EXIT_OK } else { EXIT_INFEASIBLE },
        outputs: vec!["report.json".into()],
        root_seed: None,
        extra: json!({ "all_ok": ok }),
        message: (!ok).then(|| format!("membership check failed: {}", failed.join(", "))),
    })
}

fn run_experiment(params: &ExperimentParams, out: &Path) -> CmdResult<Completion> {
    let (outputs, seed, extra) = match &params.experiment {
        ExperimentConfig::Distribution(cfg) => {
            let result = run_distribution_experiment(cfg)?;
            let seeds: Vec<Value> = result
                .records
                .iter()
                .map(|r| json!([r.run, r.method, r.graph_seed, r.cbar_seed, r.method_seed]))
                .collect();
            (
                result.write(out, params.write_matrices)?,
                cfg.seed,
                json!({ "seed_columns": ["run", "method", "graph_seed", "cbar_seed", "method_seed"], "seeds": seeds }),
            )
        }
        ExperimentConfig::Feasibility(cfg) => {
            let result = run_feasibility_grid(cfg)?;
            let seeds: Vec<Value> = result
                .records
                .iter()
                .filter(|r| r.b_index == Some(0))
                .map(|r| json!([r.d_index, r.run, r.graph_seed, r.cbar_seed]))
                .collect();
            (
                result.write(out)?,
                cfg.seed,
                json!({
                    "grid_axes_reconstructed": true,
                    "monotone_in_b": result.is_monotone_in_b(),
                    "seed_columns": ["d_index", "run", "graph_seed", "cbar_seed"],
                    "seeds": seeds,
                }),
            )
        }
        ExperimentConfig::Runtime(cfg) => {
            let result = run_runtime_benchmark(cfg)?;
            let seeds: Vec<Value> = result
                .records
                .iter()
                .map(|r| json!([r.model, r.d_index, r.run, r.graph_seed, r.cbar_seed]))
                .collect();
            (
                result.write(out)?,
                cfg.seed,
                json!({ "seed_columns": ["model", "d_index", "run", "graph_seed", "cbar_seed"], "seeds": seeds }),
            )
        }
    };
    Ok(Completion {
        code: EXIT_OK,
        outputs,
        root_seed: Some(seed),
        extra,
        message: None,
    })
}

/// Graph seed and reference-matrix seed used by `generate` for a root seed.
pub fn generate_seeds(root: u64) -> (u64, u64) {
    (root, derive_seed(root, "generate/cbar", &[]))
}
