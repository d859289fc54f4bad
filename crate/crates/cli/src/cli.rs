//! Command-line flags and their conversion into replayable [`Params`].

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphcorr::experiments::{DistributionConfig, FeasibilityConfig, RuntimeConfig};
use graphcorr::graph::{GraphModel, GraphModelParams};
use graphcorr::solver::{MembershipTolerances, SolverConfig};
use serde::de::DeserializeOwned;

use crate::failure::{CmdResult, Failure};
use crate::params::{
    generate_seeds, BaselineMethod, BaselineParams, CbarSource, CheckParams, ExperimentConfig,
    ExperimentParams, GenerateParams, GraphParams, GraphSource, Params,
};

/// Random correlation matrices constrained by a graph's zero pattern.
///
/// Nodes are 0-based in every file. Exit codes: 0 success, 1 input error,
/// 2 infeasible (or a failed membership check), 3 iteration cap reached,
/// 4 graph is not chordal.
#[derive(Debug, Parser)]
#[command(name = "graphcorr", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a random graph and write it as an edge list.
    Graph(GraphArgs),
    /// Solve for the nearest patterned correlation matrix to a reference.
    Generate(GenerateArgs),
    /// Sample a matrix with a baseline method.
    Baseline(BaselineArgs),
    /// Check a matrix against a graph pattern and mean bound.
    Check(CheckArgs),
    /// Run one of the experiment studies from a JSON configuration.
    Experiment(ExperimentArgs),
    /// Re-run the command recorded in a manifest into a new directory.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Graph model: er, ba, ws, sbm or chordal.
    #[arg(long)]
    pub model: Option<String>,
    /// Number of nodes.
    #[arg(long)]
    pub p: Option<usize>,
    /// Target edge density in (0, 1]. May be omitted when the model's own
    /// knobs are given.
    #[arg(long)]
    pub density: Option<f64>,
    /// Attachment count (ba, chordal).
    #[arg(long)]
    pub m: Option<usize>,
    /// Ring-lattice degree, even (ws).
    #[arg(long)]
    pub k: Option<usize>,
    /// Rewiring probability (ws).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Comma-separated block sizes summing to p (sbm).
    #[arg(long, value_delimiter = ',')]
    pub block_sizes: Option<Vec<usize>>,
    /// Within-block edge probability (sbm).
    #[arg(long)]
    pub p_intra: Option<f64>,
    /// Between-block edge probability (sbm).
    #[arg(long)]
    pub p_inter: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Root seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// JSON file with solver settings; the flags below override it.
    #[arg(long)]
    pub solver_config: Option<PathBuf>,
    /// Lower bound on the mean edge entry; -1 or less disables it.
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Convergence tolerance on iterate change and gap.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Ridge added by post-processing.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Trailing iterations inspected by the infeasibility test.
    #[arg(long)]
    pub stall_window: Option<usize>,
    /// Gap above which a stalled run counts as infeasible.
    #[arg(long)]
    pub tol_gap_infeasible: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Edge-list CSV (header `i,j`). Node count comes from --p or the JSON
    /// sidecar. Mutually exclusive with --model.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Reference matrix: `uniform` for a seeded uniform sample, otherwise a
    /// path to a dense symmetric CSV.
    #[arg(long, default_value = "uniform")]
    pub cbar: String,
    /// Root seed for the graph and the uniform reference matrix.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Baseline method.
    #[arg(long, value_enum)]
    pub method: BaselineMethod,
    /// Edge-list CSV.
    #[arg(long)]
    pub graph: PathBuf,
    /// Node count; read from the sidecar when omitted.
    #[arg(long)]
    pub p: Option<usize>,
    /// Seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated vector order for `po`.
    #[arg(long, value_delimiter = ',')]
    pub order: Option<Vec<usize>>,
    /// Output directory.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Dense matrix CSV.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Edge-list CSV.
    #[arg(long)]
    pub graph: PathBuf,
    /// Node count; from the sidecar, else the matrix size, when omitted.
    #[arg(long)]
    pub p: Option<usize>,
    /// Mean bound to check; -1 or less disables the mean check.
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub b: f64,
    /// Accepted deviation of diagonal entries from one.
    #[arg(long)]
    pub tol_diag: Option<f64>,
    /// Accepted magnitude on non-edges.
    #[arg(long)]
    pub tol_pattern: Option<f64>,
    /// Accepted negative smallest eigenvalue.
    #[arg(long)]
    pub tol_psd: Option<f64>,
    /// Accepted excess of |entry| over one.
    #[arg(long)]
    pub tol_bound: Option<f64>,
    /// Accepted shortfall of the edge mean below b.
    #[arg(long)]
    pub tol_mean: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExperimentName {
    Distribution,
    Feasibility,
    Runtime,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Study to run.
    #[arg(value_enum)]
    pub name: ExperimentName,
    /// JSON configuration (see schemas/); defaults are used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Root seed, overriding the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip writing per-run matrices (distribution only).
    #[arg(long)]
    pub no_matrices: bool,
    /// Output directory.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for the replayed run.
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn canonical(path: &Path) -> CmdResult<PathBuf> {
    fs::canonicalize(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// JSON pointer of a deserialization error location.
fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { .. } | Segment::Unknown => {}
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

/// Parses a JSON document, reporting failures with a JSON pointer.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &Path) -> CmdResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        Failure::input(format!(
            "{}: invalid configuration at {}: {}",
            origin.display(),
            pointer(e.path()),
            e.inner()
        ))
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CmdResult<T> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    parse_json(&text, path)
}

/// Density implied by explicit model knobs, for when --density is absent.
fn implied_density(model: &GraphModel, p: usize) -> Option<f64> {
    let pairs = (p * (p - 1) / 2) as f64;
    let d = match model {
        GraphModel::WattsStrogatz { k: Some(k), .. } => *k as f64 / (p as f64 - 1.0),
        GraphModel::BarabasiAlbert { m: Some(m) } | GraphModel::Chordal { m: Some(m) } => {
            let m = (*m).min(p - 1);
            (m * (m - 1) / 2 + m * (p - m)) as f64 / pairs
        }
        GraphModel::StochasticBlockModel {
            block_sizes,
            p_intra: Some(pi),
            p_inter: Some(px),
        } => {
            let blocks = block_sizes.clone().unwrap_or_else(|| vec![p / 2, p - p / 2]);
            let within: usize = blocks.iter().map(|&s| s * s.saturating_sub(1) / 2).sum();
            (pi * within as f64 + px * (pairs - within as f64)) / pairs
        }
        _ => return None,
    };
    Some(d.clamp(f64::MIN_POSITIVE, 1.0))
}

impl ModelArgs {
    fn any_set(&self) -> bool {
        self.model.is_some()
            || self.density.is_some()
            || self.m.is_some()
            || self.k.is_some()
            || self.beta.is_some()
            || self.block_sizes.is_some()
            || self.p_intra.is_some()
            || self.p_inter.is_some()
    }

    fn to_params(&self) -> CmdResult<GraphModelParams> {
        let name = self.model.as_deref().ok_or_else(|| Failure::input("--model is required"))?;
        let p = self.p.ok_or_else(|| Failure::input("--p is required"))?;
        if p < 2 {
            return Err(Failure::input("--p must be at least 2"));
        }
        let model = match GraphModel::from_short_name(name)? {
            GraphModel::ErdosRenyi => GraphModel::ErdosRenyi,
            GraphModel::BarabasiAlbert { .. } => GraphModel::BarabasiAlbert { m: self.m },
            GraphModel::Chordal { .. } => GraphModel::Chordal { m: self.m },
            GraphModel::WattsStrogatz { beta, .. } => GraphModel::WattsStrogatz {
                k: self.k,
                beta: self.beta.unwrap_or(beta),
            },
            GraphModel::StochasticBlockModel { .. } => GraphModel::StochasticBlockModel {
                block_sizes: self.block_sizes.clone(),
                p_intra: self.p_intra,
                p_inter: self.p_inter,
            },
        };
        let density = match self.density {
            Some(d) => d,
            None => implied_density(&model, p).ok_or_else(|| {
                Failure::input(format!("--density is required for model {name} without explicit knobs"))
            })?,
        };
        let params = GraphModelParams::new(model, p, density)?;
        Ok(GraphModelParams {
            model: params.resolve(),
            ..params
        })
    }
}

impl SolverArgs {
    fn to_config(&self) -> CmdResult<SolverConfig> {
        let mut cfg: SolverConfig = match &self.solver_config {
            Some(path) => read_json(path)?,
            None => SolverConfig::default(),
        };
        if let Some(v) = self.b {
            cfg.b = v;
        }
        if let Some(v) = self.tol {
            cfg.tol_convergence = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iterations = v;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = self.stall_window {
            cfg.stall_window = v;
        }
        if let Some(v) = self.tol_gap_infeasible {
            cfg.tol_gap_infeasible = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn check_config(result: Result<(), (String, String)>, origin: &str) -> CmdResult<()> {
    result.map_err(|(ptr, msg)| Failure::input(format!("{origin}: invalid configuration at {ptr}: {msg}")))
}

fn load_experiment<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> CmdResult<T> {
    match path {
        Some(p) => read_json(p),
        None => Ok(T::default()),
    }
}

impl Command {
    /// Resolves flags and configuration files into replayable parameters.
    /// Returns `None` for `replay`, which carries its own parameters.
    pub fn to_params(&self) -> CmdResult<Option<Params>> {
        Ok(Some(match self {
            Command::Graph(a) => Params::Graph(GraphParams {
                graph: a.model.to_params()?,
                seed: a.seed,
            }),
            Command::Generate(a) => {
                let root = a.seed.unwrap_or(0);
                let (graph_seed, cbar_seed) = generate_seeds(root);
                let graph = match &a.graph {
                    Some(path) => {
                        if a.model.any_set() {
                            return Err(Failure::input("--graph cannot be combined with model flags"));
                        }
                        GraphSource::File {
                            path: canonical(path)?,
                            p: a.model.p,
                        }
                    }
                    None => GraphSource::Model {
                        graph: a.model.to_params()?,
                        seed: graph_seed,
                    },
                };
                let cbar = match a.cbar.as_str() {
                    "uniform" => CbarSource::Uniform { seed: cbar_seed },
                    path => CbarSource::File {
                        path: canonical(Path::new(path))?,
                    },
                };
                Params::Generate(GenerateParams {
                    graph,
                    cbar,
                    solver: a.solver.to_config()?,
                    seed: a.seed,
                })
            }
            Command::Baseline(a) => Params::Baseline(BaselineParams {
                method: a.method,
                graph: canonical(&a.graph)?,
                p: a.p,
                seed: a.seed,
                order: a.order.clone(),
            }),
            Command::Check(a) => {
                let mut tolerances = MembershipTolerances::default();
                for (slot, flag) in [
                    (&mut tolerances.diag, a.tol_diag),
                    (&mut tolerances.pattern, a.tol_pattern),
                    (&mut tolerances.psd, a.tol_psd),
                    (&mut tolerances.bound, a.tol_bound),
                    (&mut tolerances.mean, a.tol_mean),
                ] {
                    if let Some(v) = flag {
                        *slot = v;
                    }
                }
                Params::Check(CheckParams {
                    matrix: canonical(&a.matrix)?,
                    graph: canonical(&a.graph)?,
                    p: a.p,
                    b: a.b,
                    tolerances,
                })
            }
            Command::Experiment(a) => {
                let origin = a
                    .config
                    .as_deref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "defaults".into());
                let experiment = match a.name {
                    ExperimentName::Distribution => {
                        let mut cfg: DistributionConfig = load_experiment(&a.config)?;
                        cfg.seed = a.seed.unwrap_or(cfg.seed);
                        check_config(cfg.validate(), &origin)?;
                        ExperimentConfig::Distribution(cfg)
                    }
                    ExperimentName::Feasibility => {
                        let mut cfg: FeasibilityConfig = load_experiment(&a.config)?;
                        cfg.seed = a.seed.unwrap_or(cfg.seed);
                        check_config(cfg.validate(), &origin)?;
                        ExperimentConfig::Feasibility(cfg)
                    }
                    ExperimentName::Runtime => {
                        let mut cfg: RuntimeConfig = load_experiment(&a.config)?;
                        cfg.seed = a.seed.unwrap_or(cfg.seed);
                        check_config(cfg.validate(), &origin)?;
                        ExperimentConfig::Runtime(cfg)
                    }
                };
                Params::Experiment(ExperimentParams {
                    experiment,
                    write_matrices: !a.no_matrices,
                })
            }
            Command::Replay(_) => return Ok(None),
        }))
    }

    pub fn out_dir(&self) -> &Path {
        match self {
            Command::Graph(a) => &a.out_dir,
            Command::Generate(a) => &a.out_dir,
            Command::Baseline(a) => &a.out_dir,
            Command::Check(a) => &a.out_dir,
            Command::Experiment(a) => &a.out_dir,
            Command::Replay(a) => &a.out_dir,
        }
    }
}
