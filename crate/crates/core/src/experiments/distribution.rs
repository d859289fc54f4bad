use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{quantile_sorted, run_jobs, write_records, write_rows, ExperimentRecord};
use crate::baselines::{diagonal_dominance, partial_orthogonalization};
use crate::error::{Error, Result};
use crate::graph::{erdos_renyi, Graph};
use crate::io::{format_f64, write_matrix};
use crate::projections::{min_eigenvalue, SymmetricMatrix};
use crate::rng::derive_seed;
use crate::solver::{sample_cbar_uniform, solve_projection, SolverConfig};

pub const EXPERIMENT_ID: &str = "distribution";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Proposed,
    DiagonalDominance,
    PartialOrthogonalization,
}

impl Method {
    pub const ALL: [Method; 3] = [
        Method::Proposed,
        Method::DiagonalDominance,
        Method::PartialOrthogonalization,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::DiagonalDominance => "diagonal_dominance",
            Method::PartialOrthogonalization => "partial_orthogonalization",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistributionConfig {
    pub p: usize,
    pub density: f64,
    pub runs: usize,
    pub b: f64,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub solver: SolverConfig,
    pub parallel: bool,
}

impl Default for DistributionConfig {
    fn default() -> Self {
        Self {
            p: 51,
            density: 0.5,
            runs: 50,
            b: -1.0,
            methods: Method::ALL.to_vec(),
            seed: 0,
            solver: SolverConfig::default(),
            parallel: true,
        }
    }
}

impl DistributionConfig {
    /// Semantic checks; errors name the offending field as a JSON pointer.
    pub fn validate(&self) -> std::result::Result<(), (String, String)> {
        if self.p < 2 {
            return Err(("/p".into(), "p must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return Err(("/density".into(), "density must lie in [0, 1]".into()));
        }
        if self.runs == 0 {
            return Err(("/runs".into(), "runs must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(("/methods".into(), "at least one method is required".into()));
        }
        self.solver
            .validate()
            .map_err(|e| ("/solver".into(), e.to_string()))
    }
}

/// One entry of a generated matrix at an edge position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryRow {
    pub run: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Edge-position entries produced by one method over all runs. Each edge
/// appears twice, as `(i, j)` and `(j, i)`.
#[derive(Debug, Clone)]
pub struct Population {
    pub method: Method,
    pub entries: Vec<EntryRow>,
}

impl Population {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySummary {
    pub method: Method,
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub median_abs: f64,
}

impl EntrySummary {
    pub fn from_values(method: Method, values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        abs.sort_by(f64::total_cmp);
        Self {
            method,
            count: values.len(),
            mean,
            std_dev: var.sqrt(),
            q1: quantile_sorted(&sorted, 0.25),
            median: quantile_sorted(&sorted, 0.5),
            q3: quantile_sorted(&sorted, 0.75),
            median_abs: quantile_sorted(&abs, 0.5),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DistributionResult {
    pub records: Vec<ExperimentRecord>,
    pub populations: Vec<Population>,
    pub summaries: Vec<EntrySummary>,
    /// Generated matrices keyed by `(run, method)`, in key order.
    pub matrices: Vec<((usize, Method), SymmetricMatrix)>,
}

struct RunOutput {
    record: ExperimentRecord,
    matrix: Option<SymmetricMatrix>,
    graph: Graph,
}

pub fn graph_seed(root: u64, run: usize) -> u64 {
    derive_seed(root, "distribution/graph", &[run as u64])
}

pub fn cbar_seed(root: u64, run: usize) -> u64 {
    derive_seed(root, "distribution/cbar", &[run as u64])
}

pub fn method_seed(root: u64, method: Method, run: usize) -> u64 {
    derive_seed(root, &format!("distribution/{}", method.as_str()), &[run as u64])
}

fn run_one(cfg: &DistributionConfig, run: usize, method: Method) -> Result<RunOutput> {
    let gseed = graph_seed(cfg.seed, run);
    let g = erdos_renyi(cfg.p, cfg.density, gseed)?;
    let start = Instant::now();
    let mut record = ExperimentRecord {
        experiment: EXPERIMENT_ID.into(),
        run,
        b_index: None,
        d_index: None,
        model: "er".into(),
        graph_params: r#"{"model":"er"}"#.into(),
        p: cfg.p,
        target_density: cfg.density,
        achieved_density: g.density()?,
        edge_count: g.edge_count(),
        b: cfg.b,
        graph_seed: gseed,
        cbar_seed: None,
        method_seed: None,
        method: method.as_str().into(),
        status: "ok".into(),
        iterations: None,
        gap: None,
        min_eig: None,
        entry_count: None,
        entry_mean: None,
        entry_median_abs: None,
        wall_time_s: 0.0,
    };
    let matrix = match method {
        Method::Proposed => {
            let cseed = cbar_seed(cfg.seed, run);
            record.cbar_seed = Some(cseed);
            let cbar = sample_cbar_uniform(cfg.p, cseed);
            let solver = cfg.solver.clone().with_b(cfg.b);
            match solve_projection(&cbar, &g, &solver) {
                Ok(out) => {
                    record.status = out.status.as_str().into();
                    record.iterations = Some(out.diagnostics.iterations);
                    record.gap = Some(out.diagnostics.gap);
                    out.matrix
                }
                Err(Error::InfeasibleConstraint(_)) => {
                    record.status = "infeasible".into();
                    None
                }
                Err(e) => return Err(e),
            }
        }
        Method::DiagonalDominance => {
            let s = method_seed(cfg.seed, method, run);
            record.method_seed = Some(s);
            Some(diagonal_dominance(&g, s))
        }
        Method::PartialOrthogonalization => {
            let s = method_seed(cfg.seed, method, run);
            record.method_seed = Some(s);
            let order: Vec<usize> = (0..cfg.p).collect();
            Some(partial_orthogonalization(&g, s, &order)?)
        }
    };
    if let Some(m) = &matrix {
        let entries = m.edge_entries(&g);
        if !entries.is_empty() {
            let s = EntrySummary::from_values(method, &entries);
            record.entry_count = Some(2 * entries.len());
            record.entry_mean = Some(s.mean);
            record.entry_median_abs = Some(s.median_abs);
        }
        record.min_eig = Some(min_eigenvalue(m)?);
    }
    record.wall_time_s = start.elapsed().as_secs_f64();
    Ok(RunOutput {
        record,
        matrix,
        graph: g,
    })
}

/// Generates one Erdős–Rényi graph per run and one matrix per method on it,
/// collecting every edge-position entry.
pub fn run_distribution_experiment(cfg: &DistributionConfig) -> Result<DistributionResult> {
    cfg.validate()
        .map_err(|(ptr, msg)| Error::InvalidParameter(format!("{ptr}: {msg}")))?;
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let keys: Vec<(usize, Method)> = (0..cfg.runs)
        .flat_map(|r| methods.iter().map(move |&m| (r, m)))
        .collect();
    let outputs = run_jobs(keys.clone(), cfg.parallel, |&(run, method)| {
        run_one(cfg, run, method)
    });

    let mut records = Vec::with_capacity(outputs.len());
    let mut matrices = Vec::new();
    let mut populations: Vec<Population> = methods
        .iter()
        .map(|&method| Population {
            method,
            entries: Vec::new(),
        })
        .collect();
    for (key, out) in keys.into_iter().zip(outputs) {
        let out = out?;
        if let Some(m) = &out.matrix {
            let pop = populations
                .iter_mut()
                .find(|pop| pop.method == key.1)
                .expect("population per method");
            for &(i, j) in out.graph.edges() {
                let value = m.get(i, j);
                pop.entries.push(EntryRow { run: key.0, i, j, value });
                pop.entries.push(EntryRow { run: key.0, i: j, j: i, value });
            }
            matrices.push((key, m.clone()));
        }
        records.push(out.record);
    }
    let summaries = populations
        .iter()
        .filter(|pop| !pop.entries.is_empty())
        .map(|pop| EntrySummary::from_values(pop.method, &pop.values()))
        .collect();
    Ok(DistributionResult {
        records,
        populations,
        summaries,
        matrices,
    })
}

pub const POPULATION_HEADER_NOTE: &str =
    "# edge-position entries; each unordered edge {i,j} appears twice, as (i,j) and (j,i); 0-based nodes";

pub fn population_file_name(method: Method) -> String {
    format!("population_{}.csv", method.as_str())
}

pub fn matrix_file_name(run: usize, method: Method) -> String {
    format!("matrices/{}_run{run:03}.csv", method.as_str())
}

impl DistributionResult {
    /// Writes `records.csv`, `summary.csv`, one population file per method
    /// and, when `with_matrices`, every matrix under `matrices/`. Returns the
    /// relative paths written.
    pub fn write(&self, dir: &Path, with_matrices: bool) -> Result<Vec<String>> {
        fs::create_dir_all(dir)?;
        let mut written = vec!["records.csv".to_string(), "summary.csv".to_string()];
        write_records(&dir.join("records.csv"), &self.records)?;
        write_rows(&dir.join("summary.csv"), &self.summaries)?;
        for pop in &self.populations {
            let name = population_file_name(pop.method);
            let mut text = String::from(POPULATION_HEADER_NOTE);
            text.push_str("\nrun,i,j,value\n");
            for e in &pop.entries {
                let _ = writeln!(text, "{},{},{},{}", e.run, e.i, e.j, format_f64(e.value));
            }
            fs::write(dir.join(&name), text)?;
            written.push(name);
        }
        if with_matrices {
            fs::create_dir_all(dir.join("matrices"))?;
            for ((run, method), m) in &self.matrices {
                let name = matrix_file_name(*run, *method);
                write_matrix(&dir.join(&name), m)?;
                written.push(name);
            }
        }
        Ok(written)
    }
}
