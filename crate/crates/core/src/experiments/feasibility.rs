use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{run_jobs, write_records, write_rows, ExperimentRecord};
use crate::error::{Error, Result};
use crate::graph::{GraphModel, GraphModelParams};
use crate::rng::derive_seed;
use crate::solver::{sample_cbar_uniform, solve_projection, SolveStatus, SolverConfig};

pub const EXPERIMENT_ID: &str = "feasibility";

/// Default iteration cap for grid solves. Some feasible instances near the
/// frontier need well over the solver's general default to certify.
pub const DEFAULT_MAX_ITERATIONS: usize = 200_000;

/// `(b, d)` grid for one graph model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub b_values: Vec<f64>,
    pub d_values: Vec<f64>,
    pub runs: usize,
    pub model: GraphModel,
    pub p: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            b_values: std::iter::once(-1.0)
                .chain((0..10).map(|k| k as f64 / 10.0))
                .collect(),
            d_values: (1..=10).map(|k| k as f64 / 10.0).collect(),
            runs: 10,
            model: GraphModel::ErdosRenyi,
            p: 51,
        }
    }
}

fn ascending(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl GridSpec {
    pub fn validate(&self) -> std::result::Result<(), (String, String)> {
        if self.b_values.is_empty() || !ascending(&self.b_values) {
            return Err(("/b_values".into(), "must be a nonempty ascending list".into()));
        }
        if self.d_values.is_empty() || !ascending(&self.d_values) {
            return Err(("/d_values".into(), "must be a nonempty ascending list".into()));
        }
        if let Some(k) = self.d_values.iter().position(|&d| !(d > 0.0 && d <= 1.0)) {
            return Err((format!("/d_values/{k}"), "density must lie in (0, 1]".into()));
        }
        if self.runs == 0 {
            return Err(("/runs".into(), "runs must be at least 1".into()));
        }
        if self.p < 3 {
            return Err(("/p".into(), "p must be at least 3".into()));
        }
        for (k, &d) in self.d_values.iter().enumerate() {
            GraphModelParams::new(self.model.clone(), self.p, d)
                .map_err(|e| (format!("/d_values/{k}"), e.to_string()))?;
        }
        Ok(())
    }
}

/// Serialized flat: grid fields sit next to `seed`, `solver` and `parallel`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "FlatFeasibilityConfig", into = "FlatFeasibilityConfig")]
pub struct FeasibilityConfig {
    pub grid: GridSpec,
    pub seed: u64,
    pub solver: SolverConfig,
    pub parallel: bool,
}

impl Default for FeasibilityConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            seed: 0,
            solver: SolverConfig {
                max_iterations: DEFAULT_MAX_ITERATIONS,
                ..SolverConfig::default()
            },
            parallel: true,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FlatFeasibilityConfig {
    b_values: Vec<f64>,
    d_values: Vec<f64>,
    runs: usize,
    model: GraphModel,
    p: usize,
    seed: u64,
    solver: SolverConfig,
    parallel: bool,
}

impl Default for FlatFeasibilityConfig {
    fn default() -> Self {
        FeasibilityConfig::default().into()
    }
}

impl From<FeasibilityConfig> for FlatFeasibilityConfig {
    fn from(c: FeasibilityConfig) -> Self {
        let GridSpec {
            b_values,
            d_values,
            runs,
            model,
            p,
        } = c.grid;
        Self {
            b_values,
            d_values,
            runs,
            model,
            p,
            seed: c.seed,
            solver: c.solver,
            parallel: c.parallel,
        }
    }
}

impl From<FlatFeasibilityConfig> for FeasibilityConfig {
    fn from(f: FlatFeasibilityConfig) -> Self {
        Self {
            grid: GridSpec {
                b_values: f.b_values,
                d_values: f.d_values,
                runs: f.runs,
                model: f.model,
                p: f.p,
            },
            seed: f.seed,
            solver: f.solver,
            parallel: f.parallel,
        }
    }
}

impl FeasibilityConfig {
    pub fn validate(&self) -> std::result::Result<(), (String, String)> {
        self.grid.validate()?;
        self.solver
            .validate()
            .map_err(|e| ("/solver".into(), e.to_string()))
    }
}

/// Success proportion for one `(b, d)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub model: String,
    pub b_index: usize,
    pub d_index: usize,
    pub b: f64,
    pub target_density: f64,
    pub mean_achieved_density: f64,
    pub runs: usize,
    pub solved: usize,
    pub infeasible: usize,
    pub max_iterations: usize,
    pub proportion: f64,
}

#[derive(Debug, Clone)]
pub struct FeasibilityResult {
    pub records: Vec<ExperimentRecord>,
    /// Cells in `(d_index, b_index)` order.
    pub cells: Vec<CellSummary>,
}

impl FeasibilityResult {
    pub fn cell(&self, b_index: usize, d_index: usize) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.b_index == b_index && c.d_index == d_index)
    }

    /// True when, for every density, proportions never increase with `b`.
    pub fn is_monotone_in_b(&self) -> bool {
        let max_d = self.cells.iter().map(|c| c.d_index).max().unwrap_or(0);
        (0..=max_d).all(|d| {
            let mut row: Vec<&CellSummary> = self.cells.iter().filter(|c| c.d_index == d).collect();
            row.sort_by_key(|c| c.b_index);
            row.windows(2).all(|w| w[1].proportion <= w[0].proportion)
        })
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        fs::create_dir_all(dir)?;
        write_records(&dir.join("records.csv"), &self.records)?;
        write_rows(&dir.join("cells.csv"), &self.cells)?;
        Ok(vec!["records.csv".into(), "cells.csv".into()])
    }
}

/// Graph and reference-matrix seeds depend on the density index and run
/// only, so every `b` column of a row solves the same instances.
pub fn instance_seeds(root: u64, d_index: usize, run: usize) -> (u64, u64) {
    let key = [d_index as u64, run as u64];
    (
        derive_seed(root, "feasibility/graph", &key),
        derive_seed(root, "feasibility/cbar", &key),
    )
}

fn run_cell(cfg: &FeasibilityConfig, b_index: usize, d_index: usize, run: usize) -> Result<ExperimentRecord> {
    let grid = &cfg.grid;
    let (b, d) = (grid.b_values[b_index], grid.d_values[d_index]);
    let params = GraphModelParams::new(grid.model.clone(), grid.p, d)?;
    let (gseed, cseed) = instance_seeds(cfg.seed, d_index, run);
    let g = params.generate(gseed)?;
    let cbar = sample_cbar_uniform(grid.p, cseed);
    let start = Instant::now();
    let solver = cfg.solver.clone().with_b(b);
    let (status, iterations, gap) = match solve_projection(&cbar, &g, &solver) {
        Ok(out) => (out.status, Some(out.diagnostics.iterations), Some(out.diagnostics.gap)),
        Err(Error::InfeasibleConstraint(_)) => (SolveStatus::Infeasible, None, None),
        Err(e) => return Err(e),
    };
    Ok(ExperimentRecord {
        experiment: EXPERIMENT_ID.into(),
        run,
        b_index: Some(b_index),
        d_index: Some(d_index),
        model: grid.model.short_name().into(),
        graph_params: serde_json::to_string(&params.resolve())?,
        p: grid.p,
        target_density: d,
        achieved_density: g.density()?,
        edge_count: g.edge_count(),
        b,
        graph_seed: gseed,
        cbar_seed: Some(cseed),
        method_seed: None,
        method: "proposed".into(),
        status: status.as_str().into(),
        iterations,
        gap,
        min_eig: None,
        entry_count: None,
        entry_mean: None,
        entry_median_abs: None,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Solves `runs` random instances in every `(b, d)` cell and reports the
/// fraction that reached `Solved`.
pub fn run_feasibility_grid(cfg: &FeasibilityConfig) -> Result<FeasibilityResult> {
    cfg.validate()
        .map_err(|(ptr, msg)| Error::InvalidParameter(format!("{ptr}: {msg}")))?;
    let grid = &cfg.grid;
    let keys: Vec<(usize, usize, usize)> = (0..grid.d_values.len())
        .flat_map(|d| {
            (0..grid.b_values.len()).flat_map(move |b| (0..grid.runs).map(move |r| (d, b, r)))
        })
        .collect();
    let outputs = run_jobs(keys, cfg.parallel, |&(d, b, r)| run_cell(cfg, b, d, r));
    let records: Vec<ExperimentRecord> = outputs.into_iter().collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for d_index in 0..grid.d_values.len() {
        for b_index in 0..grid.b_values.len() {
            let rows: Vec<&ExperimentRecord> = records
                .iter()
                .filter(|r| r.b_index == Some(b_index) && r.d_index == Some(d_index))
                .collect();
            let count = |s: SolveStatus| rows.iter().filter(|r| r.status == s.as_str()).count();
            let solved = count(SolveStatus::Solved);
            cells.push(CellSummary {
                model: grid.model.short_name().into(),
                b_index,
                d_index,
                b: grid.b_values[b_index],
                target_density: grid.d_values[d_index],
                mean_achieved_density: rows.iter().map(|r| r.achieved_density).sum::<f64>()
                    / rows.len() as f64,
                runs: rows.len(),
                solved,
                infeasible: count(SolveStatus::Infeasible),
                max_iterations: count(SolveStatus::MaxIterations),
                proportion: solved as f64 / rows.len() as f64,
            });
        }
    }
    Ok(FeasibilityResult { records, cells })
}
