use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{median, quantile_sorted, run_jobs, spearman, write_records, write_rows, ExperimentRecord};
use crate::error::{Error, Result};
use crate::graph::{GraphModel, GraphModelParams};
use crate::rng::derive_seed;
use crate::solver::{sample_cbar_uniform, solve_projection, SolveStatus, SolverConfig};

pub const EXPERIMENT_ID: &str = "runtime";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuntimeConfig {
    pub models: Vec<GraphModel>,
    pub densities: Vec<f64>,
    pub runs: usize,
    pub p: usize,
    pub b: f64,
    pub seed: u64,
    pub solver: SolverConfig,
    /// Off by default so concurrent solves do not distort timings.
    pub parallel: bool,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self {
            models: ["er", "ws", "sbm", "chordal"]
                .iter()
                .map(|m| GraphModel::from_short_name(m).expect("known model"))
                .collect(),
            densities: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            runs: 50,
            p: 51,
            b: -1.0,
            seed: 0,
            solver: SolverConfig::default(),
            parallel: false,
        }
    }
}

impl RuntimeConfig {
    pub fn validate(&self) -> std::result::Result<(), (String, String)> {
        if self.models.is_empty() {
            return Err(("/models".into(), "at least one model is required".into()));
        }
        if self.densities.is_empty() {
            return Err(("/densities".into(), "at least one density is required".into()));
        }
        if self.runs == 0 {
            return Err(("/runs".into(), "runs must be at least 1".into()));
        }
        for (m, model) in self.models.iter().enumerate() {
            for (k, &d) in self.densities.iter().enumerate() {
                GraphModelParams::new(model.clone(), self.p, d).map_err(|e| {
                    if d > 0.0 && d <= 1.0 {
                        (format!("/models/{m}"), e.to_string())
                    } else {
                        (format!("/densities/{k}"), e.to_string())
                    }
                })?;
            }
        }
        self.solver
            .validate()
            .map_err(|e| ("/solver".into(), e.to_string()))
    }
}

/// Timing quartiles for one `(model, density)` group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingGroup {
    pub model: String,
    pub model_index: usize,
    pub d_index: usize,
    pub target_density: f64,
    pub mean_achieved_density: f64,
    pub runs: usize,
    pub solved: usize,
    pub min_s: f64,
    pub q1_s: f64,
    pub median_s: f64,
    pub q3_s: f64,
    pub max_s: f64,
    pub median_iterations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub model: String,
    pub model_index: usize,
    /// Spearman correlation between target density and median solve time.
    pub spearman_time: f64,
    /// Same against median iteration count (wall-clock free).
    pub spearman_iterations: f64,
}

#[derive(Debug, Clone)]
pub struct RuntimeResult {
    pub records: Vec<ExperimentRecord>,
    pub groups: Vec<TimingGroup>,
    pub trends: Vec<TrendSummary>,
}

impl RuntimeResult {
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        fs::create_dir_all(dir)?;
        write_records(&dir.join("records.csv"), &self.records)?;
        write_rows(&dir.join("timing.csv"), &self.groups)?;
        write_rows(&dir.join("trends.csv"), &self.trends)?;
        Ok(vec!["records.csv".into(), "timing.csv".into(), "trends.csv".into()])
    }
}

pub fn instance_seeds(root: u64, model_index: usize, d_index: usize, run: usize) -> (u64, u64) {
    let key = [model_index as u64, d_index as u64, run as u64];
    (
        derive_seed(root, "runtime/graph", &key),
        derive_seed(root, "runtime/cbar", &key),
    )
}

fn run_one(cfg: &RuntimeConfig, m: usize, d: usize, run: usize) -> Result<ExperimentRecord> {
    let model = &cfg.models[m];
    let density = cfg.densities[d];
    let params = GraphModelParams::new(model.clone(), cfg.p, density)?;
    let (gseed, cseed) = instance_seeds(cfg.seed, m, d, run);
    let g = params.generate(gseed)?;
    let cbar = sample_cbar_uniform(cfg.p, cseed);
    let solver = cfg.solver.clone().with_b(cfg.b);
    let start = Instant::now();
    let (status, iterations, gap) = match solve_projection(&cbar, &g, &solver) {
        Ok(out) => (out.status, Some(out.diagnostics.iterations), Some(out.diagnostics.gap)),
        Err(Error::InfeasibleConstraint(_)) => (SolveStatus::Infeasible, None, None),
        Err(e) => return Err(e),
    };
    let wall = start.elapsed().as_secs_f64();
    Ok(ExperimentRecord {
        experiment: EXPERIMENT_ID.into(),
        run,
        b_index: None,
        d_index: Some(d),
        model: model.short_name().into(),
        graph_params: serde_json::to_string(&params.resolve())?,
        p: cfg.p,
        target_density: density,
        achieved_density: g.density()?,
        edge_count: g.edge_count(),
        b: cfg.b,
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
        wall_time_s: wall,
    })
}

/// Times one solve per `(model, density, run)` and summarizes each group.
pub fn run_runtime_benchmark(cfg: &RuntimeConfig) -> Result<RuntimeResult> {
    cfg.validate()
        .map_err(|(ptr, msg)| Error::InvalidParameter(format!("{ptr}: {msg}")))?;
    let keys: Vec<(usize, usize, usize)> = (0..cfg.models.len())
        .flat_map(|m| {
            (0..cfg.densities.len()).flat_map(move |d| (0..cfg.runs).map(move |r| (m, d, r)))
        })
        .collect();
    let outputs = run_jobs(keys, cfg.parallel, |&(m, d, r)| run_one(cfg, m, d, r));
    let records: Vec<ExperimentRecord> = outputs.into_iter().collect::<Result<_>>()?;

    let mut groups = Vec::new();
    let mut trends = Vec::new();
    for (m, model) in cfg.models.iter().enumerate() {
        let mut medians = Vec::new();
        let mut iter_medians = Vec::new();
        for (d, &density) in cfg.densities.iter().enumerate() {
            // Records are in (model, density, run) key order.
            let first = (m * cfg.densities.len() + d) * cfg.runs;
            let rows = &records[first..first + cfg.runs];
            let mut times: Vec<f64> = rows.iter().map(|r| r.wall_time_s).collect();
            times.sort_by(f64::total_cmp);
            let iters: Vec<f64> = rows
                .iter()
                .map(|r| r.iterations.unwrap_or(0) as f64)
                .collect();
            let group = TimingGroup {
                model: model.short_name().into(),
                model_index: m,
                d_index: d,
                target_density: density,
                mean_achieved_density: rows.iter().map(|r| r.achieved_density).sum::<f64>()
                    / rows.len() as f64,
                runs: rows.len(),
                solved: rows
                    .iter()
                    .filter(|r| r.status == SolveStatus::Solved.as_str())
                    .count(),
                min_s: times[0],
                q1_s: quantile_sorted(&times, 0.25),
                median_s: quantile_sorted(&times, 0.5),
                q3_s: quantile_sorted(&times, 0.75),
                max_s: times[times.len() - 1],
                median_iterations: median(&iters),
            };
            medians.push(group.median_s);
            iter_medians.push(group.median_iterations);
            groups.push(group);
        }
        trends.push(TrendSummary {
            model: model.short_name().into(),
            model_index: m,
            spearman_time: spearman(&cfg.densities, &medians),
            spearman_iterations: spearman(&cfg.densities, &iter_medians),
        });
    }
    Ok(RuntimeResult {
        records,
        groups,
        trends,
    })
}
