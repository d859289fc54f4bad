//! Experiment harness: entry distributions per generator, feasibility over a
//! `(b, d)` grid, and solve time against graph density.
//!
//! Every run is a pure function of its configuration and root seed, apart
//! from wall-clock columns. Per-run seeds are derived with
//! [`crate::rng::derive_seed`] from the root seed, a stream tag, and the
//! run's grid indices, so any subset of a grid can be recomputed alone.
//! Jobs may execute concurrently; tables are always assembled in job-key
//! order.

mod distribution;
mod feasibility;
mod runtime;

pub use distribution::{
    matrix_file_name, population_file_name, run_distribution_experiment, DistributionConfig,
    DistributionResult, EntryRow, EntrySummary, Method, Population, POPULATION_HEADER_NOTE,
};
pub use feasibility::{run_feasibility_grid, CellSummary, FeasibilityConfig, FeasibilityResult, GridSpec};
pub use runtime::{run_runtime_benchmark, RuntimeConfig, RuntimeResult, TimingGroup, TrendSummary};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One row of an experiment table. Together with the experiment's
/// configuration it pins down the run completely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub run: usize,
    pub b_index: Option<usize>,
    pub d_index: Option<usize>,
    pub model: String,
    /// Resolved model knobs as JSON.
    pub graph_params: String,
    pub p: usize,
    pub target_density: f64,
    pub achieved_density: f64,
    pub edge_count: usize,
    pub b: f64,
    pub graph_seed: u64,
    pub cbar_seed: Option<u64>,
    pub method_seed: Option<u64>,
    pub method: String,
    pub status: String,
    pub iterations: Option<usize>,
    pub gap: Option<f64>,
    pub min_eig: Option<f64>,
    pub entry_count: Option<usize>,
    pub entry_mean: Option<f64>,
    pub entry_median_abs: Option<f64>,
    pub wall_time_s: f64,
}

pub(crate) fn write_records(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub(crate) fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Linear-interpolation quantile of sorted data (`q` in `[0, 1]`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut end = k;
        while end + 1 < idx.len() && values[idx[end + 1]] == values[idx[k]] {
            end += 1;
        }
        let avg = (k + end) as f64 / 2.0 + 1.0;
        for &i in &idx[k..=end] {
            out[i] = avg;
        }
        k = end + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties. `NaN` when either
/// side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Runs `job` over `keys`, in parallel when asked, returning results in key
/// order.
pub(crate) fn run_jobs<K, T, F>(keys: Vec<K>, parallel: bool, job: F) -> Vec<T>
where
    K: Send + Sync,
    T: Send,
    F: Fn(&K) -> T + Send + Sync,
{
    use rayon::prelude::*;
    if parallel {
        keys.par_iter().map(&job).collect()
    } else {
        keys.iter().map(&job).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn spearman_examples() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 0.5]) + 1.0).abs() < 1e-15);
        // Ties: ranks of y are (1.5, 1.5, 3).
        let r = spearman(&[1.0, 2.0, 3.0], &[5.0, 5.0, 9.0]);
        assert!((r - 0.866_025_403_784_438_6).abs() < 1e-12);
        assert!(spearman(&[1.0, 2.0], &[1.0, 1.0]).is_nan());
    }
}
