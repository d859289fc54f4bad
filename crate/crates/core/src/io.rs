//! File formats: dense matrix CSV, edge-list CSV with a JSON sidecar, solver
//! diagnostics JSON, and the run manifest written by every command.
//!
//! Node indices are 0-based everywhere.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::projections::SymmetricMatrix;
use crate::solver::{SolveOutcome, SolveStatus};

/// Decimal with 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per matrix row, entries separated by commas, no header.
pub fn matrix_to_csv(m: &SymmetricMatrix) -> String {
    let mut out = String::new();
    let p = m.dim();
    for i in 0..p {
        for j in 0..p {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_f64(m.get(i, j)));
        }
        out.push('\n');
    }
    out
}

/// Parses a dense square matrix. Rows and columns in error messages are
/// 1-based. The matrix must be exactly symmetric with finite entries.
pub fn matrix_from_csv(text: &str) -> Result<SymmetricMatrix> {
    let rows: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    let p = rows.len();
    if p == 0 {
        return Err(Error::Parse {
            row: 1,
            column: 1,
            message: "empty matrix".into(),
        });
    }
    let mut m = DMatrix::<f64>::zeros(p, p);
    for (i, line) in rows.iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != p {
            return Err(Error::Parse {
                row: i + 1,
                column: fields.len().min(p) + 1,
                message: format!("expected {p} values, found {}", fields.len()),
            });
        }
        for (j, field) in fields.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                row: i + 1,
                column: j + 1,
                message: format!("not a number: {:?}", field.trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: i + 1,
                    column: j + 1,
                    message: "non-finite value".into(),
                });
            }
            m[(i, j)] = v;
        }
    }
    for i in 0..p {
        for j in i + 1..p {
            if m[(i, j)] != m[(j, i)] {
                return Err(Error::Parse {
                    row: j + 1,
                    column: i + 1,
                    message: format!(
                        "matrix is not symmetric: ({}, {}) = {} but ({}, {}) = {}",
                        i + 1,
                        j + 1,
                        m[(i, j)],
                        j + 1,
                        i + 1,
                        m[(j, i)]
                    ),
                });
            }
        }
    }
    SymmetricMatrix::from_dmatrix(m)
}

pub fn write_matrix(path: &Path, m: &SymmetricMatrix) -> Result<()> {
    fs::write(path, matrix_to_csv(m))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<SymmetricMatrix> {
    matrix_from_csv(&fs::read_to_string(path)?)
}

pub const EDGE_HEADER: &str = "i,j";
pub const EDGE_NOTE: &str = "# undirected edges, 0-based node indices, i < j";

pub fn edges_to_csv(g: &Graph) -> String {
    let mut out = format!("{EDGE_NOTE}\n{EDGE_HEADER}\n");
    for &(i, j) in g.edges() {
        let _ = writeln!(out, "{i},{j}");
    }
    out
}

/// Parses an edge list with header `i,j`. Lines starting with `#` are
/// comments. Rows in errors are 1-based file lines.
pub fn edges_from_csv(text: &str, p: usize) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#'));
    match lines.next() {
        Some((_, h)) if h.trim().replace(' ', "") == EDGE_HEADER => {}
        other => {
            return Err(Error::Parse {
                row: other.map_or(1, |(k, _)| k + 1),
                column: 1,
                message: format!("expected header {EDGE_HEADER:?}"),
            })
        }
    }
    let mut edges = Vec::new();
    for (k, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                row: k + 1,
                column: 1,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let mut pair = [0usize; 2];
        for (c, f) in fields.iter().enumerate() {
            let v: usize = f.trim().parse().map_err(|_| Error::Parse {
                row: k + 1,
                column: c + 1,
                message: format!("not a node index: {:?}", f.trim()),
            })?;
            if v >= p {
                return Err(Error::Parse {
                    row: k + 1,
                    column: c + 1,
                    message: format!("node {v} out of range for p = {p}"),
                });
            }
            pair[c] = v;
        }
        if pair[0] == pair[1] {
            return Err(Error::Parse {
                row: k + 1,
                column: 2,
                message: "self-loop".into(),
            });
        }
        edges.push((pair[0], pair[1]));
    }
    Graph::new(p, edges)
}

/// JSON sidecar stored next to an edge list (`edges.csv` → `edges.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSidecar {
    pub p: usize,
    pub edge_count: usize,
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chordal: Option<bool>,
}

impl GraphSidecar {
    pub fn describe(g: &Graph) -> Self {
        Self {
            p: g.node_count(),
            edge_count: g.edge_count(),
            density: g.density().ok(),
            target_density: None,
            chordal: None,
        }
    }
}

pub fn sidecar_path(edge_csv: &Path) -> PathBuf {
    edge_csv.with_extension("json")
}

pub fn write_graph(path: &Path, g: &Graph, sidecar: &GraphSidecar) -> Result<()> {
    fs::write(path, edges_to_csv(g))?;
    fs::write(sidecar_path(path), to_json_pretty(sidecar)?)?;
    Ok(())
}

/// Reads an edge list; the node count comes from `p` when given, otherwise
/// from the sidecar.
pub fn read_graph(path: &Path, p: Option<usize>) -> Result<Graph> {
    let p = match p {
        Some(p) => p,
        None => {
            let side = sidecar_path(path);
            let text = fs::read_to_string(&side).map_err(|e| {
                Error::InvalidParameter(format!(
                    "node count not given and sidecar {} unreadable: {e}",
                    side.display()
                ))
            })?;
            serde_json::from_str::<GraphSidecar>(&text)?.p
        }
    };
    edges_from_csv(&fs::read_to_string(path)?, p)
}

/// Solver diagnostics as written next to a generated matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsFile {
    pub status: SolveStatus,
    pub iterations: usize,
    pub gap: f64,
    pub min_eig_pre: Option<f64>,
    pub min_eig_post: Option<f64>,
    pub objective: Option<f64>,
    pub wall_time_s: f64,
    pub b: f64,
    pub b_adjusted: f64,
    pub epsilon: f64,
    pub seed: Option<u64>,
}

impl DiagnosticsFile {
    pub fn from_outcome(outcome: &SolveOutcome, seed: Option<u64>) -> Self {
        let d = &outcome.diagnostics;
        Self {
            status: outcome.status,
            iterations: d.iterations,
            gap: d.gap,
            min_eig_pre: d.min_eig_pre,
            min_eig_post: d.min_eig_post,
            objective: d.objective,
            wall_time_s: d.wall_time_s,
            b: d.b,
            b_adjusted: d.b_adjusted,
            epsilon: d.epsilon,
            seed,
        }
    }
}

/// Record of one command invocation, sufficient to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full parameter map of the command, replayable as-is.
    pub parameters: serde_json::Value,
    pub root_seed: Option<u64>,
    pub artifact_version: String,
    pub started_at: String,
    pub finished_at: String,
    /// Output file names relative to the output directory.
    pub outputs: Vec<String>,
    /// Command-specific extras (per-cell seeds, verification flags, ...).
    #[serde(default)]
    pub extra: serde_json::Value,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_pretty(value)?)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
