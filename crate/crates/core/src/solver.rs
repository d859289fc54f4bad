//! Frobenius projection of a reference matrix onto the graph-patterned
//! correlation matrices with a lower bound on the mean edge correlation.
//!
//! The problem is solved with Dykstra's alternating projections between the
//! PSD cone and the polyhedron `{diag = 1, zeros off the pattern, edge mean
//! >= b}`. The reported matrix is the polyhedron-side iterate (pattern and
//! diagonal exact) after a small ridge `(C + εI) / (1 + ε)` that lifts the
//! residual negative eigenvalue.

use std::collections::VecDeque;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::projections::{
    apply_mean_halfspace, apply_pattern_diag, edge_mean, mean_constraint_active, min_eigenvalue,
    psd_part, SymmetricMatrix,
};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Bound on both the iterate change and the inter-set gap (Frobenius).
    pub tol_convergence: f64,
    pub max_iterations: usize,
    /// Ridge added by the post-processing step.
    pub epsilon: f64,
    /// Lower bound on the mean edge entry; `b <= -1` disables it.
    pub b: f64,
    /// Number of trailing iterations inspected by the infeasibility test.
    pub stall_window: usize,
    /// Gap above which a stalled run is declared infeasible.
    pub tol_gap_infeasible: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_convergence: 1e-7,
            max_iterations: 20_000,
            epsilon: 1e-8,
            b: -1.0,
            stall_window: 200,
            tol_gap_infeasible: 1e-4,
        }
    }
}

/// Relative gap variation below which the gap counts as stalled.
const STALL_RELATIVE_CHANGE: f64 = 1e-3;

impl SolverConfig {
    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("tol_convergence", self.tol_convergence)?;
        positive("tol_gap_infeasible", self.tol_gap_infeasible)?;
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        if self.stall_window == 0 {
            return Err(Error::InvalidParameter("stall_window must be >= 1".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            )));
        }
        if !self.b.is_finite() {
            return Err(Error::InvalidParameter("b must be finite".into()));
        }
        Ok(())
    }

    /// Bound actually imposed during iteration, `b (1 + ε)`, so that the
    /// post-processed matrix keeps a mean of at least `b`.
    pub fn b_adjusted(&self) -> f64 {
        self.b * (1.0 + self.epsilon)
    }

    /// Most negative eigenvalue accepted for the projection before the
    /// ridge; with `λ >= -ε` the ridge yields a PSD matrix.
    fn psd_slack(&self) -> f64 {
        if self.epsilon > 0.0 {
            self.epsilon
        } else {
            self.tol_convergence
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Solved,
    Infeasible,
    MaxIterations,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Solved => "solved",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    /// Final `||y_k - x_{k+1}||_F` between the PSD and polyhedron iterates.
    pub gap: f64,
    /// Smallest eigenvalue of the projection before the ridge.
    pub min_eig_pre: Option<f64>,
    /// Smallest eigenvalue of the returned matrix.
    pub min_eig_post: Option<f64>,
    /// `½ ||C - C̄||²_F` for the projection before the ridge.
    pub objective: Option<f64>,
    pub wall_time_s: f64,
    pub b: f64,
    pub b_adjusted: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Post-processed correlation matrix, present when solved.
    pub matrix: Option<SymmetricMatrix>,
    /// Converged polyhedron iterate before the ridge, present when solved.
    pub projection: Option<SymmetricMatrix>,
    pub diagnostics: SolveDiagnostics,
}

impl SolveOutcome {
    pub fn is_solved(&self) -> bool {
        self.status == SolveStatus::Solved
    }
}

/// Reference matrix with unit diagonal and strict upper triangle i.i.d.
/// uniform on `[-1, 1]`, drawn row by row.
pub fn sample_cbar_uniform(p: usize, seed: u64) -> SymmetricMatrix {
    let mut rng = rng_from_seed(seed);
    SymmetricMatrix::from_upper_fn(p, |i, j| {
        if i == j {
            1.0
        } else {
            rng.random_range(-1.0..=1.0)
        }
    })
}

/// `((C̃ + εI) / (1 + ε), b (1 + ε))`. Eigenvalues map to
/// `(λ + ε) / (1 + ε)`; the diagonal stays at exactly one and zeros stay zero.
pub fn postprocess_epsilon(
    c_tilde: &SymmetricMatrix,
    epsilon: f64,
    b: f64,
) -> (SymmetricMatrix, f64) {
    if epsilon == 0.0 {
        return (c_tilde.clone(), b);
    }
    let scale = 1.0 + epsilon;
    let p = c_tilde.dim();
    let out = SymmetricMatrix::from_upper_fn(p, |i, j| {
        if i == j {
            (c_tilde.get(i, i) + epsilon) / scale
        } else {
            c_tilde.get(i, j) / scale
        }
    });
    (out, b * scale)
}

/// Dykstra's algorithm for `argmin ½||C - C̄||²_F` over the patterned
/// correlation matrices with edge mean at least `b (1 + ε)`.
pub fn solve_projection(
    cbar: &SymmetricMatrix,
    g: &Graph,
    config: &SolverConfig,
) -> Result<SolveOutcome> {
    config.validate()?;
    let p = g.node_count();
    if cbar.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: cbar.dim(),
        });
    }
    if cbar.as_matrix().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("reference matrix has non-finite entries".into()));
    }
    let b_adj = config.b_adjusted();
    if mean_constraint_active(b_adj) && g.edge_count() == 0 {
        return Err(Error::InfeasibleConstraint(format!(
            "mean bound b = {} needs at least one edge",
            config.b
        )));
    }

    let start = Instant::now();
    let target = cbar.as_matrix();
    let mut x: DMatrix<f64> = target.clone();
    let mut p_corr = DMatrix::<f64>::zeros(p, p);
    let mut q_corr = DMatrix::<f64>::zeros(p, p);
    let mut gaps: VecDeque<f64> = VecDeque::with_capacity(config.stall_window + 1);
    let mut gap = f64::INFINITY;
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut min_eig_pre = None;

    for k in 1..=config.max_iterations {
        iterations = k;
        let shifted = &x + &p_corr;
        let y = psd_part(shifted.clone()).into_inner();
        p_corr = shifted - &y;

        let mut x_next = &y + &q_corr;
        apply_pattern_diag(&mut x_next, g);
        apply_mean_halfspace(&mut x_next, g, b_adj)?;
        q_corr = &y + &q_corr - &x_next;

        let change = (&x_next - &x).norm();
        gap = (&y - &x_next).norm();
        x = x_next;

        if change.max(gap) <= config.tol_convergence {
            let lambda = min_eigenvalue(&SymmetricMatrix::mirror_upper(x.clone()))?;
            if lambda >= -config.psd_slack() {
                min_eig_pre = Some(lambda);
                status = SolveStatus::Solved;
                break;
            }
        }

        if gaps.len() == config.stall_window {
            gaps.pop_front();
        }
        gaps.push_back(gap);
        if gaps.len() == config.stall_window && is_stalled(&gaps, config.tol_gap_infeasible) {
            status = SolveStatus::Infeasible;
            break;
        }
    }

    let wall_time_s = start.elapsed().as_secs_f64();
    let mut diagnostics = SolveDiagnostics {
        iterations,
        gap,
        min_eig_pre,
        min_eig_post: None,
        objective: None,
        wall_time_s,
        b: config.b,
        b_adjusted: b_adj,
        epsilon: config.epsilon,
    };
    if status != SolveStatus::Solved {
        return Ok(SolveOutcome {
            status,
            matrix: None,
            projection: None,
            diagnostics,
        });
    }

    let projection = SymmetricMatrix::mirror_upper(x);
    let (matrix, _) = postprocess_epsilon(&projection, config.epsilon, config.b);
    let diff = projection.distance(cbar);
    diagnostics.objective = Some(0.5 * diff * diff);
    diagnostics.min_eig_post = Some(min_eigenvalue(&matrix)?);
    diagnostics.wall_time_s = start.elapsed().as_secs_f64();
    Ok(SolveOutcome {
        status,
        matrix: Some(matrix),
        projection: Some(projection),
        diagnostics,
    })
}

fn is_stalled(gaps: &VecDeque<f64>, threshold: f64) -> bool {
    let (lo, hi) = gaps
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &g| (lo.min(g), hi.max(g)));
    lo > threshold && (hi - lo) / hi < STALL_RELATIVE_CHANGE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MembershipTolerances {
    pub diag: f64,
    pub pattern: f64,
    /// Accepted `-λ_min`.
    pub psd: f64,
    /// Accepted excess of `|c_ij|` over one.
    pub bound: f64,
    /// Accepted shortfall of the edge mean below `b`.
    pub mean: f64,
}

impl Default for MembershipTolerances {
    fn default() -> Self {
        Self {
            diag: 0.0,
            pattern: 1e-8,
            psd: 1e-8,
            bound: 1e-10,
            mean: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub diag_residual: f64,
    pub pattern_residual: f64,
    pub min_eigenvalue: f64,
    pub bound_residual: f64,
    /// Edge mean minus `b`; `None` for edgeless graphs.
    pub mean_margin: Option<f64>,
    pub diag_ok: bool,
    pub pattern_ok: bool,
    pub psd_ok: bool,
    pub bound_ok: bool,
    pub mean_ok: bool,
}

impl MembershipReport {
    pub fn all_ok(&self) -> bool {
        self.diag_ok && self.pattern_ok && self.psd_ok && self.bound_ok && self.mean_ok
    }
}

/// Residuals of `c` against every constraint defining the feasible set.
pub fn check_membership(
    c: &SymmetricMatrix,
    g: &Graph,
    b: f64,
    tol: &MembershipTolerances,
) -> Result<MembershipReport> {
    let p = g.node_count();
    if c.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: c.dim(),
        });
    }
    let m = c.as_matrix();
    let diag_residual = (0..p).map(|i| (m[(i, i)] - 1.0).abs()).fold(0.0, f64::max);
    let pattern_residual = g.non_edges().map(|(i, j)| m[(i, j)].abs()).fold(0.0, f64::max);
    let bound_residual = m.iter().map(|v| v.abs() - 1.0).fold(f64::NEG_INFINITY, f64::max);
    let min_eig = min_eigenvalue(c)?;
    let mean_margin = edge_mean(m, g).map(|mean| mean - b);
    let mean_ok = if !mean_constraint_active(b) {
        true
    } else {
        mean_margin.is_some_and(|margin| margin >= -tol.mean)
    };
    Ok(MembershipReport {
        diag_residual,
        pattern_residual,
        min_eigenvalue: min_eig,
        bound_residual,
        mean_margin,
        diag_ok: diag_residual <= tol.diag,
        pattern_ok: pattern_residual <= tol.pattern,
        psd_ok: min_eig >= -tol.psd,
        bound_ok: bound_residual <= tol.bound,
        mean_ok,
    })
}

/// Largest mean bound `b` for which the solver finds a feasible matrix,
/// located by bisection on `[-1, 1]` to within `1e-3`. The reference matrix
/// is the identity.
pub fn max_feasible_mean(g: &Graph, config: &SolverConfig) -> Result<f64> {
    if g.edge_count() == 0 {
        return Err(Error::InfeasibleConstraint(
            "max_feasible_mean needs at least one edge".into(),
        ));
    }
    let cbar = SymmetricMatrix::identity(g.node_count());
    let feasible = |b: f64| -> Result<bool> {
        Ok(solve_projection(&cbar, g, &config.clone().with_b(b))?.is_solved())
    };
    if feasible(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    while hi - lo > 5e-4 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
