//! Generation of correlation matrices whose off-diagonal zero pattern follows
//! a prescribed undirected graph.
//!
//! The main entry point is [`solver::solve_projection`], which computes the
//! Frobenius-nearest correlation matrix to a reference matrix `C̄` subject to
//! a graph zero pattern and a lower bound on the mean edge correlation.
//! Baseline generators live in [`baselines`], random graph models in
//! [`graph`], and the experiment harness in [`experiments`].

pub mod baselines;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod io;
pub mod projections;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use graph::Graph;
pub use projections::SymmetricMatrix;
pub use solver::{SolveOutcome, SolveStatus, SolverConfig};

/// Version string recorded in manifests.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
