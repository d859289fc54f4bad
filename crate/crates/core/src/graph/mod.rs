//! Undirected simple graphs defining the sparsity pattern of a correlation
//! matrix, plus random graph models and chordality tools.

mod chordal;
mod generators;

pub use chordal::{chordal_completion, find_chordless_cycle, is_chordal, EliminationOrder};
pub use generators::{
    barabasi_albert, erdos_renyi, sbm, watts_strogatz, GraphModel, GraphModelParams,
};

use crate::error::{Error, Result};

/// Simple undirected graph on nodes `0..p`.
///
/// Edges are stored once as `(i, j)` with `i < j`, sorted lexicographically.
/// A dense adjacency table backs constant-time lookups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    p: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<bool>,
}

impl Graph {
    /// Builds a graph from unordered pairs. Orientation and repeats are
    /// ignored; self-loops and out-of-range indices are rejected.
    pub fn new<I>(p: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if p == 0 {
            return Err(Error::InvalidGraph("node count must be positive".into()));
        }
        let mut adj = vec![false; p * p];
        let mut list = Vec::new();
        for (a, b) in edges {
            if a >= p || b >= p {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {p} nodes"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if !adj[i * p + j] {
                adj[i * p + j] = true;
                adj[j * p + i] = true;
                list.push((i, j));
            }
        }
        list.sort_unstable();
        Ok(Self { p, edges: list, adj })
    }

    pub fn empty(p: usize) -> Result<Self> {
        Self::new(p, std::iter::empty())
    }

    pub fn complete(p: usize) -> Result<Self> {
        Self::new(p, (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))))
    }

    pub fn path(p: usize) -> Result<Self> {
        Self::new(p, (1..p).map(|i| (i - 1, i)))
    }

    pub fn cycle(p: usize) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidGraph("a cycle needs at least 3 nodes".into()));
        }
        Self::new(p, (0..p).map(|i| (i, (i + 1) % p)))
    }

    pub fn node_count(&self) -> usize {
        self.p
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.p && j < self.p && self.adj[i * self.p + j]
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.adj[i * self.p..(i + 1) * self.p];
        row.iter()
            .enumerate()
            .filter_map(|(j, &on)| on.then_some(j))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors(i).count()
    }

    /// Pairs `(i, j)`, `i < j`, that are not edges.
    pub fn non_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.p).flat_map(move |i| {
            (i + 1..self.p)
                .filter(move |&j| !self.adj[i * self.p + j])
                .map(move |j| (i, j))
        })
    }

    /// `2|E| / (p(p-1))`.
    pub fn density(&self) -> Result<f64> {
        if self.p < 2 {
            return Err(Error::InvalidGraph(
                "density is undefined for fewer than 2 nodes".into(),
            ));
        }
        Ok(2.0 * self.edges.len() as f64 / (self.p * (self.p - 1)) as f64)
    }

    /// True when every edge of `self` is an edge of `other`.
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.p == other.p && self.edges.iter().all(|&(i, j)| other.has_edge(i, j))
    }
}

/// Number of unordered pairs on `p` nodes.
pub(crate) fn pair_count(p: usize) -> usize {
    p * p.saturating_sub(1) / 2
}
