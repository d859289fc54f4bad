//! Reference generators for patterned correlation matrices: diagonal
//! dominance, partial orthogonalization, and Cholesky sampling on chordal
//! graphs.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{find_chordless_cycle, is_chordal, Graph};
use crate::projections::SymmetricMatrix;
use crate::rng::{derive_seed, rng_from_seed};

/// Scales a symmetric matrix with positive diagonal to unit diagonal.
fn to_correlation(a: &DMatrix<f64>) -> SymmetricMatrix {
    let scale: Vec<f64> = (0..a.nrows()).map(|i| a[(i, i)].sqrt()).collect();
    SymmetricMatrix::from_upper_fn(a.nrows(), |i, j| {
        if i == j {
            1.0
        } else {
            a[(i, j)] / (scale[i] * scale[j])
        }
    })
}

/// Edge weights uniform on `[-1, 1]` with diagonal equal to the absolute row
/// sum (no extra positive shift), rescaled to unit diagonal. Isolated nodes
/// get diagonal one.
pub fn diagonal_dominance(g: &Graph, seed: u64) -> SymmetricMatrix {
    let p = g.node_count();
    let mut rng = rng_from_seed(seed);
    let mut a = DMatrix::<f64>::zeros(p, p);
    for &(i, j) in g.edges() {
        let w: f64 = rng.random_range(-1.0..=1.0);
        a[(i, j)] = w;
        a[(j, i)] = w;
    }
    for i in 0..p {
        let row: f64 = (0..p).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
        a[(i, i)] = if row == 0.0 { 1.0 } else { row };
    }
    to_correlation(&a)
}

/// Norm below which a partially orthogonalized vector is resampled.
const DEGENERATE_NORM: f64 = 1e-12;
const MAX_RESAMPLES: usize = 10;

fn normal_vector(rng: &mut impl Rng, p: usize) -> DVector<f64> {
    DVector::from_iterator(p, (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Removes from `v` its component in the span of `basis` (orthonormal
/// columns), twice for numerical safety.
fn orthogonalize(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = q.dot(v);
            v.axpy(-c, q, 1.0);
        }
    }
}

/// Orthonormal basis of the span of `vectors` by modified Gram–Schmidt;
/// numerically dependent vectors are dropped.
fn orthonormal_basis(vectors: &[&DVector<f64>]) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = (*v).clone();
        orthogonalize(&mut w, &basis);
        let n = w.norm();
        if n > DEGENERATE_NORM * v.norm().max(1.0) {
            basis.push(w / n);
        }
    }
    basis
}

/// Gram matrix of random unit vectors made exactly orthogonal on non-edges.
///
/// Nodes are processed in `node_order`; each vector is projected onto the
/// orthogonal complement of the vectors of earlier-processed non-neighbours.
/// Vectors start as i.i.d. standard normal in `R^p`.
pub fn partial_orthogonalization(
    g: &Graph,
    seed: u64,
    node_order: &[usize],
) -> Result<SymmetricMatrix> {
    let p = g.node_count();
    let mut seen = vec![false; p];
    if node_order.len() != p
        || !node_order
            .iter()
            .all(|&v| v < p && !std::mem::replace(&mut seen[v], true))
    {
        return Err(Error::InvalidParameter(format!(
            "node order must be a permutation of 0..{p}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut vectors: Vec<DVector<f64>> = (0..p).map(|_| normal_vector(&mut rng, p)).collect();
    for (k, &i) in node_order.iter().enumerate() {
        let earlier: Vec<&DVector<f64>> = node_order[..k]
            .iter()
            .filter(|&&j| !g.has_edge(i, j))
            .map(|&j| &vectors[j])
            .collect();
        let basis = orthonormal_basis(&earlier);
        let mut v = vectors[i].clone();
        orthogonalize(&mut v, &basis);
        let mut attempt = 0;
        while v.norm() < DEGENERATE_NORM {
            if attempt == MAX_RESAMPLES {
                return Err(Error::Degenerate(format!(
                    "vector for node {i} stays in the span of its non-neighbours"
                )));
            }
            attempt += 1;
            let mut retry = rng_from_seed(derive_seed(seed, "po-resample", &[i as u64, attempt as u64]));
            v = normal_vector(&mut retry, p);
            orthogonalize(&mut v, &basis);
        }
        let n = v.norm();
        vectors[i] = v / n;
    }
    let gram = SymmetricMatrix::from_upper_fn(p, |i, j| {
        if i == j {
            1.0
        } else {
            vectors[i].dot(&vectors[j])
        }
    });
    Ok(gram)
}

/// Upper-triangular factor with unit-norm rows, stored in permuted
/// coordinates: row/column `k` corresponds to node `order[k]`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    pub factor: DMatrix<f64>,
    /// Position to node map. Each node's neighbours at earlier positions form
    /// a clique (reverse of a perfect elimination ordering).
    pub order: Vec<usize>,
}

impl CholeskyFactor {
    /// `U Uᵀ` mapped back to node indices.
    pub fn correlation(&self) -> SymmetricMatrix {
        let p = self.order.len();
        let c = &self.factor * self.factor.transpose();
        let mut out = DMatrix::<f64>::zeros(p, p);
        for a in 0..p {
            for b in 0..p {
                out[(self.order[a], self.order[b])] = if a == b { 1.0 } else { c[(a.min(b), a.max(b))] };
            }
        }
        SymmetricMatrix::from_dmatrix(out).expect("factor product is symmetric and finite")
    }
}

fn require_chordal(g: &Graph) -> Result<Vec<usize>> {
    match is_chordal(g) {
        (true, Some(peo)) => Ok(peo),
        _ => Err(Error::NotChordal {
            cycle: find_chordless_cycle(g).unwrap_or_default(),
        }),
    }
}

/// Random factor whose free entries (diagonal and edge positions) are
/// i.i.d. standard normal, diagonal made positive, rows normalized.
pub fn sample_cholesky_factor(g: &Graph, seed: u64) -> Result<CholeskyFactor> {
    let mut order = require_chordal(g)?;
    order.reverse();
    let p = g.node_count();
    let mut rng = rng_from_seed(seed);
    let mut u = DMatrix::<f64>::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            if a == b || g.has_edge(order[a], order[b]) {
                let z: f64 = rng.sample(StandardNormal);
                u[(a, b)] = if a == b { z.abs() } else { z };
            }
        }
        let norm = u.row(a).norm();
        if norm == 0.0 {
            u[(a, a)] = 1.0;
        } else {
            u.row_mut(a).unscale_mut(norm);
        }
    }
    Ok(CholeskyFactor { factor: u, order })
}

/// `U Uᵀ` for a random row-normalized factor with the graph's sparsity;
/// requires a chordal graph.
pub fn chordal_cholesky_sample(g: &Graph, seed: u64) -> Result<SymmetricMatrix> {
    Ok(sample_cholesky_factor(g, seed)?.correlation())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projections::min_eigenvalue;

    #[test]
    fn dominance_on_empty_graph_is_identity() {
        assert_eq!(diagonal_dominance(&Graph::empty(4).unwrap(), 1), SymmetricMatrix::identity(4));
    }

    #[test]
    fn dominance_single_edge_is_degenerate() {
        let g = Graph::complete(2).unwrap();
        let c = diagonal_dominance(&g, 5);
        assert!((c.get(0, 1).abs() - 1.0).abs() < 1e-15);
        assert!(min_eigenvalue(&c).unwrap().abs() < 1e-12);
    }

    #[test]
    fn po_empty_and_complete() {
        let order: Vec<usize> = (0..5).collect();
        let c = partial_orthogonalization(&Graph::empty(5).unwrap(), 3, &order).unwrap();
        assert!(c.distance(&SymmetricMatrix::identity(5)) < 1e-12);

        // Complete graph: the plain normalized Gram matrix of the same draws.
        let k = Graph::complete(5).unwrap();
        let c = partial_orthogonalization(&k, 3, &order).unwrap();
        let mut rng = rng_from_seed(3);
        let vs: Vec<DVector<f64>> = (0..5).map(|_| normal_vector(&mut rng, 5).normalize()).collect();
        for i in 0..5 {
            for j in i + 1..5 {
                assert!((c.get(i, j) - vs[i].dot(&vs[j])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn po_path_zeroes_only_the_non_edge() {
        let g = Graph::path(3).unwrap();
        let c = partial_orthogonalization(&g, 8, &[0, 1, 2]).unwrap();
        assert!(c.get(0, 2).abs() <= 1e-10);
        assert!(c.get(0, 1).abs() > 1e-6);
        assert!(c.get(1, 2).abs() > 1e-6);
    }

    #[test]
    fn po_rejects_bad_order() {
        let g = Graph::path(3).unwrap();
        assert!(partial_orthogonalization(&g, 1, &[0, 0, 2]).is_err());
        assert!(partial_orthogonalization(&g, 1, &[0, 1]).is_err());
    }

    #[test]
    fn po_depends_on_order() {
        let g = crate::graph::erdos_renyi(12, 0.4, 2).unwrap();
        let natural: Vec<usize> = (0..12).collect();
        let reversed: Vec<usize> = (0..12).rev().collect();
        let a = partial_orthogonalization(&g, 4, &natural).unwrap();
        let b = partial_orthogonalization(&g, 4, &reversed).unwrap();
        assert!(a.distance(&b) > 1e-3);
    }

    #[test]
    fn cholesky_path_and_triangle() {
        let c = chordal_cholesky_sample(&Graph::path(3).unwrap(), 2).unwrap();
        assert_eq!(c.get(0, 2), 0.0);
        assert!(c.get(0, 1).abs() < 1.0 && c.get(1, 2).abs() < 1.0);
        let t = chordal_cholesky_sample(&Graph::complete(3).unwrap(), 2).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!(t.get(i, j) != 0.0);
        }
        assert!(min_eigenvalue(&t).unwrap() > -1e-12);
    }

    #[test]
    fn cholesky_rejects_four_cycle() {
        match chordal_cholesky_sample(&Graph::cycle(4).unwrap(), 1) {
            Err(Error::NotChordal { cycle }) => assert_eq!(cycle.len(), 4),
            other => panic!("expected chordality error, got {other:?}"),
        }
    }

    #[test]
    fn cholesky_factor_rows_are_unit() {
        let g = crate::graph::GraphModelParams::new(
            crate::graph::GraphModel::Chordal { m: None },
            15,
            0.3,
        )
        .unwrap()
        .generate(3)
        .unwrap();
        let f = sample_cholesky_factor(&g, 9).unwrap();
        for a in 0..15 {
            assert!((f.factor.row(a).norm() - 1.0).abs() < 1e-14);
            assert!(f.factor[(a, a)] > 0.0);
            for b in 0..a {
                assert_eq!(f.factor[(a, b)], 0.0);
            }
        }
    }
}
