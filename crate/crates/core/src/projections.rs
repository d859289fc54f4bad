//! Frobenius projections onto the convex pieces of the feasible set and the
//! spectral helpers they rely on.
//!
//! The feasible set is split in two: the PSD cone, and the polyhedron of
//! matrices with unit diagonal, zeros on non-edges, and edge mean at least
//! `b`. The box `|c_ij| <= 1` is implied by the other two and has no
//! projection of its own.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Dense real symmetric matrix with finite entries.
///
/// Symmetry is exact: every constructor either checks it or mirrors the
/// upper triangle into the lower one.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Wraps a matrix after checking squareness, finiteness and exact symmetry.
    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if let Some(bad) = m.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite entry {bad}")));
        }
        let p = m.nrows();
        for i in 0..p {
            for j in i + 1..p {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    /// Builds from `f(i, j)` evaluated on `i <= j` and mirrored.
    pub fn from_upper_fn(p: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self(m)
    }

    /// Copies the upper triangle of `m` onto its lower triangle.
    pub(crate) fn mirror_upper(mut m: DMatrix<f64>) -> Self {
        let p = m.nrows();
        for i in 0..p {
            for j in i + 1..p {
                m[(j, i)] = m[(i, j)];
            }
        }
        Self(m)
    }

    pub fn identity(p: usize) -> Self {
        Self(DMatrix::identity(p, p))
    }

    pub fn zeros(p: usize) -> Self {
        Self(DMatrix::zeros(p, p))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Frobenius inner product `tr(AᵀB)`.
    pub fn inner(&self, other: &SymmetricMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn distance(&self, other: &SymmetricMatrix) -> f64 {
        (&self.0 - &other.0).norm()
    }

    /// `(1 - t) self + t other`.
    pub fn lerp(&self, other: &SymmetricMatrix, t: f64) -> SymmetricMatrix {
        Self::mirror_upper(&self.0 * (1.0 - t) + &other.0 * t)
    }

    /// Mean of the entries at edge positions, `None` for edgeless graphs.
    pub fn edge_mean(&self, g: &Graph) -> Option<f64> {
        edge_mean(&self.0, g)
    }

    /// Entries `(i, j)`, `i < j`, at edge positions in edge order.
    pub fn edge_entries(&self, g: &Graph) -> Vec<f64> {
        g.edges().iter().map(|&(i, j)| self.0[(i, j)]).collect()
    }
}

/// Eigenpairs sorted by ascending eigenvalue.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    /// `V diag(f(λ)) Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymmetricMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.eigenvalues[k]);
        }
        SymmetricMatrix::mirror_upper(scaled * self.eigenvectors.transpose())
    }
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric("eigendecomposition of non-finite matrix".into()))
    }
}

pub fn spectral_decomposition(m: &SymmetricMatrix) -> Result<SpectralDecomposition> {
    check_finite(&m.0)?;
    let eig = SymmetricEigen::new(m.0.clone());
    let p = m.dim();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(p, order.iter().map(|&k| eig.eigenvalues[k]));
    let eigenvectors = DMatrix::from_fn(p, p, |i, k| eig.eigenvectors[(i, order[k])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Projection onto the PSD cone by clipping negative eigenvalues at zero.
pub fn project_psd(m: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    check_finite(&m.0)?;
    Ok(psd_part(m.0.clone()))
}

/// PSD projection of a symmetric matrix, consuming the buffer.
pub(crate) fn psd_part(m: DMatrix<f64>) -> SymmetricMatrix {
    let eig = SymmetricEigen::new(m);
    let mut scaled = eig.eigenvectors.clone();
    let mut any_positive = false;
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        let lambda = eig.eigenvalues[k];
        if lambda > 0.0 {
            any_positive = true;
            col *= lambda.sqrt();
        } else {
            col.fill(0.0);
        }
    }
    let p = scaled.nrows();
    if !any_positive {
        return SymmetricMatrix::zeros(p);
    }
    SymmetricMatrix::mirror_upper(&scaled * scaled.transpose())
}

pub fn min_eigenvalue(m: &SymmetricMatrix) -> Result<f64> {
    check_finite(&m.0)?;
    Ok(m.0
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

fn check_dims(m: &SymmetricMatrix, g: &Graph) -> Result<()> {
    if m.dim() != g.node_count() {
        return Err(Error::DimensionMismatch {
            expected: g.node_count(),
            found: m.dim(),
        });
    }
    Ok(())
}

/// Projection onto `{diag = 1, c_ij = 0 for non-edges}`: a coordinate-wise
/// overwrite of the constrained entries.
pub fn project_pattern_diag(m: &SymmetricMatrix, g: &Graph) -> Result<SymmetricMatrix> {
    check_dims(m, g)?;
    let mut out = m.0.clone();
    apply_pattern_diag(&mut out, g);
    Ok(SymmetricMatrix(out))
}

pub(crate) fn apply_pattern_diag(m: &mut DMatrix<f64>, g: &Graph) {
    let p = m.nrows();
    for j in 0..p {
        for i in 0..p {
            if i == j {
                m[(i, j)] = 1.0;
            } else if !g.has_edge(i, j) {
                m[(i, j)] = 0.0;
            }
        }
    }
}

pub(crate) fn edge_mean(m: &DMatrix<f64>, g: &Graph) -> Option<f64> {
    if g.edge_count() == 0 {
        return None;
    }
    let sum: f64 = g.edges().iter().map(|&(i, j)| m[(i, j)]).sum();
    Some(sum / g.edge_count() as f64)
}

/// `b <= -1` switches the mean constraint off.
pub fn mean_constraint_active(b: f64) -> bool {
    b > -1.0
}

/// Projection onto the halfspace `mean of edge entries >= b`, for a matrix
/// already in the pattern-affine set: when violated, every edge entry is
/// shifted by the same amount so the mean lands exactly on `b`.
pub fn project_mean_halfspace(m: &SymmetricMatrix, g: &Graph, b: f64) -> Result<SymmetricMatrix> {
    check_dims(m, g)?;
    let mut out = m.0.clone();
    apply_mean_halfspace(&mut out, g, b)?;
    Ok(SymmetricMatrix(out))
}

pub(crate) fn apply_mean_halfspace(m: &mut DMatrix<f64>, g: &Graph, b: f64) -> Result<()> {
    if !mean_constraint_active(b) {
        return Ok(());
    }
    let mean = edge_mean(m, g).ok_or_else(|| {
        Error::InfeasibleConstraint(format!("mean bound b = {b} on a graph without edges"))
    })?;
    if mean >= b {
        return Ok(());
    }
    let shift = b - mean;
    for &(i, j) in g.edges() {
        let v = m[(i, j)] + shift;
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    Ok(())
}

/// Projection onto the intersection of the pattern-affine set and the mean
/// halfspace. Once the affine coordinates are fixed the halfspace only
/// involves edge coordinates, so projecting in sequence is exact.
pub fn project_polyhedron(m: &SymmetricMatrix, g: &Graph, b: f64) -> Result<SymmetricMatrix> {
    check_dims(m, g)?;
    let mut out = m.0.clone();
    apply_pattern_diag(&mut out, g);
    apply_mean_halfspace(&mut out, g, b)?;
    Ok(SymmetricMatrix(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn sym(m: DMatrix<f64>) -> SymmetricMatrix {
        SymmetricMatrix::from_dmatrix(m).unwrap()
    }

    fn assert_close(a: &SymmetricMatrix, b: &SymmetricMatrix, tol: f64) {
        assert!(a.distance(b) <= tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn rejects_asymmetric_and_non_finite() {
        assert!(SymmetricMatrix::from_dmatrix(dmatrix![1.0, 2.0; 3.0, 1.0]).is_err());
        assert!(SymmetricMatrix::from_dmatrix(dmatrix![1.0, f64::NAN; f64::NAN, 1.0]).is_err());
        assert!(SymmetricMatrix::from_dmatrix(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn psd_projection_examples() {
        let i3 = SymmetricMatrix::identity(3);
        assert_close(&project_psd(&i3).unwrap(), &i3, 1e-14);
        let d = sym(dmatrix![2.0, 0.0; 0.0, -1.0]);
        assert_close(
            &project_psd(&d).unwrap(),
            &sym(dmatrix![2.0, 0.0; 0.0, 0.0]),
            1e-14,
        );
        let x = sym(dmatrix![0.0, 1.0; 1.0, 0.0]);
        assert_close(
            &project_psd(&x).unwrap(),
            &sym(dmatrix![0.5, 0.5; 0.5, 0.5]),
            1e-14,
        );
        let nsd = sym(dmatrix![-1.0, 0.0; 0.0, -2.0]);
        assert_eq!(project_psd(&nsd).unwrap(), SymmetricMatrix::zeros(2));
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert!((min_eigenvalue(&SymmetricMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-14);
        let d = sym(dmatrix![3.0, 0.0; 0.0, -2.0]);
        assert!((min_eigenvalue(&d).unwrap() + 2.0).abs() < 1e-14);
        let ones = SymmetricMatrix::from_upper_fn(3, |_, _| 1.0);
        assert!(min_eigenvalue(&ones).unwrap().abs() < 1e-14);
    }

    #[test]
    fn spectral_decomposition_is_sorted_and_reconstructs() {
        let m = SymmetricMatrix::from_upper_fn(6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let s = spectral_decomposition(&m).unwrap();
        assert!(s.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
        let back = s.reconstruct_with(|l| l);
        assert!(back.distance(&m) <= 1e-10 * m.frobenius_norm().max(1.0));
        let gram = s.eigenvectors.transpose() * &s.eigenvectors;
        assert!((gram - DMatrix::<f64>::identity(6, 6)).norm() <= 1e-10);
    }

    #[test]
    fn pattern_diag_examples() {
        let m = SymmetricMatrix::from_upper_fn(3, |_, _| 0.9);
        let empty = Graph::empty(3).unwrap();
        assert_eq!(
            project_pattern_diag(&m, &empty).unwrap(),
            SymmetricMatrix::identity(3)
        );
        let path = Graph::path(3).unwrap();
        let out = project_pattern_diag(&m, &path).unwrap();
        assert_eq!(out.get(0, 1), 0.9);
        assert_eq!(out.get(1, 2), 0.9);
        assert_eq!(out.get(0, 2), 0.0);
        assert_eq!(out.get(1, 1), 1.0);
        assert_eq!(project_pattern_diag(&out, &path).unwrap(), out);
        assert!(project_pattern_diag(&m, &Graph::path(4).unwrap()).is_err());
    }

    #[test]
    fn halfspace_examples() {
        let g = Graph::path(3).unwrap();
        let m = SymmetricMatrix::from_upper_fn(3, |i, j| match (i, j) {
            (0, 1) => 0.1,
            (1, 2) => 0.3,
            (a, b) if a == b => 1.0,
            _ => 0.0,
        });
        let out = project_mean_halfspace(&m, &g, 0.5).unwrap();
        assert!((out.get(0, 1) - 0.4).abs() < 1e-15);
        assert!((out.get(2, 1) - 0.6).abs() < 1e-15);
        assert!((out.edge_mean(&g).unwrap() - 0.5).abs() < 1e-15);

        let high = SymmetricMatrix::from_upper_fn(3, |i, j| if i == j { 1.0 } else { 0.6 });
        let high = project_pattern_diag(&high, &g).unwrap();
        assert_eq!(project_mean_halfspace(&high, &g, 0.5).unwrap(), high);
        assert_eq!(project_mean_halfspace(&m, &g, -1.0).unwrap(), m);
    }

    #[test]
    fn halfspace_without_edges_is_infeasible() {
        let g = Graph::empty(3).unwrap();
        let i3 = SymmetricMatrix::identity(3);
        assert!(matches!(
            project_mean_halfspace(&i3, &g, 0.0),
            Err(Error::InfeasibleConstraint(_))
        ));
        assert_eq!(project_mean_halfspace(&i3, &g, -1.0).unwrap(), i3);
    }

    #[test]
    fn polyhedron_examples() {
        let g = Graph::path(3).unwrap();
        let out = project_polyhedron(&SymmetricMatrix::zeros(3), &g, 0.5).unwrap();
        let expected = sym(dmatrix![1.0, 0.5, 0.0; 0.5, 1.0, 0.5; 0.0, 0.5, 1.0]);
        assert_eq!(out, expected);
        assert_eq!(project_polyhedron(&expected, &g, 0.5).unwrap(), expected);
        let m = SymmetricMatrix::from_upper_fn(3, |i, j| (i + 2 * j) as f64 * 0.1);
        assert_eq!(
            project_polyhedron(&m, &g, -1.0).unwrap(),
            project_pattern_diag(&m, &g).unwrap()
        );
    }
}
