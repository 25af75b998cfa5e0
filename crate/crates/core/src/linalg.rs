//! Dense complex kernels shared by every other module.
//!
//! Matrices and vectors are `nalgebra` dense types over `Complex64`. All
//! functions here are pure; nothing mutates its inputs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Numerical thresholds used across the crate.
///
/// `residual` bounds every reported residual, `cluster` merges nearby
/// eigenvalues into one atom and `rank` is the relative cut-off for rank
/// decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub residual: f64,
    pub cluster: f64,
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-9,
            cluster: 1e-7,
            rank: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn new(residual: f64, cluster: f64, rank: f64) -> Result<Self> {
        let tol = Self {
            residual,
            cluster,
            rank,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(self.residual) && positive(self.cluster) && positive(self.rank)) {
            return Err(Error::InvalidTolerances("all tolerances must be finite and positive"));
        }
        if self.cluster < self.residual {
            return Err(Error::InvalidTolerances(
                "cluster tolerance must be >= residual tolerance",
            ));
        }
        Ok(())
    }
}

/// Inner product linear in the first argument: `<h, k> = sum h_i conj(k_i)`.
pub fn inner(h: &CVector, k: &CVector) -> Complex64 {
    k.dotc(h)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}

pub fn require_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn require_dim(v: &CVector, dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    Ok(())
}

/// Stack vectors as the columns of a `dim x len` matrix.
pub fn columns(vectors: &[CVector], dim: usize) -> Result<CMatrix> {
    for v in vectors {
        require_dim(v, dim)?;
    }
    Ok(CMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i]))
}

pub fn column_vectors(m: &CMatrix) -> Vec<CVector> {
    m.column_iter().map(|c| c.into_owned()).collect()
}

/// Frobenius norm of `a b - b a`.
pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    (a * b - b * a).norm()
}

/// Orthonormal basis of the span of `vectors`.
///
/// The longest leading run of vectors that is already orthonormal (to
/// `tol.residual`) is copied verbatim; the remainder goes through classical
/// Gram-Schmidt with one re-orthogonalisation pass. A vector is dropped when
/// its residual falls below `tol.rank` times the largest input norm. The
/// rank is the number of returned vectors.
pub fn qr_orthonormalize(vectors: &[CVector], tol: &Tolerances) -> Result<Vec<CVector>> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let m = columns(vectors, first.len())?;
    Ok(column_vectors(&orthonormalize_columns(&m, tol)))
}

/// Column-matrix form of [`qr_orthonormalize`].
pub fn orthonormalize_columns(a: &CMatrix, tol: &Tolerances) -> CMatrix {
    let dim = a.nrows();
    let scale = a.column_iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return CMatrix::zeros(dim, 0);
    }
    let threshold = tol.rank * scale;

    let prefix = orthonormal_prefix(a, tol.residual);
    let mut basis: Vec<CVector> = (0..prefix).map(|j| a.column(j).into_owned()).collect();

    for j in prefix..a.ncols() {
        let mut v = a.column(j).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let c = inner(&v, b);
                v.axpy(-c, b, ONE);
            }
        }
        let norm = v.norm();
        if norm > threshold {
            basis.push(v.unscale(norm));
        }
    }
    CMatrix::from_fn(dim, basis.len(), |i, j| basis[j][i])
}

fn orthonormal_prefix(a: &CMatrix, tol: f64) -> usize {
    let mut count = 0;
    for j in 0..a.ncols() {
        let cj = a.column(j);
        if (cj.norm_squared() - 1.0).abs() > tol {
            break;
        }
        let orthogonal = (0..j).all(|i| a.column(i).dotc(&cj).norm() <= tol);
        if !orthogonal {
            break;
        }
        count += 1;
    }
    count
}

/// Orthonormal basis of the complement of the orthonormal columns `basis`
/// inside `C^dim`.
pub fn orthogonal_complement(basis: &CMatrix, tol: &Tolerances) -> CMatrix {
    let dim = basis.nrows();
    let rank = basis.ncols();
    let mut stacked = CMatrix::zeros(dim, rank + dim);
    stacked.columns_mut(0, rank).copy_from(basis);
    stacked.columns_mut(rank, dim).copy_from(&CMatrix::identity(dim, dim));
    let full = orthonormalize_columns(&stacked, tol);
    full.columns(rank, full.ncols() - rank).into_owned()
}

#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary; column `j` belongs to `values[j]`.
    pub vectors: CMatrix,
}

pub fn hermitian_eig(a: &CMatrix, tol: &Tolerances) -> Result<HermitianEig> {
    require_square(a)?;
    let residual = (a - a.adjoint()).norm();
    if residual > tol.residual {
        return Err(Error::NonHermitian { residual });
    }
    if a.nrows() == 0 {
        return Ok(HermitianEig {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let h = (a + a.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(a.nrows(), a.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEig { values, vectors })
}

/// Singular triplets of `a` with `sigma > cutoff`, descending.
#[derive(Debug, Clone)]
pub struct SingularTriplets {
    pub values: Vec<f64>,
    /// Left singular vectors (columns).
    pub u: CMatrix,
    /// Right singular vectors (columns).
    pub v: CMatrix,
}

/// Singular triplets from the hermitian dilation `[[0, A], [A*, 0]]`, whose
/// eigenpairs are `(sigma, (u, v) / sqrt 2)` and `(-sigma, (u, -v) / sqrt 2)`.
/// Only triplets with `sigma > max(abs_cutoff, rel_cutoff * sigma_max)` are
/// returned.
pub fn singular_triplets(a: &CMatrix, rel_cutoff: f64, abs_cutoff: f64) -> SingularTriplets {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return SingularTriplets {
            values: Vec::new(),
            u: CMatrix::zeros(m, 0),
            v: CMatrix::zeros(n, 0),
        };
    }
    let mut dilation = CMatrix::zeros(m + n, m + n);
    dilation.view_mut((0, m), (m, n)).copy_from(a);
    dilation.view_mut((m, 0), (n, m)).copy_from(&a.adjoint());
    let eig = dilation.symmetric_eigen();
    let mut order: Vec<usize> = (0..m + n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let sigma_max = eig.eigenvalues[order[0]].max(0.0);
    let cutoff = abs_cutoff.max(rel_cutoff * sigma_max);
    let kept: Vec<usize> = order
        .into_iter()
        .take(m.min(n))
        .filter(|&k| eig.eigenvalues[k] > cutoff)
        .collect();
    let r = kept.len();
    let mut u = CMatrix::zeros(m, r);
    let mut v = CMatrix::zeros(n, r);
    for (col, &k) in kept.iter().enumerate() {
        let w = eig.eigenvectors.column(k);
        let uk = w.rows(0, m).into_owned();
        let vk = w.rows(m, n).into_owned();
        u.set_column(col, &uk.unscale(uk.norm()));
        v.set_column(col, &vk.unscale(vk.norm()));
    }
    SingularTriplets {
        values: kept.iter().map(|&k| eig.eigenvalues[k]).collect(),
        u,
        v,
    }
}

/// Moore-Penrose pseudoinverse; singular values at or below
/// `tol.rank * sigma_max` are treated as zero.
pub fn pinv(a: &CMatrix, tol: &Tolerances) -> CMatrix {
    let (rows, cols) = a.shape();
    let t = singular_triplets(a, tol.rank, 0.0);
    let mut out = CMatrix::zeros(cols, rows);
    for (k, &s) in t.values.iter().enumerate() {
        out += (t.v.column(k) * t.u.column(k).adjoint()).unscale(s);
    }
    out
}

/// Number of singular values above `tol.rank * sigma_max`.
pub fn numerical_rank(a: &CMatrix, tol: &Tolerances) -> usize {
    singular_triplets(a, tol.rank, 0.0).values.len()
}

/// Orthonormal basis of the right singular space of `a` for singular values
/// at most `threshold`: the complement of the larger right singular vectors.
pub fn right_null_space(a: &CMatrix, threshold: f64, tol: &Tolerances) -> CMatrix {
    let t = singular_triplets(a, 0.0, threshold);
    orthogonal_complement(&orthonormalize_columns(&t.v, tol), tol)
}

/// Unitary polar factor `A (A* A)^(-1/2)` of an invertible `a`.
pub fn polar_unitary(a: &CMatrix) -> CMatrix {
    if a.ncols() == 0 {
        return a.clone();
    }
    let gram = a.adjoint() * a;
    let eig = (&gram + gram.adjoint()).scale(0.5).symmetric_eigen();
    let inv_sqrt = CMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|mu| Complex64::new(1.0 / mu.max(f64::MIN_POSITIVE).sqrt(), 0.0)),
    );
    a * &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint()
}

/// The rank-one operator `h -> <h, y> x`, i.e. the matrix `x y*`.
pub fn rank_one(x: &CVector, y: &CVector) -> Result<CMatrix> {
    require_dim(y, x.len())?;
    Ok(x * y.adjoint())
}

/// Householder reflection `H` (hermitian and unitary) with `H u = alpha e1`,
/// `|alpha| = |u|`. Returns `(H, alpha)`.
pub fn householder_to_axis(u: &CVector) -> (CMatrix, Complex64) {
    let n = u.len();
    let norm = u.norm();
    let phase = if u[0].norm() > 0.0 { u[0] / u[0].norm() } else { ONE };
    let alpha = -phase * norm;
    let mut w = u.clone();
    w[0] -= alpha;
    let ww = w.norm_squared();
    let mut h = CMatrix::identity(n, n);
    if ww > 0.0 {
        h -= (&w * w.adjoint()).scale(2.0 / ww);
    }
    (h, alpha)
}

/// Deterministic unitary mapping `u` to `v` (assumed of equal norm).
///
/// The identity is returned when either vector is at most `zero_tol` in
/// norm. Otherwise `U = H_v D H_u` where `H_u`, `H_v` reflect onto the first
/// axis and `D` fixes the phase of the first coordinate.
pub fn unitary_mapping(u: &CVector, v: &CVector, zero_tol: f64) -> Result<CMatrix> {
    require_dim(v, u.len())?;
    let n = u.len();
    if u.norm() <= zero_tol || v.norm() <= zero_tol {
        return Ok(CMatrix::identity(n, n));
    }
    let (hu, alpha) = householder_to_axis(u);
    let (hv, beta) = householder_to_axis(v);
    let mut d = CMatrix::identity(n, n);
    let ratio = beta / alpha;
    d[(0, 0)] = ratio / ratio.norm();
    Ok(hv * d * hu)
}

pub fn is_unitary_residual(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u * u.adjoint() - CMatrix::identity(n, n)).norm()
}

/// Block-diagonal assembly of square blocks in order.
pub fn block_diagonal(blocks: &[CMatrix]) -> CMatrix {
    let dim: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(dim, dim);
    let mut offset = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((offset, offset), (k, k)).copy_from(b);
        offset += k;
    }
    out
}

pub fn diagonal(values: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(values))
}
