//! Spectral structure of normal matrices and commuting normal families.
//!
//! Every spectral projection `E_N(Delta)` at finite dimension is a sum of
//! atom projections, so Borel sets are represented by sets of atom indices
//! ([`BorelSelector`]).

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::antilinear::{conjugation_from_pairing, Conjugation};
use crate::error::{Error, Result};
use crate::linalg::{
    commutator_norm, hermitian_eig, orthonormalize_columns, require_dim, require_square, right_null_space, CMatrix,
    CVector, Tolerances, I,
};

/// One eigenvalue with an orthonormal basis (columns) of its eigenspace.
#[derive(Debug, Clone)]
pub struct Atom {
    pub eigenvalue: Complex64,
    pub basis: CMatrix,
}

impl Atom {
    pub fn multiplicity(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projection(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }
}

#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    pub dim: usize,
    pub atoms: Vec<Atom>,
}

/// A joint eigenvalue tuple of a commuting family with its joint eigenspace.
#[derive(Debug, Clone)]
pub struct JointAtom {
    pub eigenvalues: Vec<Complex64>,
    pub basis: CMatrix,
}

#[derive(Debug, Clone)]
pub struct JointSpectralDecomp {
    pub dim: usize,
    pub family_size: usize,
    pub atoms: Vec<JointAtom>,
}

/// Finite set of atom indices standing in for a Borel subset of the plane.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BorelSelector {
    indices: BTreeSet<usize>,
}

impl BorelSelector {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        Self {
            indices: indices.into_iter().collect(),
        }
    }

    pub fn all(atoms: usize) -> Self {
        Self::new(0..atoms)
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// Selector with bit `i` of `mask` selecting atom `i`.
    pub fn from_mask(mask: u64, atoms: usize) -> Self {
        Self::new((0..atoms).filter(|i| mask >> i & 1 == 1))
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.contains(&index)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self {
            indices: self.indices.intersection(&other.indices).copied().collect(),
        }
    }
}

/// Shared interface of single and joint decompositions.
pub trait AtomicSpectrum {
    fn dim(&self) -> usize;
    fn atom_count(&self) -> usize;
    fn atom_basis(&self, index: usize) -> &CMatrix;

    fn atom_projection(&self, index: usize) -> CMatrix {
        let b = self.atom_basis(index);
        b * b.adjoint()
    }

    /// Sum of the selected atoms' orthogonal projections.
    fn projection(&self, sel: &BorelSelector) -> Result<CMatrix> {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for i in sel.indices() {
            if i >= self.atom_count() {
                return Err(Error::InvalidSelector {
                    index: i,
                    atoms: self.atom_count(),
                });
            }
            out += self.atom_projection(i);
        }
        Ok(out)
    }
}

impl AtomicSpectrum for SpectralDecomp {
    fn dim(&self) -> usize {
        self.dim
    }
    fn atom_count(&self) -> usize {
        self.atoms.len()
    }
    fn atom_basis(&self, index: usize) -> &CMatrix {
        &self.atoms[index].basis
    }
}

impl AtomicSpectrum for JointSpectralDecomp {
    fn dim(&self) -> usize {
        self.dim
    }
    fn atom_count(&self) -> usize {
        self.atoms.len()
    }
    fn atom_basis(&self, index: usize) -> &CMatrix {
        &self.atoms[index].basis
    }
}

impl SpectralDecomp {
    /// Index of the atom within `tol.cluster` of `z`, nearest first.
    pub fn find(&self, z: Complex64, tol: &Tolerances) -> Option<usize> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (i, (a.eigenvalue - z).norm()))
            .filter(|&(_, d)| d <= tol.cluster)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }
}

/// `|N N* - N* N|_F`.
pub fn check_normal(n: &CMatrix) -> Result<f64> {
    require_square(n)?;
    let a = n.adjoint();
    Ok((n * &a - &a * n).norm())
}

/// Eigen-atoms of a normal matrix.
///
/// The hermitian part is diagonalised first, and each of its eigenspaces is
/// refined by the compressed skew-hermitian part. Both passes merge
/// eigenvalues by single linkage at `tol.cluster`; the atom eigenvalue is
/// the mean of the compression of `n` onto the atom.
pub fn decompose(n: &CMatrix, tol: &Tolerances) -> Result<SpectralDecomp> {
    let residual = check_normal(n)?;
    if residual > tol.residual {
        return Err(Error::NonNormal { index: 0, residual });
    }
    Ok(decompose_unchecked(n, tol))
}

pub(crate) fn decompose_unchecked(n: &CMatrix, tol: &Tolerances) -> SpectralDecomp {
    let dim = n.nrows();
    let re = (n + n.adjoint()).scale(0.5);
    let im = (n - n.adjoint()) * (-I * 0.5);
    let outer = hermitian_eig(&re, &loose(tol)).expect("hermitian by construction");
    let mut atoms = Vec::new();
    for (start, end) in clusters(&outer.values, tol.cluster) {
        let block = outer.vectors.columns(start, end - start).into_owned();
        let compressed = block.adjoint() * &im * &block;
        let inner_eig = hermitian_eig(&compressed, &loose(tol)).expect("hermitian by construction");
        for (s, e) in clusters(&inner_eig.values, tol.cluster) {
            let basis = &block * inner_eig.vectors.columns(s, e - s);
            let m = basis.ncols() as f64;
            let eigenvalue = (basis.adjoint() * n * &basis).trace() / m;
            atoms.push(Atom { eigenvalue, basis });
        }
    }
    SpectralDecomp { dim, atoms }
}

/// Hermitian parts built here are hermitian only up to rounding.
fn loose(tol: &Tolerances) -> Tolerances {
    Tolerances {
        residual: f64::INFINITY,
        ..*tol
    }
}

/// Maximal runs of sorted values whose consecutive gaps are within `gap`.
fn clusters(values: &[f64], gap: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > gap {
            if i > start {
                out.push((start, i));
            }
            start = i;
        }
    }
    out
}

/// Joint atoms of a commuting normal family by recursive refinement: the
/// current atoms are split by the compression of each further operator.
pub fn joint_decompose(family: &[CMatrix], tol: &Tolerances) -> Result<JointSpectralDecomp> {
    let Some(first) = family.first() else {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    };
    joint_decompose_in(first.nrows(), family, tol)
}

/// As [`joint_decompose`], allowing an empty family on `C^dim` (one atom,
/// the whole space).
pub fn joint_decompose_in(dim: usize, family: &[CMatrix], tol: &Tolerances) -> Result<JointSpectralDecomp> {
    check_family(dim, family, tol)?;
    Ok(joint_decompose_unchecked(dim, family, tol))
}

/// Refinement without the normality and commutation checks, for
/// compressions that are normal only up to rounding.
pub(crate) fn joint_decompose_unchecked(dim: usize, family: &[CMatrix], tol: &Tolerances) -> JointSpectralDecomp {
    let mut atoms = vec![JointAtom {
        eigenvalues: Vec::new(),
        basis: CMatrix::identity(dim, dim),
    }];
    for op in family {
        let mut refined = Vec::with_capacity(atoms.len());
        for atom in atoms {
            let compressed = atom.basis.adjoint() * op * &atom.basis;
            for sub in decompose_unchecked(&compressed, tol).atoms {
                let mut eigenvalues = atom.eigenvalues.clone();
                eigenvalues.push(sub.eigenvalue);
                refined.push(JointAtom {
                    eigenvalues,
                    basis: &atom.basis * sub.basis,
                });
            }
        }
        atoms = refined;
    }
    JointSpectralDecomp {
        dim,
        family_size: family.len(),
        atoms,
    }
}

/// Checks squareness, dimension, normality and pairwise commutation.
pub fn check_family(dim: usize, family: &[CMatrix], tol: &Tolerances) -> Result<()> {
    for (index, op) in family.iter().enumerate() {
        let d = require_square(op)?;
        if d != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: d,
            });
        }
        let residual = check_normal(op)?;
        if residual > tol.residual {
            return Err(Error::NonNormal { index, residual });
        }
    }
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            let residual = commutator_norm(&family[i], &family[j]);
            if residual > tol.residual {
                return Err(Error::NonCommuting {
                    first: i,
                    second: j,
                    residual,
                });
            }
        }
    }
    Ok(())
}

/// Orthonormal basis of the smallest reducing subspace containing `seeds`:
/// the span of `Q_a x` over joint atoms `a` and seeds `x`. The normalised
/// seeds lead the basis when they are mutually orthogonal.
pub fn orbit_subspace<D: AtomicSpectrum>(d: &D, seeds: &[CVector], tol: &Tolerances) -> Result<CMatrix> {
    let dim = d.dim();
    let mut columns = Vec::with_capacity(seeds.len() * (d.atom_count() + 1));
    let mut normalized = Vec::with_capacity(seeds.len());
    for (index, x) in seeds.iter().enumerate() {
        require_dim(x, dim)?;
        let norm = x.norm();
        if norm <= tol.rank {
            return Err(Error::ZeroVector {
                set: "seeds",
                index,
                norm,
            });
        }
        normalized.push(x.unscale(norm));
    }
    columns.extend(normalized.iter().cloned());
    for a in 0..d.atom_count() {
        let b = d.atom_basis(a);
        for x in &normalized {
            columns.push(b * (b.adjoint() * x));
        }
    }
    let stacked = CMatrix::from_fn(dim, columns.len(), |i, j| columns[j][i]);
    Ok(orthonormalize_columns(&stacked, tol))
}

/// Dimension of every atom, in atom order.
pub fn multiplicity_map(d: &SpectralDecomp) -> Vec<(Complex64, usize)> {
    d.atoms.iter().map(|a| (a.eigenvalue, a.multiplicity())).collect()
}

#[derive(Debug, Clone)]
pub enum SkewDecision {
    /// `C N C = -N*` for the carried conjugation.
    Skew(Conjugation),
    /// The multiplicity of `eigenvalue` differs from that of its negation.
    NotSkew {
        eigenvalue: Complex64,
        multiplicity: usize,
        partner_multiplicity: usize,
    },
}

impl SkewDecision {
    pub fn is_skew(&self) -> bool {
        matches!(self, SkewDecision::Skew(_))
    }
}

/// Decides whether a normal `n` admits a conjugation with `C N C = -N*`,
/// i.e. whether `mult(lambda) = mult(-lambda)` for every non-zero atom.
///
/// The witness swaps orthonormal bases of the `lambda` and `-lambda`
/// eigenspaces and conjugates coefficientwise on the kernel. Atoms within
/// `tol.cluster` of the origin count as kernel.
pub fn is_skew_symmetric_normal(n: &CMatrix, tol: &Tolerances) -> Result<SkewDecision> {
    let d = decompose(n, tol)?;
    skew_decision(&d, tol)
}

pub(crate) fn skew_decision(d: &SpectralDecomp, tol: &Tolerances) -> Result<SkewDecision> {
    let mut pairs = Vec::new();
    let mut fixed = Vec::new();
    let mut used = vec![false; d.atoms.len()];
    for (i, atom) in d.atoms.iter().enumerate() {
        if used[i] {
            continue;
        }
        if atom.eigenvalue.norm() <= tol.cluster {
            fixed.push(atom.basis.clone());
            used[i] = true;
            continue;
        }
        let partner = d
            .find(-atom.eigenvalue, tol)
            .filter(|&j| j != i && !used[j] && d.atoms[j].eigenvalue.norm() > tol.cluster);
        let partner_multiplicity = partner.map_or(0, |j| d.atoms[j].multiplicity());
        if partner_multiplicity != atom.multiplicity() {
            return Ok(SkewDecision::NotSkew {
                eigenvalue: atom.eigenvalue,
                multiplicity: atom.multiplicity(),
                partner_multiplicity,
            });
        }
        let j = partner.expect("matched multiplicity implies a partner");
        used[i] = true;
        used[j] = true;
        pairs.push((atom.basis.clone(), d.atoms[j].basis.clone()));
    }
    let s = conjugation_from_pairing(d.dim, &pairs, &fixed);
    Ok(SkewDecision::Skew(Conjugation::new(s, tol)?))
}

/// Orthonormal basis of the normal part `H_nor`: the common kernel of
/// `T*^n T^m - T^m T*^n` for `1 <= n, m <= dim`.
///
/// `t` is rescaled to unit norm and each commutator block to unit
/// Frobenius norm before stacking; the stack is folded into a square `R`
/// factor by repeated QR so its kernel is read off one small SVD.
pub fn normal_part(t: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let dim = require_square(t)?;
    let scale = t.norm();
    if dim == 0 || scale == 0.0 {
        return Ok(CMatrix::identity(dim, dim));
    }
    let ts = t.unscale(scale);
    let mut powers = Vec::with_capacity(dim);
    let mut p = ts.clone();
    for _ in 0..dim {
        powers.push(p.clone());
        p = &p * &ts;
    }
    let mut r = CMatrix::zeros(0, dim);
    for pn in &powers {
        let an = pn.adjoint();
        for pm in &powers {
            let x = &an * pm - pm * &an;
            let norm = x.norm();
            if norm <= tol.residual {
                continue;
            }
            let mut stacked = CMatrix::zeros(r.nrows() + dim, dim);
            stacked.rows_mut(0, r.nrows()).copy_from(&r);
            stacked.rows_mut(r.nrows(), dim).copy_from(&x.unscale(norm));
            r = stacked.qr().r();
        }
    }
    if r.nrows() == 0 {
        return Ok(CMatrix::identity(dim, dim));
    }
    Ok(right_null_space(&r, dim as f64 * tol.residual, tol))
}

/// Compression `B* N B` onto orthonormal columns `B`.
pub fn compress(n: &CMatrix, basis: &CMatrix) -> CMatrix {
    basis.adjoint() * n * basis
}
