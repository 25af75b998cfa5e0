//! Random instance generators: Haar unitaries, normal matrices with a
//! prescribed spectrum, commuting families in a common frame and planted
//! conjugations for them.
//!
//! Every generator takes the caller's RNG so runs are reproducible from a
//! seed.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{diagonal, CMatrix, CVector, ZERO};

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    CVector::from_fn(dim, |_, _| random_complex(rng))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` pushed into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    if dim == 0 {
        return CMatrix::zeros(0, 0);
    }
    let qr = random_matrix(rng, dim, dim).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// `k` orthonormal columns in `C^dim`.
pub fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R, dim: usize, k: usize) -> CMatrix {
    random_unitary(rng, dim).columns(0, k).into_owned()
}

/// `Z Z^T` for Haar `Z`: a symmetric unitary, i.e. the matrix of a random
/// conjugation.
pub fn random_symmetric_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let z = random_unitary(rng, dim);
    &z * z.transpose()
}

/// Orthogonal (not normalised) vectors: orthonormal directions times random
/// positive norms in `[0.5, 2)`.
pub fn random_orthogonal_set<R: Rng + ?Sized>(rng: &mut R, dim: usize, k: usize) -> Vec<CVector> {
    let q = random_orthonormal(rng, dim, k);
    (0..k)
        .map(|j| q.column(j).into_owned() * Complex64::new(rng.random_range(0.5..2.0), 0.0))
        .collect()
}

/// Normal matrix `V diag(spectrum) V*` with Haar `V`; returns `(N, V)`.
pub fn random_normal<R: Rng + ?Sized>(rng: &mut R, spectrum: &[Complex64]) -> (CMatrix, CMatrix) {
    let v = random_unitary(rng, spectrum.len());
    let n = &v * diagonal(spectrum) * v.adjoint();
    (n, v)
}

/// A commuting normal family sharing one eigenframe.
#[derive(Debug, Clone)]
pub struct PlantedFamily {
    pub frame: CMatrix,
    /// `spectra[k][j]` is the eigenvalue of operator `k` on frame column `j`.
    pub spectra: Vec<Vec<Complex64>>,
    pub operators: Vec<CMatrix>,
}

impl PlantedFamily {
    pub fn new(frame: CMatrix, spectra: Vec<Vec<Complex64>>) -> Self {
        let operators = spectra.iter().map(|s| &frame * diagonal(s) * frame.adjoint()).collect();
        Self {
            frame,
            spectra,
            operators,
        }
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    /// Frame coordinates grouped by exactly equal eigenvalue tuples, in order
    /// of first appearance.
    pub fn joint_groups(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<(Vec<Complex64>, Vec<usize>)> = Vec::new();
        for j in 0..self.dim() {
            let tuple: Vec<Complex64> = self.spectra.iter().map(|s| s[j]).collect();
            match groups.iter_mut().find(|(t, _)| *t == tuple) {
                Some((_, idx)) => idx.push(j),
                None => groups.push((tuple, vec![j])),
            }
        }
        groups.into_iter().map(|(_, idx)| idx).collect()
    }

    /// Distinct eigenvalues of operator `k`, in order of first appearance.
    pub fn distinct_eigenvalues(&self, k: usize) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        for &z in &self.spectra[k] {
            if !out.contains(&z) {
                out.push(z);
            }
        }
        out
    }

    /// `E_{N_k}(Delta)` computed from the frame: `V diag(1_Delta) V*`.
    pub fn spectral_projection(&self, k: usize, selected: impl Fn(Complex64) -> bool) -> CMatrix {
        let ind: Vec<Complex64> = self.spectra[k]
            .iter()
            .map(|&z| if selected(z) { Complex64::new(1.0, 0.0) } else { ZERO })
            .collect();
        &self.frame * diagonal(&ind) * self.frame.adjoint()
    }
}

/// Random commuting family of `size` operators on `C^dim` whose joint
/// spectrum has at most `max_atoms` distinct tuples. Eigenvalues come from a
/// small lattice so multiplicities are common.
pub fn random_family<R: Rng + ?Sized>(rng: &mut R, dim: usize, size: usize, max_atoms: usize) -> PlantedFamily {
    let atoms = rng.random_range(1..=max_atoms.min(dim).max(1));
    let tuples: Vec<Vec<Complex64>> = (0..atoms)
        .map(|_| (0..size).map(|_| lattice_point(rng)).collect())
        .collect();
    // Every atom gets at least one coordinate.
    let mut assignment: Vec<usize> = (0..atoms).collect();
    while assignment.len() < dim {
        assignment.push(rng.random_range(0..atoms));
    }
    let spectra = (0..size)
        .map(|k| assignment.iter().map(|&a| tuples[a][k]).collect())
        .collect();
    PlantedFamily::new(random_unitary(rng, dim), spectra)
}

/// A point of `{-2,...,2} + i{-2,...,2}`.
pub fn lattice_point<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-2..=2) as f64, rng.random_range(-2..=2) as f64)
}

/// Symmetric unitary `S = V Phi V^T` of a conjugation with `C N_k C = N_k*`
/// for every member: `Phi` is a random symmetric unitary on each joint
/// eigenspace of the frame.
pub fn planted_symmetric_conjugation<R: Rng + ?Sized>(rng: &mut R, family: &PlantedFamily) -> CMatrix {
    let dim = family.dim();
    let mut phi = CMatrix::zeros(dim, dim);
    for group in family.joint_groups() {
        let block = random_symmetric_unitary(rng, group.len());
        for (a, &i) in group.iter().enumerate() {
            for (b, &j) in group.iter().enumerate() {
                phi[(i, j)] = block[(a, b)];
            }
        }
    }
    &family.frame * phi * family.frame.transpose()
}

/// Symmetric unitary of a conjugation with `C N C = -N*` for
/// `N = V diag(spectrum) V*`, pairing each `lambda`-eigenspace with the
/// `-lambda`-eigenspace through a random unitary. Returns `None` when the
/// spectrum is not symmetric with multiplicities.
pub fn planted_skew_conjugation<R: Rng + ?Sized>(
    rng: &mut R,
    frame: &CMatrix,
    spectrum: &[Complex64],
) -> Option<CMatrix> {
    let dim = spectrum.len();
    let mut groups: Vec<(Complex64, Vec<usize>)> = Vec::new();
    for (j, &z) in spectrum.iter().enumerate() {
        match groups.iter_mut().find(|(v, _)| *v == z) {
            Some((_, idx)) => idx.push(j),
            None => groups.push((z, vec![j])),
        }
    }
    let mut phi = CMatrix::zeros(dim, dim);
    let mut done = vec![false; groups.len()];
    for g in 0..groups.len() {
        if done[g] {
            continue;
        }
        let (z, ref idx) = groups[g];
        if z == ZERO {
            let block = random_symmetric_unitary(rng, idx.len());
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    phi[(i, j)] = block[(a, b)];
                }
            }
            done[g] = true;
            continue;
        }
        let partner = groups.iter().position(|(w, _)| *w == -z)?;
        let pidx = &groups[partner].1;
        if pidx.len() != idx.len() {
            return None;
        }
        let a = random_unitary(rng, idx.len());
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in pidx.iter().enumerate() {
                phi[(i, j)] = a[(r, c)];
                phi[(j, i)] = a[(r, c)];
            }
        }
        done[g] = true;
        done[partner] = true;
    }
    Some(frame * phi * frame.transpose())
}

/// Linear matrix of `h -> S conj(h)` applied to a vector.
pub fn apply_symmetric(s: &CMatrix, h: &CVector) -> CVector {
    s * h.conjugate()
}
