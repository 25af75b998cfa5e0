//! Conjugation interpolation for commuting normal families.
//!
//! Symmetric mode asks for a conjugation `C` with `C x_i = y_i` and
//! `C N_k C = N_k*` for every member; skew mode asks for `C x_i = y_i` and
//! `C N C = -N*` for a single normal `N`. Both are decided atom by atom on
//! the normalised pairs `x_i / r_i`, `y_i / r_i` with `r_i = |x_i|`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::antilinear::{complete_with, normalized_orthogonal, relation_residuals, AntilinearMap, Conjugation};
use crate::error::{Error, Result};
use crate::generate::{random_unitary, random_vector};
use crate::linalg::{
    columns, inner, numerical_rank, orthogonal_complement, orthonormalize_columns, pinv, require_dim, unitary_mapping,
    CMatrix, CVector, Tolerances,
};
use crate::spectral::{
    compress, decompose, joint_decompose_in, orbit_subspace, skew_decision, AtomicSpectrum, JointSpectralDecomp,
    SkewDecision,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Symmetric,
    Skew,
}

#[derive(Debug, Clone)]
pub struct InterpolationProblem {
    pub dim: usize,
    pub operators: Vec<CMatrix>,
    pub xs: Vec<CVector>,
    pub ys: Vec<CVector>,
    pub mode: Mode,
    pub tol: Tolerances,
}

impl InterpolationProblem {
    /// Validated problem on `C^dim`.
    pub fn new(
        dim: usize,
        operators: Vec<CMatrix>,
        xs: Vec<CVector>,
        ys: Vec<CVector>,
        mode: Mode,
        tol: Tolerances,
    ) -> Result<Self> {
        let p = Self {
            dim,
            operators,
            xs,
            ys,
            mode,
            tol,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn symmetric(operators: Vec<CMatrix>, xs: Vec<CVector>, ys: Vec<CVector>, tol: Tolerances) -> Result<Self> {
        let dim = infer_dim(&operators, &xs)?;
        Self::new(dim, operators, xs, ys, Mode::Symmetric, tol)
    }

    pub fn skew(n: CMatrix, xs: Vec<CVector>, ys: Vec<CVector>, tol: Tolerances) -> Result<Self> {
        let dim = n.nrows();
        Self::new(dim, vec![n], xs, ys, Mode::Skew, tol)
    }

    pub fn validate(&self) -> Result<()> {
        self.tol.validate()?;
        if self.mode == Mode::Skew && self.operators.len() != 1 {
            return Err(Error::SkewOperatorCount(self.operators.len()));
        }
        crate::spectral::check_family(self.dim, &self.operators, &self.tol)?;
        if self.xs.len() != self.ys.len() {
            return Err(Error::LengthMismatch {
                xs: self.xs.len(),
                ys: self.ys.len(),
            });
        }
        normalized_orthogonal("xs", &self.xs, self.dim, &self.tol)?;
        normalized_orthogonal("ys", &self.ys, self.dim, &self.tol)?;
        Ok(())
    }

    fn decomposition(&self) -> Result<JointSpectralDecomp> {
        joint_decompose_in(self.dim, &self.operators, &self.tol)
    }

    /// `(x_i / r_i, y_i / r_i)` with `r_i = |x_i|`.
    fn normalized_pairs(&self) -> (Vec<CVector>, Vec<CVector>) {
        self.xs
            .iter()
            .zip(&self.ys)
            .map(|(x, y)| {
                let r = x.norm();
                (x.unscale(r), y.unscale(r))
            })
            .unzip()
    }
}

fn infer_dim(operators: &[CMatrix], xs: &[CVector]) -> Result<usize> {
    operators
        .first()
        .map(|n| n.nrows())
        .or_else(|| xs.first().map(|x| x.len()))
        .ok_or(Error::DimensionMismatch { expected: 1, found: 0 })
}

/// A failed feasibility condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `|x_i| != |y_i|`.
    NormMismatch { index: usize, x_norm: f64, y_norm: f64 },
    /// `<Q x_i, x_j>` against `<Q' y_j, y_i>`, with `Q'` the partner atom.
    Gram {
        atom: usize,
        i: usize,
        j: usize,
        lhs: Complex64,
        rhs: Complex64,
    },
    /// `<Q x_i, y_j>` against `<Q' x_j, y_i>`.
    Cross {
        atom: usize,
        i: usize,
        j: usize,
        lhs: Complex64,
        rhs: Complex64,
    },
    /// `|Q x| != |Q y|` in the single-pair test.
    AtomNorm { atom: usize, x_norm: f64, y_norm: f64 },
    /// The compression of `N` to the complement of the orbit is not
    /// skew-symmetric.
    Complement {
        eigenvalue: Complex64,
        multiplicity: usize,
        partner_multiplicity: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible,
    /// Every failed condition, first failure first.
    Infeasible(Vec<Violation>),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible)
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            Feasibility::Feasible => &[],
            Feasibility::Infeasible(v) => v,
        }
    }

    fn from_violations(v: Vec<Violation>) -> Self {
        if v.is_empty() {
            Feasibility::Feasible
        } else {
            Feasibility::Infeasible(v)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub mode: Mode,
    pub feasible: bool,
    /// Present exactly when `feasible`.
    pub conjugation: Option<Conjugation>,
    pub residuals: BTreeMap<String, f64>,
    pub violations: Vec<Violation>,
}

/// Antilinear partial isometry: `C` restricted to the orbit `L` of the pairs
/// and zero on `L^perp`.
#[derive(Debug, Clone)]
pub struct PartialIsometryWitness {
    pub v: AntilinearMap,
    pub domain_basis: Vec<CVector>,
}

/// Atom `a` of the decomposition matched with the atom at `-lambda` (skew
/// mode) or with itself (symmetric mode).
fn partner_atoms(d: &JointSpectralDecomp, mode: Mode, tol: &Tolerances) -> Vec<Option<usize>> {
    match mode {
        Mode::Symmetric => (0..d.atoms.len()).map(Some).collect(),
        Mode::Skew => d
            .atoms
            .iter()
            .map(|a| {
                let target = -a.eigenvalues[0];
                d.atoms
                    .iter()
                    .enumerate()
                    .map(|(j, b)| (j, (b.eigenvalues[0] - target).norm()))
                    .filter(|&(_, dist)| dist <= tol.cluster)
                    .min_by(|x, y| x.1.total_cmp(&y.1))
                    .map(|(j, _)| j)
            })
            .collect(),
    }
}

/// Atom conditions shared by both modes. In atom coordinates
/// `<Q u, v> = <B* u, B* v>`.
fn atom_violations(p: &InterpolationProblem, d: &JointSpectralDecomp) -> Vec<Violation> {
    let tol = &p.tol;
    let mut out = Vec::new();
    for (index, (x, y)) in p.xs.iter().zip(&p.ys).enumerate() {
        let (xn, yn) = (x.norm(), y.norm());
        if (xn - yn).abs() > tol.residual * xn.max(1.0) {
            out.push(Violation::NormMismatch {
                index,
                x_norm: xn,
                y_norm: yn,
            });
        }
    }
    let (xh, yh) = p.normalized_pairs();
    let count = xh.len();
    let zero = Complex64::default();
    let coords = |b: &CMatrix, vs: &[CVector]| -> Vec<CVector> { vs.iter().map(|v| b.adjoint() * v).collect() };
    let atom_coords: Vec<(Vec<CVector>, Vec<CVector>)> = d
        .atoms
        .iter()
        .map(|a| (coords(&a.basis, &xh), coords(&a.basis, &yh)))
        .collect();
    let partners = partner_atoms(d, p.mode, tol);
    let mut targeted = vec![false; d.atoms.len()];
    for (a, partner) in partners.iter().enumerate() {
        if let Some(t) = partner {
            targeted[*t] = true;
        }
        let (ax, ay) = &atom_coords[a];
        let target = partner.map(|t| &atom_coords[t]);
        for i in 0..count {
            for j in i..count {
                let lhs = inner(&ax[i], &ax[j]);
                let rhs = target.map_or(zero, |(_, ty)| inner(&ty[j], &ty[i]));
                if (lhs - rhs).norm() > tol.residual {
                    out.push(Violation::Gram {
                        atom: a,
                        i,
                        j,
                        lhs,
                        rhs,
                    });
                }
            }
        }
        for i in 0..count {
            for j in 0..count {
                if p.mode == Mode::Symmetric && j <= i {
                    continue;
                }
                let lhs = inner(&ax[i], &ay[j]);
                let rhs = target.map_or(zero, |(tx, ty)| inner(&tx[j], &ty[i]));
                if (lhs - rhs).norm() > tol.residual {
                    out.push(Violation::Cross {
                        atom: a,
                        i,
                        j,
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    // Sets D with E(D) = 0 but E(-D) != 0: atoms nobody is paired with.
    for (b, hit) in targeted.iter().enumerate() {
        if *hit {
            continue;
        }
        let (bx, by) = &atom_coords[b];
        for i in 0..count {
            for j in 0..count {
                let rhs = inner(&by[j], &by[i]);
                if j >= i && rhs.norm() > tol.residual {
                    out.push(Violation::Gram {
                        atom: b,
                        i,
                        j,
                        lhs: zero,
                        rhs,
                    });
                }
                let rhs = inner(&bx[j], &by[i]);
                if rhs.norm() > tol.residual {
                    out.push(Violation::Cross {
                        atom: b,
                        i,
                        j,
                        lhs: zero,
                        rhs,
                    });
                }
            }
        }
    }
    out
}

/// Per-atom test of a symmetric problem against the joint atoms of the
/// family.
pub fn feasibility_symmetric(p: &InterpolationProblem) -> Result<Feasibility> {
    if p.mode != Mode::Symmetric {
        return Err(Error::WrongMode { expected: "symmetric" });
    }
    p.validate()?;
    let d = p.decomposition()?;
    Ok(Feasibility::from_violations(atom_violations(p, &d)))
}

/// Per-atom test of a skew problem, with atoms paired `lambda <-> -lambda`,
/// followed by the skew-symmetry test of `N` compressed to the complement
/// of the orbit of all `x_i`, `y_i`.
pub fn feasibility_skew(p: &InterpolationProblem) -> Result<Feasibility> {
    if p.mode != Mode::Skew {
        return Err(Error::WrongMode { expected: "skew" });
    }
    p.validate()?;
    let d = p.decomposition()?;
    let mut violations = atom_violations(p, &d);
    if let SkewDecision::NotSkew {
        eigenvalue,
        multiplicity,
        partner_multiplicity,
    } = complement_decision(p, &d)?
    {
        violations.push(Violation::Complement {
            eigenvalue,
            multiplicity,
            partner_multiplicity,
        });
    }
    Ok(Feasibility::from_violations(violations))
}

pub fn feasibility(p: &InterpolationProblem) -> Result<Feasibility> {
    match p.mode {
        Mode::Symmetric => feasibility_symmetric(p),
        Mode::Skew => feasibility_skew(p),
    }
}

fn complement_decision(p: &InterpolationProblem, d: &JointSpectralDecomp) -> Result<SkewDecision> {
    let seeds: Vec<CVector> = p.xs.iter().chain(&p.ys).cloned().collect();
    let l = orbit_subspace(d, &seeds, &p.tol)?;
    let z = orthogonal_complement(&l, &p.tol);
    let r = compress(&p.operators[0], &z);
    skew_decision(&crate::spectral::decompose_unchecked(&r, &p.tol), &p.tol)
}

pub fn construct_symmetric(p: &InterpolationProblem) -> Result<Certificate> {
    if p.mode != Mode::Symmetric {
        return Err(Error::WrongMode { expected: "symmetric" });
    }
    construct(p)
}

pub fn construct_skew(p: &InterpolationProblem) -> Result<Certificate> {
    if p.mode != Mode::Skew {
        return Err(Error::WrongMode { expected: "skew" });
    }
    construct(p)
}

/// Decides `p` and, when feasible, builds the conjugation.
///
/// `L_X` gets an orthonormal basis `e_j` led by the normalised `x_i`; the
/// antilinear isometry `W` sends `Q_a x_i` to `Q_t y_i` (`t` the partner
/// atom), giving `f_j = W e_j`. The pairs `e_j <-> f_j` are completed to a
/// conjugation on `L`, and `L^perp` receives a conjugation adapted to the
/// compressed family. An infeasible problem yields a certificate without a
/// conjugation.
pub fn construct(p: &InterpolationProblem) -> Result<Certificate> {
    let verdict = feasibility(p)?;
    if let Feasibility::Infeasible(violations) = verdict {
        return Ok(Certificate {
            mode: p.mode,
            feasible: false,
            conjugation: None,
            residuals: BTreeMap::new(),
            violations,
        });
    }
    let tol = &p.tol;
    let d = p.decomposition()?;
    let (xh, yh) = p.normalized_pairs();
    let e = orbit_subspace(&d, &xh, tol)?;
    let f = apply_w(&d, &partner_atoms(&d, p.mode, tol), &xh, &yh, &e, tol)?;
    let c = complete_with(&e, &f, tol, |z| complement_conjugation(p, z))?;

    let names: Vec<String> = (0..p.operators.len()).map(|k| k.to_string()).collect();
    let residuals = certificate_residuals(p, c.matrix(), &names)?;
    if let Some((name, &residual)) = residuals.iter().find(|(_, &r)| r > tol.residual) {
        return Err(Error::Construction {
            name: name.clone(),
            residual,
        });
    }
    Ok(Certificate {
        mode: p.mode,
        feasible: true,
        conjugation: Some(c),
        residuals,
        violations: Vec::new(),
    })
}

/// `F = W E`: on atom `a`, expand `Q_a e` in the `Q_a x_i`, conjugate the
/// coefficients and substitute `Q_t y_i`.
fn apply_w(
    d: &JointSpectralDecomp,
    partners: &[Option<usize>],
    xh: &[CVector],
    yh: &[CVector],
    e: &CMatrix,
    tol: &Tolerances,
) -> Result<CMatrix> {
    let dim = d.dim;
    let xm = columns(xh, dim)?;
    let ym = columns(yh, dim)?;
    let mut f = CMatrix::zeros(dim, e.ncols());
    for (a, partner) in partners.iter().enumerate() {
        let Some(t) = *partner else { continue };
        let ba = d.atom_basis(a);
        let bt = d.atom_basis(t);
        let xa = ba.adjoint() * &xm;
        let yt = bt.adjoint() * &ym;
        let alpha = pinv(&xa, tol) * (ba.adjoint() * e);
        f += bt * (yt * alpha.conjugate());
    }
    Ok(f)
}

/// Symmetric unitary (in `Z` coordinates) of the conjugation used on the
/// complement `span(Z)` of the orbit.
fn complement_conjugation(p: &InterpolationProblem, z: &CMatrix) -> Result<CMatrix> {
    let tol = &p.tol;
    let m = z.ncols();
    match p.mode {
        Mode::Symmetric => {
            // coefficientwise conjugation in a joint eigenbasis of the
            // compressed family
            let compressed: Vec<CMatrix> = p.operators.iter().map(|n| compress(n, z)).collect();
            let jd = crate::spectral::joint_decompose_unchecked(m, &compressed, tol);
            let mut u = CMatrix::zeros(m, m);
            let mut col = 0;
            for atom in &jd.atoms {
                let k = atom.basis.ncols();
                u.columns_mut(col, k).copy_from(&atom.basis);
                col += k;
            }
            Ok(&u * u.transpose())
        }
        Mode::Skew => {
            let r = compress(&p.operators[0], z);
            match skew_decision(&crate::spectral::decompose_unchecked(&r, tol), tol)? {
                SkewDecision::Skew(c) => Ok(c.into_matrix()),
                SkewDecision::NotSkew { .. } => Err(Error::Inconsistent {
                    reason: "complement of the orbit is not skew-symmetric",
                    residual: f64::INFINITY,
                }),
            }
        }
    }
}

/// Residuals of a claimed conjugation matrix `s` for `p`, recomputed from
/// scratch:
///
/// * `conjugation.symmetry`, `conjugation.unitarity`: `|S - S^T|`, `|S S* - I|`;
/// * `relation.<name>`: `|C N C -/+ N*| / max(1, |N|)` (sign by mode);
/// * `pair.<i>`: `|C x_i - y_i| / max(1, |x_i|)`.
pub fn certificate_residuals(p: &InterpolationProblem, s: &CMatrix, names: &[String]) -> Result<BTreeMap<String, f64>> {
    let dim = p.dim;
    if s.nrows() != dim || s.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: s.nrows(),
        });
    }
    let mut out = BTreeMap::new();
    out.insert("conjugation.symmetry".to_string(), (s - s.transpose()).norm());
    out.insert(
        "conjugation.unitarity".to_string(),
        (s * s.adjoint() - CMatrix::identity(dim, dim)).norm(),
    );
    for (k, n) in p.operators.iter().enumerate() {
        let ctc = s * n.conjugate() * s.adjoint();
        let raw = match p.mode {
            Mode::Symmetric => (ctc - n.adjoint()).norm(),
            Mode::Skew => (ctc + n.adjoint()).norm(),
        };
        let name = names.get(k).cloned().unwrap_or_else(|| k.to_string());
        out.insert(format!("relation.{name}"), raw / n.norm().max(1.0));
    }
    for (i, (x, y)) in p.xs.iter().zip(&p.ys).enumerate() {
        let cx = s * x.conjugate();
        out.insert(format!("pair.{i}"), (cx - y).norm() / x.norm().max(1.0));
    }
    Ok(out)
}

/// Per-joint-atom norm test for a single pair: `|Q x| = |Q y|` for every
/// joint atom `Q`.
pub fn feasibility_single(family: &[CMatrix], x: &CVector, y: &CVector, tol: &Tolerances) -> Result<Feasibility> {
    let d = single_pair_decomposition(family, x, y, tol)?;
    let bound = tol.residual * x.norm().max(1.0);
    let violations = d
        .atoms
        .iter()
        .enumerate()
        .filter_map(|(atom, a)| {
            let x_norm = (a.basis.adjoint() * x).norm();
            let y_norm = (a.basis.adjoint() * y).norm();
            ((x_norm - y_norm).abs() > bound).then_some(Violation::AtomNorm { atom, x_norm, y_norm })
        })
        .collect();
    Ok(Feasibility::from_violations(violations))
}

fn single_pair_decomposition(
    family: &[CMatrix],
    x: &CVector,
    y: &CVector,
    tol: &Tolerances,
) -> Result<JointSpectralDecomp> {
    let dim = x.len();
    require_dim(y, dim)?;
    for (set, v) in [("xs", x), ("ys", y)] {
        let norm = v.norm();
        if norm <= tol.rank {
            return Err(Error::ZeroVector { set, index: 0, norm });
        }
    }
    joint_decompose_in(dim, family, tol)
}

/// Unitary `U` commuting with the family and mapping `x` to `y`, assembled
/// from one unitary mapping per joint eigenspace.
pub fn unitary_commutant_witness(family: &[CMatrix], x: &CVector, y: &CVector, tol: &Tolerances) -> Result<CMatrix> {
    if let Feasibility::Infeasible(v) = feasibility_single(family, x, y, tol)? {
        return Err(Error::Infeasible(format!("{:?}", v[0])));
    }
    let d = single_pair_decomposition(family, x, y, tol)?;
    let zero_tol = tol.residual * x.norm().max(1.0);
    let mut u = CMatrix::zeros(x.len(), x.len());
    for a in &d.atoms {
        let block = unitary_mapping(&(a.basis.adjoint() * x), &(a.basis.adjoint() * y), zero_tol)?;
        u += &a.basis * block * a.basis.adjoint();
    }
    Ok(u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationEntry {
    pub lambda: Complex64,
    pub operator: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub entries: Vec<PerturbationEntry>,
    pub max_residual: f64,
    pub passed: bool,
}

/// Relation residuals of rank-two perturbations under a certified `C` for a
/// single pair `(x, y)`: `N_k + lambda x(x)y` (symmetric mode, relative to
/// `max(1, |T|)`) or `N + lambda (x(x)x - y(x)y)` (skew mode).
pub fn perturbation_suite(
    c: &Certificate,
    p: &InterpolationProblem,
    samples: &[Complex64],
) -> Result<PerturbationReport> {
    let Some(conj) = c.conjugation.as_ref().filter(|_| c.feasible) else {
        return Err(Error::Infeasible("certificate is not feasible".into()));
    };
    if p.xs.len() != 1 {
        return Err(Error::NotSingleton(p.xs.len()));
    }
    let (x, y) = (&p.xs[0], &p.ys[0]);
    let mut entries = Vec::new();
    match p.mode {
        Mode::Symmetric => {
            let xy = x * y.adjoint();
            for (k, n) in p.operators.iter().enumerate() {
                for &lambda in samples {
                    let t = n + &xy * lambda;
                    let residual = relation_residuals(conj, &t)?.sym / t.norm().max(1.0);
                    entries.push(PerturbationEntry {
                        lambda,
                        operator: k,
                        residual,
                    });
                }
            }
        }
        Mode::Skew => {
            let pair = columns(&[x.clone(), y.clone()], p.dim)?;
            if numerical_rank(&pair, &p.tol) < 2 {
                return Err(Error::CollinearPair);
            }
            let delta = x * x.adjoint() - y * y.adjoint();
            for &lambda in samples {
                let t = &p.operators[0] + &delta * lambda;
                let residual = relation_residuals(conj, &t)?.skew / t.norm().max(1.0);
                entries.push(PerturbationEntry {
                    lambda,
                    operator: 0,
                    residual,
                });
            }
        }
    }
    let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    Ok(PerturbationReport {
        entries,
        max_residual,
        passed: max_residual <= p.tol.residual,
    })
}

impl PartialIsometryWitness {
    /// `V = C P_L` for the orbit `L` of all `x_i`, `y_i`.
    pub fn from_conjugation(c: &Conjugation, p: &InterpolationProblem) -> Result<Self> {
        let d = p.decomposition()?;
        let seeds: Vec<CVector> = p.xs.iter().chain(&p.ys).cloned().collect();
        let l = orbit_subspace(&d, &seeds, &p.tol)?;
        let proj = &l * l.adjoint();
        let v = AntilinearMap::new(c.matrix() * proj.conjugate())?;
        Ok(Self {
            v,
            domain_basis: crate::linalg::column_vectors(&l),
        })
    }

    pub fn domain_projection(&self) -> CMatrix {
        let dim = self.v.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for b in &self.domain_basis {
            out += b * b.adjoint();
        }
        out
    }
}

/// Whether `span(m_basis)` is a sum of eigenspaces of the normal `n`:
/// every atom projection `P_a` satisfies `P_M P_a = 0` or `P_M P_a = P_a`.
pub fn is_hyperinvariant(n: &CMatrix, m_basis: &[CVector], tol: &Tolerances) -> Result<bool> {
    let d = decompose(n, tol)?;
    let dim = d.dim;
    let q = subspace_basis(m_basis, dim, tol)?;
    let pm = &q * q.adjoint();
    let bound = dim.max(1) as f64 * tol.residual;
    Ok(d.atoms.iter().all(|a| {
        let pa = a.projection();
        let prod = &pm * &pa;
        prod.norm() <= bound || (prod - pa).norm() <= bound
    }))
}

fn subspace_basis(m_basis: &[CVector], dim: usize, tol: &Tolerances) -> Result<CMatrix> {
    let m = columns(m_basis, dim)?;
    Ok(orthonormalize_columns(&m, tol))
}

/// Searches for a conjugation `C` with `C N C = N*` and `C M` not inside
/// `M`. Each trial draws a unit `x` in `M`, sets `y = U x` for a unitary
/// `U` that is Haar on every eigenspace of `n`, and builds `C` with
/// `C x = y`; the first `C` moving the basis of `M` off `M` by more than
/// `dim * tol.residual` is returned.
pub fn hyperinvariance_falsifier(
    n: &CMatrix,
    m_basis: &[CVector],
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Option<Conjugation>> {
    let d = decompose(n, tol)?;
    let dim = d.dim;
    let q = subspace_basis(m_basis, dim, tol)?;
    if q.ncols() == 0 || q.ncols() == dim {
        return Ok(None);
    }
    let leak = CMatrix::identity(dim, dim) - &q * q.adjoint();
    let bound = dim as f64 * tol.residual;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let coeff = random_vector(&mut rng, q.ncols());
        let x = &q * coeff.unscale(coeff.norm());
        let mut u = CMatrix::zeros(dim, dim);
        for a in &d.atoms {
            let h = random_unitary(&mut rng, a.multiplicity());
            u += &a.basis * h * a.basis.adjoint();
        }
        let y = &u * &x;
        let p = InterpolationProblem::new(dim, vec![n.clone()], vec![x], vec![y], Mode::Symmetric, *tol)?;
        let cert = construct_symmetric(&p)?;
        let Some(c) = cert.conjugation else {
            return Err(Error::Inconsistent {
                reason: "commutant image was declared infeasible",
                residual: f64::INFINITY,
            });
        };
        let escape = (&leak * c.matrix() * q.conjugate()).norm();
        if escape > bound {
            return Ok(Some(c));
        }
    }
    Ok(None)
}
