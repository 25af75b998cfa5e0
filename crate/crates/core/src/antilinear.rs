//! Antilinear maps `h -> M conj(h)` and conjugations.
//!
//! A conjugation is stored as its symmetric unitary factor `S`; the map is
//! `h -> S conj(h)`. Sandwiching a linear `T` gives the linear matrix
//! `C T C = S conj(T) S*`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::generate::random_vector;
use crate::linalg::{
    inner, orthogonal_complement, orthonormalize_columns, pinv, polar_unitary, require_dim, require_square, CMatrix,
    CVector, Tolerances, I,
};

/// General antilinear map `h -> m conj(h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntilinearMap {
    m: CMatrix,
}

impl AntilinearMap {
    pub fn new(m: CMatrix) -> Result<Self> {
        require_square(&m)?;
        Ok(Self { m })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn apply(&self, h: &CVector) -> Result<CVector> {
        require_dim(h, self.dim())?;
        Ok(&self.m * h.conjugate())
    }

    /// The map `V#` with `<V h, k> = <V# k, h>`; its matrix is `m^T`.
    pub fn sharp(&self) -> Self {
        Self { m: self.m.transpose() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugationReport {
    /// `|m - m^T|_F`
    pub symmetry: f64,
    /// `|m m* - I|_F`
    pub unitarity: f64,
    pub passed: bool,
}

pub fn verify_conjugation(a: &AntilinearMap, tol: &Tolerances) -> ConjugationReport {
    report_for(a.matrix(), tol)
}

fn report_for(s: &CMatrix, tol: &Tolerances) -> ConjugationReport {
    let d = s.nrows();
    let symmetry = (s - s.transpose()).norm();
    let unitarity = (s * s.adjoint() - CMatrix::identity(d, d)).norm();
    ConjugationReport {
        symmetry,
        unitarity,
        passed: symmetry <= tol.residual && unitarity <= tol.residual,
    }
}

/// An involutive antiunitary map, represented by a symmetric unitary `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjugation {
    s: CMatrix,
}

impl Conjugation {
    pub fn new(s: CMatrix, tol: &Tolerances) -> Result<Self> {
        require_square(&s)?;
        let report = report_for(&s, tol);
        if !report.passed {
            return Err(Error::NotConjugation {
                symmetry: report.symmetry,
                unitarity: report.unitarity,
            });
        }
        Ok(Self { s })
    }

    /// Entrywise complex conjugation in the standard basis.
    pub fn standard(dim: usize) -> Self {
        Self {
            s: CMatrix::identity(dim, dim),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.s
    }

    pub fn into_matrix(self) -> CMatrix {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn apply(&self, h: &CVector) -> Result<CVector> {
        require_dim(h, self.dim())?;
        Ok(&self.s * h.conjugate())
    }

    pub fn as_antilinear(&self) -> AntilinearMap {
        AntilinearMap { m: self.s.clone() }
    }

    /// Linear matrix of `C T C`.
    pub fn sandwich(&self, t: &CMatrix) -> CMatrix {
        &self.s * t.conjugate() * self.s.adjoint()
    }

    pub fn report(&self, tol: &Tolerances) -> ConjugationReport {
        report_for(&self.s, tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationResiduals {
    /// `|C T C - T*|_F`
    pub sym: f64,
    /// `|C T C + T*|_F`
    pub skew: f64,
    /// `|C T T* C - T* T|_F`
    pub cnormal: f64,
}

pub fn relation_residuals(c: &Conjugation, t: &CMatrix) -> Result<RelationResiduals> {
    require_square(t)?;
    if t.nrows() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: t.nrows(),
        });
    }
    let ctc = c.sandwich(t);
    let t_star = t.adjoint();
    let cnormal = (c.sandwich(&(t * &t_star)) - &t_star * t).norm();
    Ok(RelationResiduals {
        sym: (&ctc - &t_star).norm(),
        skew: (&ctc + &t_star).norm(),
        cnormal,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZhuLiOutcome {
    Feasible(Conjugation),
    /// `|<x_i, y_j> - <x_j, y_i>|` exceeds the tolerance (normalised inputs).
    Infeasible {
        i: usize,
        j: usize,
        lhs: Complex64,
        rhs: Complex64,
    },
}

/// Conjugation with `C x_i = y_i` for orthogonal sets `xs`, `ys` with
/// `|x_i| = |y_i|`, or the first pair `(i, j)` violating
/// `<x_i, y_j> = <x_j, y_i>`.
pub fn zhu_li_interpolate(xs: &[CVector], ys: &[CVector], tol: &Tolerances) -> Result<ZhuLiOutcome> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    let Some(first) = xs.first() else {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    };
    let dim = first.len();
    let xs_hat = normalized_orthogonal("xs", xs, dim, tol)?;
    let ys_hat = normalized_orthogonal("ys", ys, dim, tol)?;
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        let (xn, yn) = (x.norm(), y.norm());
        if (xn - yn).abs() > tol.residual * xn.max(1.0) {
            return Err(Error::NormMismatch {
                index: i,
                x_norm: xn,
                y_norm: yn,
            });
        }
    }
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            let lhs = inner(&xs_hat[i], &ys_hat[j]);
            let rhs = inner(&xs_hat[j], &ys_hat[i]);
            if (lhs - rhs).norm() > tol.residual {
                return Ok(ZhuLiOutcome::Infeasible { i, j, lhs, rhs });
            }
        }
    }
    let g = crate::linalg::columns(&xs_hat, dim)?;
    let h = crate::linalg::columns(&ys_hat, dim)?;
    let c = complete_with(&g, &h, tol, |z| Ok(CMatrix::identity(z.ncols(), z.ncols())))?;
    Ok(ZhuLiOutcome::Feasible(c))
}

pub(crate) fn normalized_orthogonal(
    set: &'static str,
    vs: &[CVector],
    dim: usize,
    tol: &Tolerances,
) -> Result<Vec<CVector>> {
    let mut out = Vec::with_capacity(vs.len());
    for (i, v) in vs.iter().enumerate() {
        require_dim(v, dim)?;
        let norm = v.norm();
        if norm <= tol.rank {
            return Err(Error::ZeroVector { set, index: i, norm });
        }
        out.push(v.unscale(norm));
    }
    for i in 0..out.len() {
        for j in (i + 1)..out.len() {
            let residual = inner(&out[i], &out[j]).norm();
            if residual > tol.residual {
                return Err(Error::NotOrthogonal {
                    set,
                    first: i,
                    second: j,
                    residual,
                });
            }
        }
    }
    Ok(out)
}

/// Conjugation with `C g_l = h_l` for every constraint pair; the swapped
/// pairs `(h_l, g_l)` are added here. Off the constraint span the result is
/// entrywise conjugation in an orthonormal basis of the complement.
pub fn complete_partial_conjugation(domain: &[CVector], images: &[CVector], tol: &Tolerances) -> Result<Conjugation> {
    if domain.len() != images.len() {
        return Err(Error::LengthMismatch {
            xs: domain.len(),
            ys: images.len(),
        });
    }
    let Some(first) = domain.first() else {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    };
    let dim = first.len();
    let g = crate::linalg::columns(domain, dim)?;
    let h = crate::linalg::columns(images, dim)?;
    complete_with(&g, &h, tol, |z| Ok(CMatrix::identity(z.ncols(), z.ncols())))
}

/// Completion engine. `complement` receives an orthonormal basis `Z` of the
/// complement of the constraint span and returns the symmetric unitary of
/// the conjugation to use there, in `Z` coordinates.
pub(crate) fn complete_with<F>(g: &CMatrix, h: &CMatrix, tol: &Tolerances, complement: F) -> Result<Conjugation>
where
    F: FnOnce(&CMatrix) -> Result<CMatrix>,
{
    let dim = g.nrows();
    let k = g.ncols();
    let mut dom = CMatrix::zeros(dim, 2 * k);
    dom.columns_mut(0, k).copy_from(g);
    dom.columns_mut(k, k).copy_from(h);
    let mut img = CMatrix::zeros(dim, 2 * k);
    img.columns_mut(0, k).copy_from(h);
    img.columns_mut(k, k).copy_from(g);

    let scale = dom.column_iter().map(|c| c.norm_squared()).fold(1.0_f64, f64::max);
    let bound = tol.residual * scale;

    // <g_l, g_m> = <h_m, h_l> and <g_l, h_m> = <g_m, h_l>
    let isometry = (dom.adjoint() * &dom - (img.adjoint() * &img).transpose()).norm();
    if isometry > bound {
        return Err(Error::Inconsistent {
            reason: "constraints are not isometric",
            residual: isometry,
        });
    }
    let cross = img.adjoint() * &dom;
    let symmetry = (&cross - cross.transpose()).norm();
    if symmetry > bound {
        return Err(Error::Inconsistent {
            reason: "constraints violate the symmetric Gram condition",
            residual: symmetry,
        });
    }

    let dom_conj = dom.conjugate();
    let s_span = &img * pinv(&dom_conj, tol);
    let fit = (&s_span * &dom_conj - &img).norm();
    if fit > bound {
        return Err(Error::Inconsistent {
            reason: "least-squares fit of the partial map",
            residual: fit,
        });
    }

    let span = orthonormalize_columns(&dom, tol);
    let z = orthogonal_complement(&span, tol);
    let mut s = s_span;
    if z.ncols() > 0 {
        let s_z = complement(&z)?;
        s += &z * s_z * z.transpose();
    }

    let s = symmetrize(&polar_unitary(&symmetrize(&s)));
    let fit = (&s * &dom_conj - &img).norm();
    if fit > bound {
        return Err(Error::Inconsistent {
            reason: "constraints after re-unitarisation",
            residual: fit,
        });
    }
    Conjugation::new(s, tol)
}

fn symmetrize(s: &CMatrix) -> CMatrix {
    (s + s.transpose()).scale(0.5)
}

/// Symmetric unitary of the conjugation that swaps each pair of orthonormal
/// frames `(A, B)` (`C a_r = b_r`, `C b_r = a_r`) and fixes each frame in
/// `fixed` columnwise. The frames must jointly form an orthonormal basis.
pub fn conjugation_from_pairing(dim: usize, pairs: &[(CMatrix, CMatrix)], fixed: &[CMatrix]) -> CMatrix {
    let mut s = CMatrix::zeros(dim, dim);
    for (a, b) in pairs {
        s += b * a.transpose() + a * b.transpose();
    }
    for f in fixed {
        s += f * f.transpose();
    }
    s
}

/// Orthonormal basis (as columns) of vectors fixed by `c`; in this basis
/// `c` acts as coefficientwise conjugation.
///
/// Primary route: `S = A + iB` with commuting real symmetric `A`, `B`;
/// diagonalise them jointly by a real orthogonal `O`, so `S = O D O^T`, and
/// take `z_r = sqrt(d_r) o_r`. If that fails the residual check, vectors
/// `h + Ch` (or `i(h - Ch)`) are deflated one at a time from seeded random
/// `h`.
pub fn fixed_point_basis(c: &Conjugation, tol: &Tolerances) -> Result<CMatrix> {
    let report = c.report(tol);
    if !report.passed {
        return Err(Error::NotConjugation {
            symmetry: report.symmetry,
            unitarity: report.unitarity,
        });
    }
    let bound = c.dim() as f64 * tol.residual;
    if let Some(z) = takagi_fixed_points(c.matrix(), tol) {
        if fixed_point_residual(c.matrix(), &z) <= bound {
            return Ok(z);
        }
    }
    let z = deflated_fixed_points(c, tol);
    let residual = fixed_point_residual(c.matrix(), &z);
    if residual > bound {
        return Err(Error::Construction {
            name: "fixed_point_basis".into(),
            residual,
        });
    }
    Ok(z)
}

fn fixed_point_residual(s: &CMatrix, z: &CMatrix) -> f64 {
    let n = z.ncols();
    (s * z.conjugate() - z).norm() + (z.adjoint() * z - CMatrix::identity(n, n)).norm()
}

fn takagi_fixed_points(s: &CMatrix, tol: &Tolerances) -> Option<CMatrix> {
    let d = s.nrows();
    let a = DMatrix::<f64>::from_fn(d, d, |i, j| s[(i, j)].re);
    let b = DMatrix::<f64>::from_fn(d, d, |i, j| s[(i, j)].im);
    let o = real_joint_frame(&a, &b, tol)?;
    let oc = o.map(|x| Complex64::new(x, 0.0));
    let diag = oc.transpose() * s * &oc;
    let mut z = oc;
    for r in 0..d {
        let root = diag[(r, r)].sqrt();
        let mut col = z.column_mut(r);
        col *= root;
    }
    Some(z)
}

/// Real orthogonal frame diagonalising commuting symmetric `a` and `b`.
fn real_joint_frame(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: &Tolerances) -> Option<DMatrix<f64>> {
    let d = a.nrows();
    let (values, vectors) = sorted_real_eig(a);
    let mut frame = DMatrix::<f64>::zeros(d, d);
    let mut col = 0;
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && values[end] - values[end - 1] <= tol.cluster {
            end += 1;
        }
        let block = vectors.columns(start, end - start).into_owned();
        let compressed = block.transpose() * b * &block;
        let refined = if compressed.norm() <= tol.residual {
            block
        } else {
            let (_, inner_vectors) = sorted_real_eig(&compressed);
            block * inner_vectors
        };
        frame.columns_mut(col, refined.ncols()).copy_from(&refined);
        col += refined.ncols();
        start = end;
    }
    (col == d).then_some(frame)
}

fn sorted_real_eig(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn deflated_fixed_points(c: &Conjugation, tol: &Tolerances) -> CMatrix {
    let d = c.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut basis = CMatrix::zeros(d, 0);
    while basis.ncols() < d {
        let mut h = random_vector(&mut rng, d);
        h -= &basis * (basis.adjoint() * &h);
        let ch = c.matrix() * h.conjugate();
        let plus = &h + &ch;
        let minus = (&h - &ch) * I;
        let z = if plus.norm() >= minus.norm() { plus } else { minus };
        let norm = z.norm();
        if norm <= tol.rank {
            continue;
        }
        let mut z = z.unscale(norm);
        // one re-orthogonalisation pass keeps the basis orthonormal
        z -= &basis * (basis.adjoint() * &z);
        let z = z.unscale(z.norm());
        let next = basis.ncols();
        basis = basis.insert_column(next, Complex64::new(0.0, 0.0));
        let last = basis.ncols() - 1;
        basis.set_column(last, &z);
    }
    basis
}

/// `<C h, k> = <C k, h>` for a conjugation; exposed for property tests.
pub fn symmetry_defect(c: &Conjugation, h: &CVector, k: &CVector) -> Result<f64> {
    Ok((inner(&c.apply(h)?, k) - inner(&c.apply(k)?, h)).norm())
}
