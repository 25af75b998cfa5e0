//! Unitary matrix fields over discrete measures.
//!
//! Given `f = (f_1..f_n)` and `g = (g_1..g_n)` on the atoms of `mu`, find a
//! field `z -> U(z)` of unitary matrices with `U(z) f(z) = g(z)` at every
//! atom; the symmetric class further requires `U(-z) = U(z)^T`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interpolation::{construct_skew, InterpolationProblem, Mode};
use crate::linalg::{unitary_mapping, CMatrix, CVector, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureAtom {
    pub z: Complex64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<MeasureAtom>,
}

impl DiscreteMeasure {
    /// Rejects non-finite points, non-positive weights and points closer
    /// than `tol.cluster`.
    pub fn new(atoms: Vec<MeasureAtom>, tol: &Tolerances) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            if !(a.z.re.is_finite() && a.z.im.is_finite()) {
                return Err(Error::InvalidMeasure(format!("atom {i} has a non-finite point")));
            }
            if !(a.weight.is_finite() && a.weight > 0.0) {
                return Err(Error::InvalidMeasure(format!("atom {i} has weight {}", a.weight)));
            }
            for (j, b) in atoms.iter().enumerate().take(i) {
                if (a.z - b.z).norm() <= tol.cluster {
                    return Err(Error::InvalidMeasure(format!("atoms {j} and {i} coincide")));
                }
            }
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[MeasureAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Index of the atom at `-z_i`, if any.
    pub fn partner(&self, i: usize, tol: &Tolerances) -> Option<usize> {
        let target = -self.atoms[i].z;
        self.atoms
            .iter()
            .enumerate()
            .map(|(j, a)| (j, (a.z - target).norm()))
            .filter(|&(_, d)| d <= tol.cluster)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(j, _)| j)
    }

    /// Same points, every weight multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| MeasureAtom {
                    z: a.z,
                    weight: a.weight * factor,
                })
                .collect(),
        }
    }
}

/// Values of `n` functions on the atoms: row `a` holds `(f_1(z_a), .., f_n(z_a))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionTable {
    values: CMatrix,
}

impl FunctionTable {
    pub fn new(values: CMatrix) -> Result<Self> {
        if values.ncols() == 0 {
            return Err(Error::Shape("a function table needs at least one column".into()));
        }
        Ok(Self { values })
    }

    pub fn from_rows(n: usize, rows: &[Vec<Complex64>]) -> Result<Self> {
        if let Some((a, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Shape(format!("row {a} has {} entries, expected {n}", row.len())));
        }
        Self::new(CMatrix::from_fn(rows.len(), n, |a, k| rows[a][k]))
    }

    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn atoms(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &CMatrix {
        &self.values
    }

    /// `f(z_a)` as a vector in `C^n`.
    pub fn at(&self, a: usize) -> CVector {
        self.values.row(a).transpose()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UField {
    pub blocks: Vec<CMatrix>,
}

impl UField {
    pub fn identity(atoms: usize, n: usize) -> Self {
        Self {
            blocks: vec![CMatrix::identity(n, n); atoms],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldViolation {
    /// `sum |f_k(z)|^2 != sum |g_k(z)|^2`.
    Norm {
        atom: usize,
        f_norm_sq: f64,
        g_norm_sq: f64,
    },
    /// `sum f_k(z) g_k(-z) != sum f_k(-z) g_k(z)`.
    Pair {
        atom: usize,
        partner: usize,
        lhs: Complex64,
        rhs: Complex64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldOutcome {
    Solved(UField),
    Infeasible(Vec<FieldViolation>),
}

fn check_shapes(mu: &DiscreteMeasure, f: &FunctionTable, g: &FunctionTable) -> Result<()> {
    if f.atoms() != mu.len() || g.atoms() != mu.len() {
        return Err(Error::Shape(format!(
            "{} atoms but tables with {} and {} rows",
            mu.len(),
            f.atoms(),
            g.atoms()
        )));
    }
    if f.n() != g.n() {
        return Err(Error::Shape(format!("f has {} columns, g has {}", f.n(), g.n())));
    }
    Ok(())
}

/// `1 + sum |f_k(z_a)|^2`.
fn scale_at(f: &FunctionTable, a: usize) -> f64 {
    1.0 + f.at(a).norm_squared()
}

fn norm_violations(
    mu: &DiscreteMeasure,
    f: &FunctionTable,
    g: &FunctionTable,
    tol: &Tolerances,
) -> Vec<FieldViolation> {
    (0..mu.len())
        .filter_map(|atom| {
            let f_norm_sq = f.at(atom).norm_squared();
            let g_norm_sq = g.at(atom).norm_squared();
            ((f_norm_sq - g_norm_sq).abs() > tol.residual * scale_at(f, atom)).then_some(FieldViolation::Norm {
                atom,
                f_norm_sq,
                g_norm_sq,
            })
        })
        .collect()
}

/// Solvable in the unitary class iff `|f(z)| = |g(z)|` at every atom; the
/// block at each atom is the deterministic two-reflection mapping.
pub fn solve_ufield(
    mu: &DiscreteMeasure,
    f: &FunctionTable,
    g: &FunctionTable,
    tol: &Tolerances,
) -> Result<FieldOutcome> {
    check_shapes(mu, f, g)?;
    let violations = norm_violations(mu, f, g, tol);
    if !violations.is_empty() {
        return Ok(FieldOutcome::Infeasible(violations));
    }
    let blocks = (0..mu.len())
        .map(|a| unitary_mapping(&f.at(a), &g.at(a), tol.residual))
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldOutcome::Solved(UField { blocks }))
}

/// Atoms pair up as `z <-> -z` with equal weights (`0` pairs with itself).
pub fn is_symmetric_measure(mu: &DiscreteMeasure, tol: &Tolerances) -> bool {
    (0..mu.len()).all(|i| {
        mu.partner(i, tol).is_some_and(|j| {
            let (wi, wj) = (mu.atoms[i].weight, mu.atoms[j].weight);
            (wi - wj).abs() <= tol.residual * wi.max(wj)
        })
    })
}

/// Solves in the symmetric class.
///
/// On `C^(m n)` with coordinates `sqrt(w_a) h_k(z_a)`, let `M` multiply by
/// `z` and `J h(z) = conj(h(-z))`. A conjugation `C` with `C M C = -M*` and
/// `C F = J G` gives `U = J C`, which commutes with `M` (so it is
/// block-diagonal over the atoms), satisfies `J U J = U*` (so
/// `U(-z) = U(z)^T`) and maps `F` to `G`.
pub fn solve_sufield(
    mu: &DiscreteMeasure,
    f: &FunctionTable,
    g: &FunctionTable,
    tol: &Tolerances,
) -> Result<FieldOutcome> {
    check_shapes(mu, f, g)?;
    if !is_symmetric_measure(mu, tol) {
        return Err(Error::NonSymmetricMeasure);
    }
    let m = mu.len();
    let n = f.n();
    let partners: Vec<usize> = (0..m).map(|a| mu.partner(a, tol).expect("symmetric measure")).collect();
    let mut violations = norm_violations(mu, f, g, tol);
    for (atom, &partner) in partners.iter().enumerate() {
        if partner < atom {
            continue;
        }
        let lhs = f.at(atom).dot(&g.at(partner));
        let rhs = f.at(partner).dot(&g.at(atom));
        let scale = scale_at(f, atom).max(scale_at(f, partner));
        if (lhs - rhs).norm() > tol.residual * scale {
            violations.push(FieldViolation::Pair {
                atom,
                partner,
                lhs,
                rhs,
            });
        }
    }
    if !violations.is_empty() {
        return Ok(FieldOutcome::Infeasible(violations));
    }

    let dim = m * n;
    let sqrt_w: Vec<f64> = mu.atoms.iter().map(|a| a.weight.sqrt()).collect();
    let big_f = CVector::from_fn(dim, |i, _| f.values[(i / n, i % n)] * sqrt_w[i / n]);
    if big_f.norm() <= tol.rank {
        return Ok(FieldOutcome::Solved(UField::identity(m, n)));
    }
    let jg = CVector::from_fn(dim, |i, _| (g.values[(partners[i / n], i % n)] * sqrt_w[i / n]).conj());
    let mult = CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            mu.atoms[i / n].z
        } else {
            Complex64::default()
        }
    });

    let p = InterpolationProblem::new(dim, vec![mult], vec![big_f], vec![jg], Mode::Skew, *tol)?;
    let cert = construct_skew(&p)?;
    let Some(c) = cert.conjugation else {
        return Err(Error::Construction {
            name: "sufield.interpolation".into(),
            residual: f64::INFINITY,
        });
    };
    // U = J C = P conj(S), with P the permutation (a, k) <-> (partner(a), k)
    let s = c.matrix();
    let u = CMatrix::from_fn(dim, dim, |i, j| {
        let row = partners[i / n] * n + i % n;
        s[(row, j)].conj()
    });
    let blocks: Vec<CMatrix> = (0..m).map(|a| u.view((a * n, a * n), (n, n)).into_owned()).collect();
    let off_block: f64 = u
        .iter()
        .enumerate()
        .filter(|(idx, _)| (idx % dim) / n != (idx / dim) / n)
        .map(|(_, z)| z.norm_sqr())
        .sum();
    let residual = off_block.sqrt();
    if residual > tol.residual * dim as f64 {
        return Err(Error::BlockExtraction { residual });
    }
    let field = UField { blocks };
    let report = verify_ufield(mu, f, g, &field, true, tol)?;
    if !report.passed {
        return Err(Error::Construction {
            name: "sufield.verify".into(),
            residual: report.equation.max(report.unitarity).max(report.parity.unwrap_or(0.0)),
        });
    }
    Ok(FieldOutcome::Solved(field))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldReport {
    /// `max_a |U(z_a) f(z_a) - g(z_a)| / (1 + |f(z_a)|^2)`
    pub equation: f64,
    /// `max_a |U(z_a) U(z_a)* - I|`
    pub unitarity: f64,
    /// `max_a |U(-z_a) - U(z_a)^T|`; infinite when an atom has no partner.
    pub parity: Option<f64>,
    pub passed: bool,
}

pub fn verify_ufield(
    mu: &DiscreteMeasure,
    f: &FunctionTable,
    g: &FunctionTable,
    field: &UField,
    symmetric: bool,
    tol: &Tolerances,
) -> Result<FieldReport> {
    check_shapes(mu, f, g)?;
    let n = f.n();
    if field.blocks.len() != mu.len() || field.blocks.iter().any(|b| b.shape() != (n, n)) {
        return Err(Error::Shape(format!(
            "field must hold {} blocks of size {n}x{n}",
            mu.len()
        )));
    }
    let mut equation = 0.0_f64;
    let mut unitarity = 0.0_f64;
    for (a, u) in field.blocks.iter().enumerate() {
        equation = equation.max((u * f.at(a) - g.at(a)).norm() / scale_at(f, a));
        unitarity = unitarity.max((u * u.adjoint() - CMatrix::identity(n, n)).norm());
    }
    let parity = symmetric.then(|| {
        (0..mu.len())
            .map(|a| match mu.partner(a, tol) {
                Some(p) => (&field.blocks[p] - field.blocks[a].transpose()).norm(),
                None => f64::INFINITY,
            })
            .fold(0.0_f64, f64::max)
    });
    let passed = equation <= tol.residual && unitarity <= tol.residual && parity.is_none_or(|p| p <= tol.residual);
    Ok(FieldReport {
        equation,
        unitarity,
        parity,
        passed,
    })
}
