//! Problem and certificate files.
//!
//! Both are JSON. Complex scalars are `[re, im]`, matrices are row-major
//! nested arrays and vectors are arrays of scalars. The input digest is the
//! SHA-256 of the problem re-serialised compactly with sorted keys, so it
//! does not depend on whitespace or key order.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::interpolation::{InterpolationProblem, Mode};
use crate::linalg::{CMatrix, CVector, Tolerances};
use crate::mu_field::{DiscreteMeasure, FunctionTable, MeasureAtom};

pub const SCHEMA_VERSION: &str = "1";
pub const TOOL_VERSION: &str = concat!("conjint ", env!("CARGO_PKG_VERSION"));

pub type Scalar = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileMode {
    Symmetric,
    Skew,
    Hyperinvariant,
    Ufield,
    Sufield,
}

impl FileMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FileMode::Symmetric => "symmetric",
            FileMode::Skew => "skew",
            FileMode::Hyperinvariant => "hyperinvariant",
            FileMode::Ufield => "ufield",
            FileMode::Sufield => "sufield",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureEntry {
    pub z: Scalar,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: String,
    pub mode: FileMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operators: Option<BTreeMap<String, Vec<Vec<Scalar>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xs: Option<Vec<Vec<Scalar>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ys: Option<Vec<Vec<Scalar>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace: Option<Vec<Vec<Scalar>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Vec<MeasureEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Vec<Scalar>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<Vec<Scalar>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<ToleranceOverrides>,
}

/// The file could not be read as a problem of its declared mode.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("parse error: {0}")]
pub struct ParseError(pub String);

impl ProblemFile {
    /// Parses and checks that exactly the fields of the declared mode are
    /// present.
    pub fn parse(bytes: &[u8]) -> Result<Self, ParseError> {
        let file: ProblemFile = serde_json::from_slice(bytes).map_err(|e| ParseError(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(ParseError(format!(
                "unsupported schema_version {:?} (expected {SCHEMA_VERSION:?})",
                file.schema_version
            )));
        }
        file.check_fields()?;
        if let Some(t) = &file.tolerance {
            for v in [t.residual, t.cluster, t.rank].into_iter().flatten() {
                if !v.is_finite() {
                    return Err(ParseError("tolerances must be finite".into()));
                }
            }
        }
        Ok(file)
    }

    fn check_fields(&self) -> Result<(), ParseError> {
        let present = [
            ("dimension", self.dimension.is_some()),
            ("operators", self.operators.is_some()),
            ("xs", self.xs.is_some()),
            ("ys", self.ys.is_some()),
            ("subspace", self.subspace.is_some()),
            ("measure", self.measure.is_some()),
            ("n", self.n.is_some()),
            ("f", self.f.is_some()),
            ("g", self.g.is_some()),
        ];
        let required: &[&str] = match self.mode {
            FileMode::Symmetric | FileMode::Skew => &["dimension", "operators", "xs", "ys"],
            FileMode::Hyperinvariant => &["dimension", "operators", "subspace"],
            FileMode::Ufield | FileMode::Sufield => &["measure", "n", "f", "g"],
        };
        for (name, is_present) in present {
            let wanted = required.contains(&name);
            if wanted && !is_present {
                return Err(ParseError(format!(
                    "mode {} requires field {name:?}",
                    self.mode.as_str()
                )));
            }
            if !wanted && is_present {
                return Err(ParseError(format!(
                    "field {name:?} is not allowed in mode {}",
                    self.mode.as_str()
                )));
            }
        }
        Ok(())
    }

    /// Defaults, then the file's overrides, then `cli`.
    pub fn tolerances(&self, cli: &ToleranceOverrides) -> Result<Tolerances, Error> {
        let mut tol = Tolerances::default();
        for layer in [self.tolerance.as_ref(), Some(cli)].into_iter().flatten() {
            tol.residual = layer.residual.unwrap_or(tol.residual);
            tol.cluster = layer.cluster.unwrap_or(tol.cluster);
            tol.rank = layer.rank.unwrap_or(tol.rank);
        }
        tol.validate()?;
        Ok(tol)
    }

    /// Operator names in file order (sorted).
    pub fn operator_names(&self) -> Vec<String> {
        self.operators
            .as_ref()
            .map(|ops| ops.keys().cloned().collect())
            .unwrap_or_default()
    }

    pub fn operator_matrices(&self) -> Result<Vec<CMatrix>, Error> {
        let dim = self.dimension.unwrap_or(0);
        self.operators
            .iter()
            .flatten()
            .map(|(name, rows)| matrix_from_rows(name, rows, dim))
            .collect()
    }

    pub fn interpolation_problem(&self, tol: Tolerances) -> Result<InterpolationProblem, Error> {
        let mode = match self.mode {
            FileMode::Symmetric => Mode::Symmetric,
            FileMode::Skew => Mode::Skew,
            other => {
                return Err(Error::Shape(format!(
                    "mode {} is not an interpolation mode",
                    other.as_str()
                )))
            }
        };
        let dim = self.dimension.unwrap_or(0);
        let xs = vectors_from_rows("xs", self.xs.as_deref().unwrap_or_default(), dim)?;
        let ys = vectors_from_rows("ys", self.ys.as_deref().unwrap_or_default(), dim)?;
        InterpolationProblem::new(dim, self.operator_matrices()?, xs, ys, mode, tol)
    }

    /// `(N, basis of M)` for hyperinvariant mode.
    pub fn hyperinvariant_problem(&self) -> Result<(CMatrix, Vec<CVector>), Error> {
        let ops = self.operator_matrices()?;
        if ops.len() != 1 {
            return Err(Error::Shape(format!(
                "hyperinvariant mode takes one operator, found {}",
                ops.len()
            )));
        }
        let dim = self.dimension.unwrap_or(0);
        let basis = vectors_from_rows("subspace", self.subspace.as_deref().unwrap_or_default(), dim)?;
        Ok((ops.into_iter().next().expect("one operator"), basis))
    }

    pub fn field_problem(&self, tol: &Tolerances) -> Result<(DiscreteMeasure, FunctionTable, FunctionTable), Error> {
        let atoms = self
            .measure
            .iter()
            .flatten()
            .map(|m| MeasureAtom {
                z: scalar(m.z),
                weight: m.weight,
            })
            .collect();
        let mu = DiscreteMeasure::new(atoms, tol)?;
        let n = self.n.unwrap_or(0);
        let table = |name: &str, rows: &[Vec<Scalar>]| -> Result<FunctionTable, Error> {
            if rows.len() != mu.len() {
                return Err(Error::Shape(format!(
                    "{name} has {} rows for {} atoms",
                    rows.len(),
                    mu.len()
                )));
            }
            let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().copied().map(scalar).collect()).collect();
            FunctionTable::from_rows(n, &rows)
        };
        let f = table("f", self.f.as_deref().unwrap_or_default())?;
        let g = table("g", self.g.as_deref().unwrap_or_default())?;
        Ok((mu, f, g))
    }
}

pub fn scalar(s: Scalar) -> Complex64 {
    Complex64::new(s[0], s[1])
}

pub fn encode_scalar(z: Complex64) -> Scalar {
    [z.re, z.im]
}

pub fn encode_matrix(m: &CMatrix) -> Vec<Vec<Scalar>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| encode_scalar(m[(i, j)])).collect())
        .collect()
}

pub fn encode_vector(v: &CVector) -> Vec<Scalar> {
    v.iter().copied().map(encode_scalar).collect()
}

pub fn matrix_from_rows(name: &str, rows: &[Vec<Scalar>], dim: usize) -> Result<CMatrix, Error> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Shape(format!("operator {name:?} must be {dim}x{dim}")));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| scalar(rows[i][j])))
}

/// Square matrix of any size (certificate payloads).
pub fn square_from_rows(rows: &[Vec<Scalar>]) -> Result<CMatrix, Error> {
    let dim = rows.len();
    matrix_from_rows("payload", rows, dim)
}

pub fn vectors_from_rows(name: &str, rows: &[Vec<Scalar>], dim: usize) -> Result<Vec<CVector>, Error> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            if r.len() != dim {
                return Err(Error::Shape(format!(
                    "{name}[{i}] has length {}, expected {dim}",
                    r.len()
                )));
            }
            Ok(CVector::from_iterator(dim, r.iter().copied().map(scalar)))
        })
        .collect()
}

/// SHA-256 (hex) of the compact, key-sorted re-serialisation of `bytes`.
pub fn input_digest(bytes: &[u8]) -> Result<String, ParseError> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| ParseError(e.to_string()))?;
    let canonical = serde_json::to_vec(&value).map_err(|e| ParseError(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(&canonical)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub schema_version: String,
    pub tool_version: String,
    pub mode: FileMode,
    pub input_digest: String,
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugation_s: Option<Vec<Vec<Scalar>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_blocks: Option<Vec<Vec<Vec<Scalar>>>>,
    pub residuals: BTreeMap<String, f64>,
    pub violations: Vec<serde_json::Value>,
}

impl CertificateFile {
    pub fn parse(bytes: &[u8]) -> Result<Self, ParseError> {
        let cert: CertificateFile = serde_json::from_slice(bytes).map_err(|e| ParseError(e.to_string()))?;
        if cert.schema_version != SCHEMA_VERSION {
            return Err(ParseError(format!(
                "unsupported schema_version {:?}",
                cert.schema_version
            )));
        }
        Ok(cert)
    }

    /// Pretty JSON with a trailing newline. Non-finite residuals are written
    /// as `null` by the serialiser, so they are clamped to `f64::MAX` first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut cert = self.clone();
        for r in cert.residuals.values_mut() {
            if !r.is_finite() {
                *r = f64::MAX;
            }
        }
        let mut out = serde_json::to_vec_pretty(&cert).expect("certificate serialises");
        out.push(b'\n');
        out
    }
}
