//! Command implementations behind the `conjint` binary.
//!
//! Each command takes the raw input bytes and returns an exit code, a
//! human-readable report and (where applicable) certificate bytes; file IO
//! stays in the binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::antilinear::{relation_residuals, Conjugation};
use crate::error::Error;
use crate::format::{
    encode_matrix, input_digest, square_from_rows, CertificateFile, FileMode, ProblemFile, ToleranceOverrides,
    SCHEMA_VERSION, TOOL_VERSION,
};
use crate::interpolation::{
    certificate_residuals, construct, feasibility, hyperinvariance_falsifier, is_hyperinvariant, Feasibility,
};
use crate::linalg::{commutator_norm, inner, CMatrix, CVector, Tolerances};
use crate::mu_field::{
    is_symmetric_measure, solve_sufield, solve_ufield, verify_ufield, DiscreteMeasure, FieldOutcome, FunctionTable,
    UField,
};
use crate::spectral::check_normal;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;
pub const EXIT_DIGEST: u8 = 4;

/// Trials used by the hyperinvariance falsifier.
pub const FALSIFIER_TRIALS: usize = 50;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub tolerance: ToleranceOverrides,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub report: String,
    pub certificate: Option<Vec<u8>>,
}

impl Outcome {
    fn plain(code: u8, report: impl Into<String>) -> Self {
        Self {
            code,
            report: report.into(),
            certificate: None,
        }
    }
}

struct Loaded {
    file: ProblemFile,
    digest: String,
    tol: Tolerances,
}

fn load(bytes: &[u8], opts: &RunOptions) -> Result<Loaded, Outcome> {
    let file = ProblemFile::parse(bytes).map_err(|e| Outcome::plain(EXIT_PARSE, format!("{e}\n")))?;
    let digest = input_digest(bytes).map_err(|e| Outcome::plain(EXIT_PARSE, format!("{e}\n")))?;
    let tol = file.tolerances(&opts.tolerance).map_err(invariant)?;
    Ok(Loaded { file, digest, tol })
}

fn invariant(e: Error) -> Outcome {
    Outcome::plain(EXIT_INVARIANT, format!("invariant violation: {e}\n"))
}

/// Structural preconditions of the problem, one line per violation.
pub fn cmd_check(bytes: &[u8], opts: &RunOptions) -> Outcome {
    let loaded = match load(bytes, opts) {
        Ok(l) => l,
        Err(o) => return o,
    };
    let issues = structural_issues(&loaded.file, &loaded.tol);
    if issues.is_empty() {
        Outcome::plain(
            EXIT_OK,
            format!(
                "ok: {} problem satisfies all preconditions\n",
                loaded.file.mode.as_str()
            ),
        )
    } else {
        let mut report = String::new();
        for issue in &issues {
            let _ = writeln!(report, "violation: {issue}");
        }
        Outcome::plain(EXIT_INVARIANT, report)
    }
}

fn structural_issues(file: &ProblemFile, tol: &Tolerances) -> Vec<String> {
    let mut issues = Vec::new();
    match file.mode {
        FileMode::Symmetric | FileMode::Skew | FileMode::Hyperinvariant => {
            let dim = file.dimension.unwrap_or(0);
            let mut ops: Vec<(String, CMatrix)> = Vec::new();
            for (name, rows) in file.operators.iter().flatten() {
                match crate::format::matrix_from_rows(name, rows, dim) {
                    Ok(m) => ops.push((name.clone(), m)),
                    Err(e) => issues.push(e.to_string()),
                }
            }
            for (name, m) in &ops {
                let residual = check_normal(m).unwrap_or(f64::INFINITY);
                if residual > tol.residual {
                    issues.push(format!("operator {name:?} is not normal (residual {residual:.3e})"));
                }
            }
            for (i, (a, ma)) in ops.iter().enumerate() {
                for (b, mb) in ops.iter().skip(i + 1) {
                    let residual = commutator_norm(ma, mb);
                    if residual > tol.residual {
                        issues.push(format!(
                            "operators {a:?} and {b:?} do not commute (residual {residual:.3e})"
                        ));
                    }
                }
            }
            let expected_ops = match file.mode {
                FileMode::Skew | FileMode::Hyperinvariant => Some(1),
                _ => None,
            };
            if let Some(k) = expected_ops {
                if file.operators.as_ref().map_or(0, |o| o.len()) != k {
                    issues.push(format!("mode {} requires exactly one operator", file.mode.as_str()));
                }
            }
            let sets: Vec<(&'static str, &[Vec<[f64; 2]>])> = match file.mode {
                FileMode::Hyperinvariant => vec![("subspace", file.subspace.as_deref().unwrap_or_default())],
                _ => vec![
                    ("xs", file.xs.as_deref().unwrap_or_default()),
                    ("ys", file.ys.as_deref().unwrap_or_default()),
                ],
            };
            for (name, rows) in &sets {
                match crate::format::vectors_from_rows(name, rows, dim) {
                    Ok(vs) if *name != "subspace" => issues.extend(vector_set_issues(name, &vs, tol)),
                    Ok(_) => {}
                    Err(e) => issues.push(e.to_string()),
                }
            }
            if file.mode != FileMode::Hyperinvariant {
                let (nx, ny) = (sets[0].1.len(), sets[1].1.len());
                if nx != ny {
                    issues.push(format!("xs has {nx} vectors but ys has {ny}"));
                }
            }
        }
        FileMode::Ufield | FileMode::Sufield => match file.field_problem(tol) {
            Ok((mu, _, _)) => {
                if file.mode == FileMode::Sufield && !is_symmetric_measure(&mu, tol) {
                    issues.push(Error::NonSymmetricMeasure.to_string());
                }
            }
            Err(e) => issues.push(e.to_string()),
        },
    }
    issues
}

fn vector_set_issues(name: &str, vs: &[CVector], tol: &Tolerances) -> Vec<String> {
    let mut issues = Vec::new();
    let unit: Vec<Option<CVector>> = vs
        .iter()
        .map(|v| (v.norm() > tol.rank).then(|| v.unscale(v.norm())))
        .collect();
    for (i, u) in unit.iter().enumerate() {
        match u {
            None => issues.push(format!("{name}[{i}] is zero")),
            Some(u) => {
                for (j, w) in unit.iter().enumerate().skip(i + 1) {
                    if let Some(w) = w {
                        let residual = inner(u, w).norm();
                        if residual > tol.residual {
                            issues.push(format!(
                                "{name}[{i}] and {name}[{j}] are not orthogonal (|<.,.>| = {residual:.3e})"
                            ));
                        }
                    }
                }
            }
        }
    }
    issues
}

fn certificate(loaded: &Loaded, feasible: bool) -> CertificateFile {
    CertificateFile {
        schema_version: SCHEMA_VERSION.to_string(),
        tool_version: TOOL_VERSION.to_string(),
        mode: loaded.file.mode,
        input_digest: loaded.digest.clone(),
        feasible,
        conjugation_s: None,
        field_blocks: None,
        residuals: BTreeMap::new(),
        violations: Vec::new(),
    }
}

fn write_residuals(report: &mut String, residuals: &BTreeMap<String, f64>) {
    for (name, r) in residuals {
        let _ = writeln!(report, "  {name} = {r:.3e}");
    }
}

fn to_values<T: serde::Serialize>(items: &[T]) -> Vec<serde_json::Value> {
    items
        .iter()
        .map(|v| serde_json::to_value(v).expect("violations serialise"))
        .collect()
}

/// Decides a symmetric or skew problem and emits its certificate.
pub fn cmd_interpolate(bytes: &[u8], opts: &RunOptions) -> Outcome {
    let loaded = match load(bytes, opts) {
        Ok(l) => l,
        Err(o) => return o,
    };
    if !matches!(loaded.file.mode, FileMode::Symmetric | FileMode::Skew) {
        return Outcome::plain(EXIT_INVARIANT, "interpolate expects mode symmetric or skew\n");
    }
    let problem = match loaded.file.interpolation_problem(loaded.tol) {
        Ok(p) => p,
        Err(e) => return invariant(e),
    };
    let cert = match construct(&problem) {
        Ok(c) => c,
        Err(e) => return invariant(e),
    };
    let mut file = certificate(&loaded, cert.feasible);
    let mut report = format!("mode: {}\nfeasible: {}\n", loaded.file.mode.as_str(), cert.feasible);
    if let Some(c) = &cert.conjugation {
        let names = loaded.file.operator_names();
        file.residuals = certificate_residuals(&problem, c.matrix(), &names).expect("shapes checked");
        file.conjugation_s = Some(encode_matrix(c.matrix()));
        report.push_str("residuals:\n");
        write_residuals(&mut report, &file.residuals);
    } else {
        file.violations = to_values(&cert.violations);
        let _ = writeln!(report, "violations: {}", cert.violations.len());
        for v in cert.violations.iter().take(10) {
            let _ = writeln!(report, "  {}", serde_json::to_string(v).expect("serialises"));
        }
    }
    Outcome {
        code: if cert.feasible { EXIT_OK } else { EXIT_NEGATIVE },
        report,
        certificate: Some(file.to_bytes()),
    }
}

fn field_inputs(loaded: &Loaded) -> Result<(DiscreteMeasure, FunctionTable, FunctionTable), Outcome> {
    loaded.file.field_problem(&loaded.tol).map_err(invariant)
}

fn solve_field(
    loaded: &Loaded,
    mu: &DiscreteMeasure,
    f: &FunctionTable,
    g: &FunctionTable,
) -> Result<FieldOutcome, Error> {
    match loaded.file.mode {
        FileMode::Sufield => solve_sufield(mu, f, g, &loaded.tol),
        _ => solve_ufield(mu, f, g, &loaded.tol),
    }
}

/// Solves a `ufield` or `sufield` problem and emits the per-atom blocks.
pub fn cmd_field(bytes: &[u8], opts: &RunOptions) -> Outcome {
    let loaded = match load(bytes, opts) {
        Ok(l) => l,
        Err(o) => return o,
    };
    if !matches!(loaded.file.mode, FileMode::Ufield | FileMode::Sufield) {
        return Outcome::plain(EXIT_INVARIANT, "field expects mode ufield or sufield\n");
    }
    let (mu, f, g) = match field_inputs(&loaded) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let symmetric = loaded.file.mode == FileMode::Sufield;
    let outcome = match solve_field(&loaded, &mu, &f, &g) {
        Ok(o) => o,
        Err(e) => return invariant(e),
    };
    let mut report = format!("mode: {}\n", loaded.file.mode.as_str());
    match outcome {
        FieldOutcome::Solved(field) => {
            let mut file = certificate(&loaded, true);
            let check = verify_ufield(&mu, &f, &g, &field, symmetric, &loaded.tol).expect("shapes checked");
            file.residuals = field_residuals(&check);
            file.field_blocks = Some(field.blocks.iter().map(encode_matrix).collect());
            report.push_str("feasible: true\nresiduals:\n");
            write_residuals(&mut report, &file.residuals);
            Outcome {
                code: EXIT_OK,
                report,
                certificate: Some(file.to_bytes()),
            }
        }
        FieldOutcome::Infeasible(violations) => {
            let mut file = certificate(&loaded, false);
            file.violations = to_values(&violations);
            let _ = writeln!(report, "feasible: false\nviolations: {}", violations.len());
            for v in violations.iter().take(10) {
                let _ = writeln!(report, "  {}", serde_json::to_string(v).expect("serialises"));
            }
            Outcome {
                code: EXIT_NEGATIVE,
                report,
                certificate: Some(file.to_bytes()),
            }
        }
    }
}

fn field_residuals(check: &crate::mu_field::FieldReport) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    out.insert("field.equation".to_string(), check.equation);
    out.insert("field.unitarity".to_string(), check.unitarity);
    if let Some(p) = check.parity {
        out.insert("field.parity".to_string(), p);
    }
    out
}

/// Decides hyperinvariance; on `false`, searches for a falsifying
/// conjugation.
pub fn cmd_hyperinvariant(bytes: &[u8], opts: &RunOptions) -> Outcome {
    let loaded = match load(bytes, opts) {
        Ok(l) => l,
        Err(o) => return o,
    };
    if loaded.file.mode != FileMode::Hyperinvariant {
        return Outcome::plain(EXIT_INVARIANT, "hyperinvariant expects mode hyperinvariant\n");
    }
    let (n, basis) = match loaded.file.hyperinvariant_problem() {
        Ok(t) => t,
        Err(e) => return invariant(e),
    };
    let verdict = match is_hyperinvariant(&n, &basis, &loaded.tol) {
        Ok(v) => v,
        Err(e) => return invariant(e),
    };
    let mut file = certificate(&loaded, verdict);
    let mut report = format!("hyperinvariant: {verdict}\n");
    if !verdict {
        match hyperinvariance_falsifier(&n, &basis, FALSIFIER_TRIALS, opts.seed, &loaded.tol) {
            Ok(Some(c)) => {
                file.residuals = falsifier_residuals(&n, &basis, &c, &loaded.tol);
                file.conjugation_s = Some(encode_matrix(c.matrix()));
                report.push_str("falsifying conjugation found:\n");
                write_residuals(&mut report, &file.residuals);
            }
            Ok(None) => report.push_str("no falsifying conjugation found\n"),
            Err(e) => return invariant(e),
        }
    }
    Outcome {
        code: if verdict { EXIT_OK } else { EXIT_NEGATIVE },
        report,
        certificate: Some(file.to_bytes()),
    }
}

/// `falsifier.relation`: `|C N C - N*| / max(1, |N|)`; `falsifier.escape`:
/// `|(I - P_M) C Q_M|` for an orthonormal basis `Q_M`.
fn falsifier_residuals(n: &CMatrix, basis: &[CVector], c: &Conjugation, tol: &Tolerances) -> BTreeMap<String, f64> {
    let dim = n.nrows();
    let q = crate::linalg::orthonormalize_columns(&crate::linalg::columns(basis, dim).expect("shapes checked"), tol);
    let leak = CMatrix::identity(dim, dim) - &q * q.adjoint();
    let mut out = BTreeMap::new();
    let relation = relation_residuals(c, n).map_or(f64::INFINITY, |r| r.sym);
    out.insert("falsifier.relation".to_string(), relation / n.norm().max(1.0));
    out.insert(
        "falsifier.escape".to_string(),
        (&leak * c.matrix() * q.conjugate()).norm(),
    );
    out
}

/// Re-checks a certificate against its problem using only the problem and
/// the certificate payload.
pub fn cmd_verify(problem: &[u8], certificate_bytes: &[u8], opts: &RunOptions) -> Outcome {
    let loaded = match load(problem, opts) {
        Ok(l) => l,
        Err(o) => return o,
    };
    let cert = match CertificateFile::parse(certificate_bytes) {
        Ok(c) => c,
        Err(e) => return Outcome::plain(EXIT_PARSE, format!("certificate {e}\n")),
    };
    if cert.input_digest != loaded.digest {
        return Outcome::plain(
            EXIT_DIGEST,
            format!(
                "digest mismatch: certificate {} vs problem {}\n",
                cert.input_digest, loaded.digest
            ),
        );
    }
    if cert.mode != loaded.file.mode {
        return Outcome::plain(EXIT_NEGATIVE, "certificate mode does not match the problem\n");
    }
    let result = match loaded.file.mode {
        FileMode::Symmetric | FileMode::Skew => verify_interpolation(&loaded, &cert),
        FileMode::Ufield | FileMode::Sufield => verify_field(&loaded, &cert),
        FileMode::Hyperinvariant => verify_hyperinvariant(&loaded, &cert, opts),
    };
    match result {
        Ok((passed, mut report)) => {
            report.push_str(if passed {
                "verification: pass\n"
            } else {
                "verification: fail\n"
            });
            Outcome::plain(if passed { EXIT_OK } else { EXIT_NEGATIVE }, report)
        }
        Err(o) => o,
    }
}

fn residuals_pass(report: &mut String, residuals: &BTreeMap<String, f64>, tol: &Tolerances) -> bool {
    report.push_str("recomputed residuals:\n");
    write_residuals(report, residuals);
    residuals.values().all(|&r| r <= tol.residual)
}

fn verify_interpolation(loaded: &Loaded, cert: &CertificateFile) -> Result<(bool, String), Outcome> {
    let problem = loaded.file.interpolation_problem(loaded.tol).map_err(invariant)?;
    let mut report = String::new();
    if cert.feasible {
        let Some(rows) = &cert.conjugation_s else {
            return Ok((false, "feasible certificate carries no conjugation\n".into()));
        };
        let s = match square_from_rows(rows) {
            Ok(s) if s.nrows() == problem.dim => s,
            _ => return Ok((false, "conjugation has the wrong shape\n".into())),
        };
        let residuals = certificate_residuals(&problem, &s, &loaded.file.operator_names()).map_err(invariant)?;
        let passed = residuals_pass(&mut report, &residuals, &loaded.tol);
        Ok((passed, report))
    } else {
        let verdict = feasibility(&problem).map_err(invariant)?;
        let confirmed = !cert.violations.is_empty() && cert.conjugation_s.is_none() && !verdict.is_feasible();
        let _ = writeln!(
            report,
            "claimed infeasible; recomputed: {}",
            if verdict.is_feasible() {
                "feasible"
            } else {
                "infeasible"
            }
        );
        if let Feasibility::Infeasible(v) = &verdict {
            let _ = writeln!(report, "recomputed violations: {}", v.len());
        }
        Ok((confirmed, report))
    }
}

fn verify_field(loaded: &Loaded, cert: &CertificateFile) -> Result<(bool, String), Outcome> {
    let (mu, f, g) = field_inputs(loaded)?;
    let symmetric = loaded.file.mode == FileMode::Sufield;
    let mut report = String::new();
    if cert.feasible {
        let Some(blocks) = &cert.field_blocks else {
            return Ok((false, "feasible certificate carries no field\n".into()));
        };
        let blocks: Result<Vec<CMatrix>, Error> = blocks.iter().map(|b| square_from_rows(b)).collect();
        let Ok(blocks) = blocks else {
            return Ok((false, "field blocks have the wrong shape\n".into()));
        };
        let field = UField { blocks };
        let check = match verify_ufield(&mu, &f, &g, &field, symmetric, &loaded.tol) {
            Ok(c) => c,
            Err(e) => return Ok((false, format!("field does not fit the problem: {e}\n"))),
        };
        let passed = residuals_pass(&mut report, &field_residuals(&check), &loaded.tol);
        Ok((passed && check.passed, report))
    } else {
        if symmetric && !is_symmetric_measure(&mu, &loaded.tol) {
            return Err(invariant(Error::NonSymmetricMeasure));
        }
        let outcome = solve_field(loaded, &mu, &f, &g).map_err(invariant)?;
        let infeasible = matches!(outcome, FieldOutcome::Infeasible(_));
        let _ = writeln!(
            report,
            "claimed infeasible; recomputed: {}",
            if infeasible { "infeasible" } else { "feasible" }
        );
        Ok((
            infeasible && !cert.violations.is_empty() && cert.field_blocks.is_none(),
            report,
        ))
    }
}

fn verify_hyperinvariant(
    loaded: &Loaded,
    cert: &CertificateFile,
    _opts: &RunOptions,
) -> Result<(bool, String), Outcome> {
    let (n, basis) = loaded.file.hyperinvariant_problem().map_err(invariant)?;
    let verdict = is_hyperinvariant(&n, &basis, &loaded.tol).map_err(invariant)?;
    let mut report = format!("recomputed hyperinvariant: {verdict}\n");
    let mut passed = verdict == cert.feasible;
    if !cert.feasible {
        if let Some(rows) = &cert.conjugation_s {
            let c = square_from_rows(rows)
                .ok()
                .filter(|s| s.nrows() == n.nrows())
                .and_then(|s| Conjugation::new(s, &loaded.tol).ok());
            match c {
                Some(c) => {
                    let residuals = falsifier_residuals(&n, &basis, &c, &loaded.tol);
                    write_residuals(&mut report, &residuals);
                    let bound = n.nrows() as f64 * loaded.tol.residual;
                    passed &=
                        residuals["falsifier.relation"] <= loaded.tol.residual && residuals["falsifier.escape"] > bound;
                }
                None => {
                    report.push_str("falsifier payload is not a conjugation\n");
                    passed = false;
                }
            }
        }
    } else if cert.conjugation_s.is_some() {
        passed = false;
    }
    Ok((passed, report))
}
