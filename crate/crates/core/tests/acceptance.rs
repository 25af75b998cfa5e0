//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Oracles here are computed from the generating frames and spectra, never
//! from the library's own decompositions.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use conjint::antilinear::{relation_residuals, zhu_li_interpolate, Conjugation, ZhuLiOutcome};
use conjint::commands::{cmd_field, cmd_hyperinvariant, cmd_interpolate, cmd_verify, Outcome, RunOptions};
use conjint::generate::{
    lattice_point, planted_skew_conjugation, planted_symmetric_conjugation, random_complex, random_family,
    random_normal, random_orthogonal_set, random_symmetric_unitary, random_unitary, random_vector, PlantedFamily,
};
use conjint::interpolation::{
    construct, feasibility_symmetric, hyperinvariance_falsifier, is_hyperinvariant, perturbation_suite,
    InterpolationProblem,
};
use conjint::linalg::{diagonal, inner};
use conjint::mu_field::{solve_sufield, solve_ufield, verify_ufield, MeasureAtom};
use conjint::spectral::{decompose, is_skew_symmetric_normal, AtomicSpectrum, BorelSelector, SkewDecision};
use conjint::{CMatrix, CVector, Complex64, DiscreteMeasure, FieldOutcome, FunctionTable, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL_AXIOM: f64 = 1e-9;
const TOL_GRAM: f64 = 1e-8;
const TOL_CERT: f64 = 1e-8;
const TOL_SKEW_WITNESS: f64 = 1e-9;
const TOL_INTERTWINE: f64 = 1e-8;
const TOL_FIELD: f64 = 1e-8;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Antilinear `h -> S conj(h)` applied to a vector.
fn apply(s: &CMatrix, h: &CVector) -> CVector {
    s * h.conjugate()
}

/// `C T C` with the symmetric `S`: `S conj(T) conj(S)`.
fn sandwich(s: &CMatrix, t: &CMatrix) -> CMatrix {
    s * t.conjugate() * s.conjugate()
}

fn criterion_1() -> Verdict {
    let mut r = rng(1);
    let tol = Tolerances::default();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for trial in 0..1000 {
        let dim = r.random_range(1..=16);
        // half raw symmetric unitaries, half Zhu-Li completions
        let s = if trial % 2 == 0 {
            random_symmetric_unitary(&mut r, dim)
        } else {
            let k = r.random_range(1..=dim.min(5));
            let planted = random_symmetric_unitary(&mut r, dim);
            let xs = random_orthogonal_set(&mut r, dim, k);
            let ys: Vec<CVector> = xs.iter().map(|x| apply(&planted, x)).collect();
            match zhu_li_interpolate(&xs, &ys, &tol) {
                Ok(ZhuLiOutcome::Feasible(c)) => c.into_matrix(),
                _ => {
                    failures += 1;
                    continue;
                }
            }
        };
        let Ok(conj) = Conjugation::new(s.clone(), &tol) else {
            failures += 1;
            continue;
        };
        let s = conj.matrix();
        let sym = (s - s.transpose()).norm();
        let unit = (s * s.adjoint() - CMatrix::identity(dim, dim)).norm();
        let h = random_vector(&mut r, dim);
        let k = random_vector(&mut r, dim);
        let ch = conj.apply(&h).unwrap();
        let ck = conj.apply(&k).unwrap();
        let involution = (conj.apply(&ch).unwrap() - &h).norm() / h.norm();
        let antiunitary = (inner(&ch, &ck) - inner(&k, &h)).norm() / (h.norm() * k.norm());
        let m = sym.max(unit).max(involution).max(antiunitary);
        worst = worst.max(m);
        if m > TOL_AXIOM {
            failures += 1;
        }
    }
    verdict(
        failures == 0,
        format!("1000 conjugations, {failures} failures, worst residual {worst:.2e}"),
    )
}

fn gram_oracle(xs: &[CVector], ys: &[CVector]) -> bool {
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            let scale = xs[i].norm() * xs[j].norm();
            if (inner(&xs[i], &ys[j]) - inner(&xs[j], &ys[i])).norm() > TOL_GRAM * scale {
                return false;
            }
        }
    }
    true
}

fn criterion_2() -> Verdict {
    let mut r = rng(2);
    let tol = Tolerances::new(TOL_GRAM, 1e-7, 1e-9).unwrap();
    let (mut disagreements, mut unverified, mut feasible_count) = (0, 0, 0);
    for trial in 0..500 {
        let dim = r.random_range(1..=16);
        let k = r.random_range(1..=dim.min(5));
        let xs = random_orthogonal_set(&mut r, dim, k);
        let ys: Vec<CVector> = if trial % 2 == 0 {
            let s = random_symmetric_unitary(&mut r, dim);
            xs.iter().map(|x| apply(&s, x)).collect()
        } else {
            // orthogonal ys with matching norms, generically failing the Gram test
            let q = random_unitary(&mut r, dim);
            xs.iter().map(|x| &q * x).collect()
        };
        let expected = gram_oracle(&xs, &ys);
        let outcome = zhu_li_interpolate(&xs, &ys, &tol).expect("well-formed pairs");
        let got = matches!(outcome, ZhuLiOutcome::Feasible(_));
        if got != expected {
            disagreements += 1;
        }
        if let ZhuLiOutcome::Feasible(conj) = outcome {
            feasible_count += 1;
            let report = conj.report(&Tolerances::default());
            let pair_ok = xs
                .iter()
                .zip(&ys)
                .all(|(x, y)| (apply(conj.matrix(), x) - y).norm() <= TOL_GRAM * x.norm().max(1.0));
            if !report.passed || !pair_ok {
                unverified += 1;
            }
        }
    }
    verdict(
        disagreements == 0 && unverified == 0,
        format!("500 cases ({feasible_count} feasible), {disagreements} disagreements, {unverified} unverified"),
    )
}

/// Family whose operators each take at most `palette` distinct values, with
/// at most `max_atoms` joint tuples.
fn small_palette_family(
    r: &mut ChaCha8Rng,
    dim: usize,
    size: usize,
    max_atoms: usize,
    palette: usize,
) -> PlantedFamily {
    let palettes: Vec<Vec<Complex64>> = (0..size)
        .map(|_| {
            let mut p: Vec<Complex64> = Vec::new();
            while p.len() < palette {
                let z = lattice_point(r);
                if !p.contains(&z) {
                    p.push(z);
                }
            }
            p
        })
        .collect();
    let atoms = r.random_range(1..=max_atoms.min(dim));
    let tuples: Vec<Vec<Complex64>> = (0..atoms)
        .map(|_| palettes.iter().map(|p| p[r.random_range(0..p.len())]).collect())
        .collect();
    let mut assignment: Vec<usize> = (0..atoms).collect();
    while assignment.len() < dim {
        assignment.push(r.random_range(0..atoms));
    }
    let spectra = (0..size)
        .map(|k| assignment.iter().map(|&a| tuples[a][k]).collect())
        .collect();
    PlantedFamily::new(random_unitary(r, dim), spectra)
}

/// Haar unitary on each eigenspace of operator `k` of the family.
fn commutant_unitary(r: &mut ChaCha8Rng, fam: &PlantedFamily, k: usize) -> CMatrix {
    let dim = fam.dim();
    let mut u = CMatrix::zeros(dim, dim);
    for z in fam.distinct_eigenvalues(k) {
        let idx: Vec<usize> = (0..dim).filter(|&j| fam.spectra[k][j] == z).collect();
        let h = random_unitary(r, idx.len());
        let cols = CMatrix::from_fn(dim, idx.len(), |i, a| fam.frame[(i, idx[a])]);
        u += &cols * h * cols.adjoint();
    }
    u
}

/// Every product `prod_k E_{N_k}(Delta_k)` over all subsets `Delta_k` of the
/// distinct eigenvalues of each operator.
fn brute_force_condition(fam: &PlantedFamily, xs: &[CVector], ys: &[CVector]) -> bool {
    let size = fam.operators.len();
    let per_op: Vec<Vec<CMatrix>> = (0..size)
        .map(|k| {
            let vals = fam.distinct_eigenvalues(k);
            (0..1u32 << vals.len())
                .map(|mask| {
                    fam.spectral_projection(k, |z| {
                        vals.iter().position(|v| *v == z).is_some_and(|p| mask & (1 << p) != 0)
                    })
                })
                .collect()
        })
        .collect();
    let dim = fam.dim();
    let mut stack = vec![(0usize, CMatrix::identity(dim, dim))];
    while let Some((k, e)) = stack.pop() {
        if k == size {
            for i in 0..xs.len() {
                for j in 0..xs.len() {
                    let scale = xs[i].norm() * xs[j].norm();
                    let gram = inner(&(&e * &xs[i]), &xs[j]) - inner(&(&e * &ys[j]), &ys[i]);
                    let cross = inner(&(&e * &xs[i]), &ys[j]) - inner(&(&e * &xs[j]), &ys[i]);
                    if gram.norm() > TOL_GRAM * scale || cross.norm() > TOL_GRAM * scale {
                        return false;
                    }
                }
            }
            continue;
        }
        for p in &per_op[k] {
            stack.push((k + 1, &e * p));
        }
    }
    true
}

fn criterion_3() -> Verdict {
    let mut r = rng(3);
    let tol = Tolerances::new(TOL_GRAM, 1e-7, 1e-9).unwrap();
    let (mut disagreements, mut feasible_count) = (0, 0);
    for trial in 0..200 {
        let dim = r.random_range(2..=8);
        let size = r.random_range(1..=3);
        let fam = small_palette_family(&mut r, dim, size, 8, 4);
        let k = r.random_range(1..=dim.min(3));
        let xs = random_orthogonal_set(&mut r, dim, k);
        let s = planted_symmetric_conjugation(&mut r, &fam);
        let ys: Vec<CVector> = match trial % 3 {
            0 => xs.iter().map(|x| apply(&s, x)).collect(),
            1 => {
                let u = commutant_unitary(&mut r, &fam, 0);
                xs.iter().map(|x| apply(&s, &(&u * x))).collect()
            }
            _ => {
                let q = random_unitary(&mut r, dim);
                xs.iter().map(|x| apply(&s, &(&q * x))).collect()
            }
        };
        let expected = brute_force_condition(&fam, &xs, &ys);
        let p = InterpolationProblem::symmetric(fam.operators.clone(), xs, ys, tol).expect("valid problem");
        let got = feasibility_symmetric(&p).expect("decidable").is_feasible();
        feasible_count += usize::from(expected);
        if got != expected {
            disagreements += 1;
        }
    }
    verdict(
        disagreements == 0,
        format!("200 families ({feasible_count} feasible by enumeration), {disagreements} disagreements"),
    )
}

fn certificate_worst(p: &InterpolationProblem, s: &CMatrix, skew: bool) -> f64 {
    let dim = p.dim;
    let mut worst = (s - s.transpose())
        .norm()
        .max((s * s.adjoint() - CMatrix::identity(dim, dim)).norm());
    for n in &p.operators {
        let target = if skew { -n.adjoint() } else { n.adjoint() };
        worst = worst.max((sandwich(s, n) - target).norm() / n.norm().max(1.0));
    }
    for (x, y) in p.xs.iter().zip(&p.ys) {
        worst = worst.max((apply(s, x) - y).norm() / x.norm().max(1.0));
    }
    worst
}

/// Spectrum with `pairs` pairs `(lambda, -lambda)` of random multiplicity and
/// `zeros` copies of zero.
fn skew_spectrum(r: &mut ChaCha8Rng, pairs: usize, zeros: usize) -> Vec<Complex64> {
    let mut used: Vec<Complex64> = Vec::new();
    let mut out = Vec::new();
    while used.len() < pairs {
        let z = lattice_point(r);
        if z == Complex64::default() || used.contains(&z) || used.contains(&-z) {
            continue;
        }
        used.push(z);
        let m = r.random_range(1..=2);
        for _ in 0..m {
            out.push(z);
            out.push(-z);
        }
    }
    out.extend(std::iter::repeat_n(Complex64::default(), zeros));
    out
}

fn criterion_4() -> Verdict {
    let mut r = rng(4);
    let tol = Tolerances::default();
    let (mut sym_fail, mut skew_fail) = (0, 0);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let dim = r.random_range(1..=12);
        let size = r.random_range(1..=3);
        let fam = random_family(&mut r, dim, size, 6);
        let s = planted_symmetric_conjugation(&mut r, &fam);
        let k = r.random_range(0..=dim.min(4));
        let xs = random_orthogonal_set(&mut r, dim, k);
        let ys = xs.iter().map(|x| apply(&s, x)).collect();
        let p = InterpolationProblem::symmetric(fam.operators.clone(), xs, ys, tol).unwrap();
        match construct(&p) {
            Ok(cert) if cert.feasible => {
                let w = certificate_worst(&p, cert.conjugation.as_ref().unwrap().matrix(), false);
                worst = worst.max(w);
                if w > TOL_CERT {
                    sym_fail += 1;
                }
            }
            _ => sym_fail += 1,
        }
    }
    for _ in 0..500 {
        let pairs = r.random_range(0..=3);
        let zeros = r.random_range(usize::from(pairs == 0)..=3);
        let spectrum = skew_spectrum(&mut r, pairs, zeros);
        let dim = spectrum.len();
        let (n, v) = random_normal(&mut r, &spectrum);
        let s = planted_skew_conjugation(&mut r, &v, &spectrum).expect("symmetric spectrum");
        let k = r.random_range(0..=dim.min(3));
        let xs = random_orthogonal_set(&mut r, dim, k);
        let ys = xs.iter().map(|x| apply(&s, x)).collect();
        let p = InterpolationProblem::skew(n, xs, ys, tol).unwrap();
        match construct(&p) {
            Ok(cert) if cert.feasible => {
                let w = certificate_worst(&p, cert.conjugation.as_ref().unwrap().matrix(), true);
                worst = worst.max(w);
                if w > TOL_CERT {
                    skew_fail += 1;
                }
            }
            _ => skew_fail += 1,
        }
    }
    verdict(
        sym_fail == 0 && skew_fail == 0,
        format!("500+500 planted, failures symmetric={sym_fail} skew={skew_fail}, worst residual {worst:.2e}"),
    )
}

fn multiplicity_symmetric(spectrum: &[Complex64]) -> bool {
    spectrum.iter().all(|&z| {
        z == Complex64::default()
            || spectrum.iter().filter(|&&w| w == z).count() == spectrum.iter().filter(|&&w| w == -z).count()
    })
}

fn criterion_5() -> Verdict {
    let mut r = rng(5);
    let tol = Tolerances::default();
    let (mut disagreements, mut bad_witness, mut skew_count) = (0, 0, 0);
    let mut worst = 0.0f64;
    for trial in 0..500 {
        let pairs = r.random_range(0..=3);
        let zeros = r.random_range(0..=3);
        let mut spectrum = skew_spectrum(&mut r, pairs, zeros);
        match trial % 4 {
            // drop one copy of a non-zero eigenvalue
            1 if pairs > 0 => {
                let i = spectrum.iter().position(|z| *z != Complex64::default()).unwrap();
                spectrum.remove(i);
            }
            // add an unpaired value
            2 => spectrum.push(lattice_point(&mut r)),
            _ => {}
        }
        if spectrum.is_empty() {
            spectrum.push(Complex64::default());
        }
        let expected = multiplicity_symmetric(&spectrum);
        let (n, _) = random_normal(&mut r, &spectrum);
        let decision = is_skew_symmetric_normal(&n, &tol).expect("normal");
        if decision.is_skew() != expected {
            disagreements += 1;
        }
        if let SkewDecision::Skew(conj) = decision {
            skew_count += 1;
            let s = conj.matrix();
            let residual = (sandwich(s, &n) + n.adjoint()).norm();
            worst = worst.max(residual);
            if residual > TOL_SKEW_WITNESS {
                bad_witness += 1;
            }
        }
    }
    let mut truncation_ok = true;
    for m in 1..=5 {
        let mut spectrum = vec![c(1.0, 0.0); m];
        spectrum.extend(vec![c(-1.0, 0.0); m + 1]);
        let n = diagonal(&spectrum);
        truncation_ok &= !is_skew_symmetric_normal(&n, &tol).unwrap().is_skew();
    }
    verdict(
        disagreements == 0 && bad_witness == 0 && truncation_ok,
        format!(
            "500 spectra ({skew_count} skew), {disagreements} disagreements, {bad_witness} bad witnesses \
             (worst {worst:.2e}), truncations m=1..5 rejected: {truncation_ok}"
        ),
    )
}

#[derive(Clone, Copy)]
enum Variant {
    Linear,
    LinearFlipped,
    Antilinear,
    AntilinearFlipped,
}

/// `(N, M, A)` where `T h = A h` (linear) or `T h = A conj(h)` (antilinear)
/// intertwines as the variant demands. `A = W X V^?` with `X[i][j]` free
/// only where the eigenvalues match.
fn intertwined(r: &mut ChaCha8Rng, variant: Variant) -> (Vec<Complex64>, Vec<Complex64>, CMatrix, CMatrix, CMatrix) {
    let dn = r.random_range(1..=6);
    let dm = r.random_range(1..=6);
    let palette: Vec<Complex64> = (0..3).map(|_| lattice_point(r)).collect();
    let a: Vec<Complex64> = (0..dn).map(|_| palette[r.random_range(0..3)]).collect();
    let flipped = matches!(variant, Variant::LinearFlipped | Variant::AntilinearFlipped);
    let b: Vec<Complex64> = (0..dm)
        .map(|_| {
            let z = palette[r.random_range(0..3)];
            if flipped {
                -z
            } else {
                z
            }
        })
        .collect();
    let (n, v) = random_normal(r, &a);
    let (m, w) = random_normal(r, &b);
    let x = CMatrix::from_fn(dm, dn, |i, j| {
        let target = if flipped { -a[j] } else { a[j] };
        if b[i] == target {
            random_complex(r)
        } else {
            Complex64::default()
        }
    });
    let t = match variant {
        Variant::Linear | Variant::LinearFlipped => &w * x * v.adjoint(),
        Variant::Antilinear | Variant::AntilinearFlipped => &w * x * v.transpose(),
    };
    (a, b, n, m, t)
}

fn criterion_6() -> Verdict {
    let mut r = rng(6);
    let tol = Tolerances::default();
    let (mut failures, mut setup_failures) = (0, 0);
    let mut worst = 0.0f64;
    let variants = [
        Variant::Linear,
        Variant::LinearFlipped,
        Variant::Antilinear,
        Variant::AntilinearFlipped,
    ];
    for trial in 0..200 {
        for &variant in &variants {
            let (_, _, n, m, t) = intertwined(&mut r, variant);
            let (lhs, flipped) = match variant {
                Variant::Linear => (&t * &n - &m * &t, false),
                Variant::LinearFlipped => (&t * &n + &m * &t, true),
                Variant::Antilinear => (&t * n.conjugate() - m.adjoint() * &t, false),
                Variant::AntilinearFlipped => (&t * n.conjugate() + m.adjoint() * &t, true),
            };
            if lhs.norm() > 1e-12 * (1.0 + t.norm() * (n.norm() + m.norm())) {
                setup_failures += 1;
                continue;
            }
            let dn = decompose(&n, &tol).unwrap();
            let dm = decompose(&m, &tol).unwrap();
            // Borel sets are subsets of the union of both spectra (and negations).
            let mut points: Vec<Complex64> = Vec::new();
            for z in dn
                .atoms
                .iter()
                .map(|a| a.eigenvalue)
                .chain(dm.atoms.iter().map(|a| a.eigenvalue))
            {
                for cand in [z, -z] {
                    if !points.iter().any(|p| (p - cand).norm() <= tol.cluster) {
                        points.push(cand);
                    }
                }
            }
            for mask in 0..(1u64 << points.len()) {
                let delta: Vec<Complex64> = (0..points.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| points[i])
                    .collect();
                let in_delta = |z: Complex64, sign: f64| delta.iter().any(|p| (p - z * sign).norm() <= tol.cluster);
                let sel_n = BorelSelector::new((0..dn.atoms.len()).filter(|&i| in_delta(dn.atoms[i].eigenvalue, 1.0)));
                let sign = if flipped { -1.0 } else { 1.0 };
                let sel_m = BorelSelector::new((0..dm.atoms.len()).filter(|&i| in_delta(dm.atoms[i].eigenvalue, sign)));
                let en = dn.projection(&sel_n).unwrap();
                let em = dm.projection(&sel_m).unwrap();
                let residual = match variant {
                    Variant::Linear | Variant::LinearFlipped => (&t * &en - &em * &t).norm(),
                    Variant::Antilinear | Variant::AntilinearFlipped => (&t * en.conjugate() - &em * &t).norm(),
                } / t.norm().max(1.0);
                worst = worst.max(residual);
                if residual > TOL_INTERTWINE {
                    failures += 1;
                }
            }
        }
        let _ = trial;
    }
    verdict(
        failures == 0 && setup_failures == 0,
        format!("200 triples x 4 variants, {failures} selector failures, worst {worst:.2e}"),
    )
}

fn subspace_from(cols: &[CVector], dim: usize) -> CMatrix {
    let m = CMatrix::from_fn(dim, cols.len(), |i, j| cols[j][i]);
    m.qr().q().columns(0, cols.len()).into_owned()
}

/// Whether the projection onto `span(basis)` equals `E(Delta)` for some set
/// of distinct eigenvalues, enumerating every subset.
fn spectral_sum_oracle(frame: &CMatrix, spectrum: &[Complex64], basis: &[CVector]) -> bool {
    let dim = spectrum.len();
    let q = subspace_from(basis, dim);
    let pm = &q * q.adjoint();
    let mut vals: Vec<Complex64> = Vec::new();
    for &z in spectrum {
        if !vals.contains(&z) {
            vals.push(z);
        }
    }
    (0..1u32 << vals.len()).any(|mask| {
        let ind: Vec<Complex64> = spectrum
            .iter()
            .map(|z| {
                let p = vals.iter().position(|v| v == z).unwrap();
                if mask & (1 << p) != 0 {
                    c(1.0, 0.0)
                } else {
                    Complex64::default()
                }
            })
            .collect();
        let e = frame * diagonal(&ind) * frame.adjoint();
        (e - &pm).norm() <= 1e-8
    })
}

fn criterion_7() -> Verdict {
    let mut r = rng(7);
    let tol = Tolerances::default();
    let shapes: [[usize; 4]; 4] = [[0, 1, 2, 3], [0, 0, 1, 2], [0, 0, 1, 1], [0, 0, 0, 1]];
    let (mut cases, mut disagreements, mut falsifier_misses, mut non_hyper) = (0, 0, 0, 0);
    for shape in shapes {
        let palette = [c(1.0, 0.0), c(0.0, 2.0), c(-1.0, -1.0), c(3.0, 0.5)];
        let spectrum: Vec<Complex64> = shape.iter().map(|&i| palette[i]).collect();
        let (n, v) = random_normal(&mut r, &spectrum);
        let col = |j: usize| v.column(j).into_owned();
        let mut subspaces: Vec<Vec<CVector>> = Vec::new();
        // spectral sums: groups of frame columns sharing eigenvalues
        let groups: Vec<Vec<usize>> = {
            let mut g: Vec<Vec<usize>> = Vec::new();
            for j in 0..4 {
                match g.iter_mut().find(|grp| shape[grp[0]] == shape[j]) {
                    Some(grp) => grp.push(j),
                    None => g.push(vec![j]),
                }
            }
            g
        };
        for mask in 1..(1u32 << groups.len()) {
            if subspaces.len() >= 6 {
                break;
            }
            let cols: Vec<CVector> = (0..groups.len())
                .filter(|i| mask & (1 << i) != 0)
                .flat_map(|i| groups[i].iter().map(|&j| col(j)))
                .collect();
            if cols.len() < 4 {
                subspaces.push(cols);
            }
        }
        while subspaces.len() < 12 {
            let kind = subspaces.len() % 3;
            let cols = match kind {
                // random line
                0 => vec![random_vector(&mut r, 4)],
                // line inside the first eigenspace, proper when it has dimension > 1
                1 => vec![col(0) + col(1) * random_complex(&mut r)],
                // mixed plane
                _ => vec![col(0) + col(3), col(2) + col(1) * c(0.0, 1.0)],
            };
            subspaces.push(cols);
        }
        for basis in &subspaces {
            cases += 1;
            let expected = spectral_sum_oracle(&v, &spectrum, basis);
            let got = is_hyperinvariant(&n, basis, &tol).unwrap();
            if got != expected {
                disagreements += 1;
            }
            if !expected {
                non_hyper += 1;
                let seed = cases as u64;
                match hyperinvariance_falsifier(&n, basis, 50, seed, &tol).unwrap() {
                    Some(conj) => {
                        let q = subspace_from(basis, 4);
                        let leak = CMatrix::identity(4, 4) - &q * q.adjoint();
                        let relation = relation_residuals(&conj, &n).unwrap().sym;
                        let escape = (&leak * conj.matrix() * q.conjugate()).norm();
                        if relation > 1e-9 || escape <= 4.0 * tol.residual {
                            falsifier_misses += 1;
                        }
                    }
                    None => falsifier_misses += 1,
                }
            }
        }
    }
    verdict(
        cases == 48 && disagreements == 0 && falsifier_misses == 0,
        format!("{cases} cases ({non_hyper} non-hyperinvariant), {disagreements} disagreements, {falsifier_misses} falsifier misses"),
    )
}

fn measure(zs: &[Complex64], r: &mut ChaCha8Rng, tol: &Tolerances) -> DiscreteMeasure {
    DiscreteMeasure::new(
        zs.iter()
            .map(|&z| MeasureAtom {
                z,
                weight: r.random_range(0.1..3.0),
            })
            .collect(),
        tol,
    )
    .unwrap()
}

fn distinct_points(r: &mut ChaCha8Rng, count: usize) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    while out.len() < count {
        let z = random_complex(r) * 3.0;
        if out.iter().all(|w| (w - z).norm() > 1e-3 && (w + z).norm() > 1e-3) && z.norm() > 1e-3 {
            out.push(z);
        }
    }
    out
}

fn criterion_8() -> Verdict {
    let mut r = rng(8);
    let tol = Tolerances::new(TOL_FIELD, 1e-7, 1e-9).unwrap();
    let (mut u_disagree, mut su_disagree, mut bad_fields, mut solved) = (0, 0, 0, 0);
    let mut worst = 0.0f64;
    let mut check_field =
        |mu: &DiscreteMeasure, f: &FunctionTable, g: &FunctionTable, outcome: &FieldOutcome, sym: bool| {
            if let FieldOutcome::Solved(field) = outcome {
                solved += 1;
                let report = verify_ufield(mu, f, g, field, sym, &tol).unwrap();
                let w = report.equation.max(report.unitarity).max(report.parity.unwrap_or(0.0));
                worst = worst.max(w);
                if !report.passed || w > TOL_FIELD || (sym && report.parity.is_none()) {
                    bad_fields += 1;
                }
            }
        };
    for trial in 0..500 {
        let atoms = r.random_range(1..=10);
        let n = r.random_range(1..=4);
        let zs = distinct_points(&mut r, atoms);
        let mu = measure(&zs, &mut r, &tol);
        let f = random_table(&mut r, atoms, n);
        let mut g = CMatrix::from_fn(atoms, n, |_, _| Complex64::default());
        for a in 0..atoms {
            let u = random_unitary(&mut r, n);
            g.set_row(a, &(u * f.row(a).transpose()).transpose());
        }
        if trial % 2 == 1 {
            let a = r.random_range(0..atoms);
            let factor = r.random_range(1.01..2.0);
            let row = g.row(a) * Complex64::new(factor, 0.0);
            g.set_row(a, &row);
        }
        let expected = (0..atoms).all(|a| {
            let (fa, ga) = (f.row(a).norm_squared(), g.row(a).norm_squared());
            (fa - ga).abs() <= TOL_FIELD * (1.0 + fa)
        });
        let (ft, gt) = (FunctionTable::new(f).unwrap(), FunctionTable::new(g).unwrap());
        let outcome = solve_ufield(&mu, &ft, &gt, &tol).unwrap();
        if matches!(outcome, FieldOutcome::Solved(_)) != expected {
            u_disagree += 1;
        }
        check_field(&mu, &ft, &gt, &outcome, false);
    }
    for trial in 0..500 {
        let pairs = r.random_range(1..=4);
        let with_zero = r.random_bool(0.5);
        let n = r.random_range(1..=4);
        let mut zs = Vec::new();
        for z in distinct_points(&mut r, pairs) {
            zs.push(z);
            zs.push(-z);
        }
        if with_zero {
            zs.push(Complex64::default());
        }
        let atoms = zs.len();
        // a symmetric measure: partner weights equal
        let mut atoms_v = Vec::new();
        for i in 0..pairs {
            let w = r.random_range(0.1..3.0);
            atoms_v.push(MeasureAtom {
                z: zs[2 * i],
                weight: w,
            });
            atoms_v.push(MeasureAtom {
                z: zs[2 * i + 1],
                weight: w,
            });
        }
        if with_zero {
            atoms_v.push(MeasureAtom {
                z: Complex64::default(),
                weight: r.random_range(0.1..3.0),
            });
        }
        let mu = DiscreteMeasure::new(atoms_v, &tol).unwrap();
        let f = random_table(&mut r, atoms, n);
        let mut g = CMatrix::from_fn(atoms, n, |_, _| Complex64::default());
        let planted = |a: usize, u: &CMatrix, g: &mut CMatrix| g.set_row(a, &(u * f.row(a).transpose()).transpose());
        for i in 0..pairs {
            let u = random_unitary(&mut r, n);
            planted(2 * i, &u, &mut g);
            planted(2 * i + 1, &u.transpose(), &mut g);
        }
        if with_zero {
            let u = random_symmetric_unitary(&mut r, n);
            planted(atoms - 1, &u, &mut g);
        }
        match trial % 3 {
            // keep norms, break the pair condition
            1 => {
                let a = 2 * r.random_range(0..pairs);
                let u = random_unitary(&mut r, n);
                planted(a, &u, &mut g);
            }
            // break a norm
            2 => {
                let a = r.random_range(0..atoms);
                let row = g.row(a) * Complex64::new(1.5, 0.0);
                g.set_row(a, &row);
            }
            _ => {}
        }
        let partner = |a: usize| if a + 1 == atoms && with_zero { a } else { a ^ 1 };
        let expected = (0..atoms).all(|a| {
            let b = partner(a);
            let (fa, ga) = (f.row(a).norm_squared(), g.row(a).norm_squared());
            let scale = 1.0 + fa + f.row(b).norm_squared();
            let lhs: Complex64 = (0..n).map(|k| f[(a, k)] * g[(b, k)]).sum();
            let rhs: Complex64 = (0..n).map(|k| f[(b, k)] * g[(a, k)]).sum();
            (fa - ga).abs() <= TOL_FIELD * scale && (lhs - rhs).norm() <= TOL_FIELD * scale
        });
        let (ft, gt) = (FunctionTable::new(f).unwrap(), FunctionTable::new(g).unwrap());
        let outcome = solve_sufield(&mu, &ft, &gt, &tol).unwrap();
        if matches!(outcome, FieldOutcome::Solved(_)) != expected {
            su_disagree += 1;
        }
        check_field(&mu, &ft, &gt, &outcome, true);
    }
    verdict(
        u_disagree == 0 && su_disagree == 0 && bad_fields == 0,
        format!(
            "500+500 tables, disagreements ufield={u_disagree} sufield={su_disagree}, \
             {solved} fields verified ({bad_fields} bad, worst {worst:.2e})"
        ),
    )
}

fn random_table(r: &mut ChaCha8Rng, atoms: usize, n: usize) -> CMatrix {
    CMatrix::from_fn(atoms, n, |_, _| random_complex(r))
}

fn criterion_9() -> Verdict {
    let mut r = rng(9);
    let tol = Tolerances::new(TOL_CERT, 1e-7, 1e-9).unwrap();
    let lambdas = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(1.0, 2.0), c(-3.0, 0.0)];
    let (mut sym_fail, mut skew_fail) = (0, 0);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 100 {
        let dim = r.random_range(2..=10);
        let size = r.random_range(1..=3);
        let fam = random_family(&mut r, dim, size, 5);
        let s = planted_symmetric_conjugation(&mut r, &fam);
        let x = random_vector(&mut r, dim);
        let y = apply(&s, &x);
        let p = InterpolationProblem::symmetric(fam.operators.clone(), vec![x.clone()], vec![y.clone()], tol).unwrap();
        let cert = construct(&p).unwrap();
        if !cert.feasible {
            sym_fail += 1;
            done += 1;
            continue;
        }
        let report = perturbation_suite(&cert, &p, &lambdas).unwrap();
        // recompute by hand
        let cs = cert.conjugation.as_ref().unwrap().matrix();
        let xy = &x * y.adjoint();
        for n in &fam.operators {
            for &l in &lambdas {
                let t = n + &xy * l;
                let w = (sandwich(cs, &t) - t.adjoint()).norm() / t.norm().max(1.0);
                worst = worst.max(w);
                if w > TOL_CERT {
                    sym_fail += 1;
                }
            }
        }
        if !report.passed {
            sym_fail += 1;
        }
        done += 1;
    }
    done = 0;
    while done < 100 {
        let (pairs, zeros) = (r.random_range(1..=3), r.random_range(0..=2));
        let spectrum = skew_spectrum(&mut r, pairs, zeros);
        let dim = spectrum.len();
        let (n, v) = random_normal(&mut r, &spectrum);
        let s = planted_skew_conjugation(&mut r, &v, &spectrum).unwrap();
        let x = random_vector(&mut r, dim);
        let y = apply(&s, &x);
        let p = InterpolationProblem::skew(n.clone(), vec![x.clone()], vec![y.clone()], tol).unwrap();
        let cert = construct(&p).unwrap();
        if !cert.feasible {
            skew_fail += 1;
            done += 1;
            continue;
        }
        let report = perturbation_suite(&cert, &p, &lambdas).unwrap();
        let cs = cert.conjugation.as_ref().unwrap().matrix();
        let delta = &x * x.adjoint() - &y * y.adjoint();
        for &l in &lambdas {
            let t = &n + &delta * l;
            let w = (sandwich(cs, &t) + t.adjoint()).norm() / t.norm().max(1.0);
            worst = worst.max(w);
            if w > TOL_CERT {
                skew_fail += 1;
            }
        }
        if !report.passed {
            skew_fail += 1;
        }
        done += 1;
    }
    verdict(
        sym_fail == 0 && skew_fail == 0,
        format!("100+100 single-pair certificates, failures symmetric={sym_fail} skew={skew_fail}, worst {worst:.2e}"),
    )
}

fn fixtures() -> Vec<PathBuf> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let mut out = Vec::new();
    for sub in ["interpolate", "field", "hyperinvariant"] {
        let mut files: Vec<PathBuf> = std::fs::read_dir(root.join(sub))
            .map(|d| d.filter_map(|e| e.ok()).map(|e| e.path()).collect())
            .unwrap_or_default();
        files.retain(|p| p.extension().is_some_and(|e| e == "json"));
        files.sort();
        out.extend(files);
    }
    out
}

fn criterion_10() -> Verdict {
    let opts = RunOptions::default();
    let files = fixtures();
    let mut failures = Vec::new();
    for path in &files {
        let bytes = std::fs::read(path).unwrap();
        let dir = path
            .parent()
            .and_then(|p| p.file_name())
            .and_then(|n| n.to_str())
            .unwrap_or("");
        let run = |b: &[u8]| -> Outcome {
            match dir {
                "field" => cmd_field(b, &opts),
                "hyperinvariant" => cmd_hyperinvariant(b, &opts),
                _ => cmd_interpolate(b, &opts),
            }
        };
        let (first, second) = (run(&bytes), run(&bytes));
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let (Some(a), Some(b)) = (&first.certificate, &second.certificate) else {
            failures.push(format!("{name}: no certificate (exit {})", first.code));
            continue;
        };
        if a != b {
            failures.push(format!("{name}: certificates differ between runs"));
        }
        let verified = cmd_verify(&bytes, a, &opts);
        if verified.code != 0 {
            failures.push(format!("{name}: verify exit {}", verified.code));
        }
    }
    verdict(
        failures.is_empty() && !files.is_empty(),
        format!("{} fixtures, failures: [{}]", files.len(), failures.join("; ")),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("conjugation axioms", criterion_1),
        ("Zhu-Li equivalence", criterion_2),
        ("Borel-reduction oracle", criterion_3),
        ("planted-solution completeness", criterion_4),
        ("skew-symmetry decision", criterion_5),
        ("intertwining invariant", criterion_6),
        ("hyperinvariance", criterion_7),
        ("field equations", criterion_8),
        ("perturbation properties", criterion_9),
        ("CLI round-trip", criterion_10),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        all &= v.pass;
        println!(
            "{} criterion {:>2} {name}: {} ({secs:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
