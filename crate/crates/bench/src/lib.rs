//! Seeded benchmark instances.

use conjint::generate::{
    planted_skew_conjugation, planted_symmetric_conjugation, random_family, random_normal, random_orthogonal_set,
};
use conjint::interpolation::InterpolationProblem;
use conjint::{CVector, Complex64, Tolerances};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Planted symmetric instance: `ops` commuting operators on `C^dim` and
/// `pairs` orthogonal pairs.
pub fn symmetric_instance(dim: usize, ops: usize, pairs: usize, seed: u64) -> InterpolationProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fam = random_family(&mut rng, dim, ops, 8);
    let s = planted_symmetric_conjugation(&mut rng, &fam);
    let xs = random_orthogonal_set(&mut rng, dim, pairs);
    let ys: Vec<CVector> = xs.iter().map(|x| &s * x.conjugate()).collect();
    InterpolationProblem::symmetric(fam.operators, xs, ys, Tolerances::default()).expect("planted instance")
}

/// Planted skew instance on `C^(2 * half)` with eigenvalues `±(k + ik)`.
pub fn skew_instance(half: usize, pairs: usize, seed: u64) -> InterpolationProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spectrum: Vec<Complex64> = (0..half)
        .flat_map(|k| {
            let z = Complex64::new((k % 4 + 1) as f64, (k % 3) as f64);
            [z, -z]
        })
        .collect();
    let (n, v) = random_normal(&mut rng, &spectrum);
    let s = planted_skew_conjugation(&mut rng, &v, &spectrum).expect("paired spectrum");
    let xs = random_orthogonal_set(&mut rng, spectrum.len(), pairs);
    let ys: Vec<CVector> = xs.iter().map(|x| &s * x.conjugate()).collect();
    InterpolationProblem::skew(n, xs, ys, Tolerances::default()).expect("planted instance")
}
