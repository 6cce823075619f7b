//! Seeded generation of test objects: Haar unitaries, Hermitian matrices
//! and faithful density matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{hermitian_part, traceless_part, CMat, DensityMatrix, Spectral, C64};
use crate::{QmsError, Result};

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Complex Ginibre matrix with standard normal real and imaginary parts.
pub fn random_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    CMat::from_fn(d, d, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    hermitian_part(&random_matrix(d, rng))
}

pub fn random_traceless_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    traceless_part(&random_hermitian(d, rng))
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fixing).
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let qr = random_matrix(d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random pure state.
pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let psi: Vec<C64> = (0..d).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect();
    DensityMatrix::pure(&psi).expect("gaussian vector is nonzero with probability one")
}

/// Faithful random state: a flat-Dirichlet spectrum mixed with `I/d` so that
/// every eigenvalue is at least `min_eig`, rotated by a Haar unitary.
pub fn random_density_with<R: Rng + ?Sized>(d: usize, min_eig: f64, rng: &mut R) -> Result<DensityMatrix> {
    if d == 0 || !(0.0..1.0 / d as f64).contains(&min_eig) {
        return Err(QmsError::InvalidInput(format!(
            "min_eig must lie in [0, 1/{d}), got {min_eig}"
        )));
    }
    let raw: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    let mix = d as f64 * min_eig;
    let values: Vec<f64> = raw.iter().map(|x| (1.0 - mix) * x / total + mix / d as f64).collect();
    let u = random_unitary(d, rng);
    let spectral = Spectral { values, vectors: u };
    DensityMatrix::from_numerical(&spectral.reconstruct())
}

/// Seeded convenience wrapper around [`random_density_with`].
pub fn random_density(dim: usize, seed: u64, min_eig: f64) -> Result<DensityMatrix> {
    random_density_with(dim, min_eig, &mut seeded_rng(seed))
}
