//! Complex matrix algebra on a finite-dimensional Hilbert space.
//!
//! Everything here works on dense `d x d` complex matrices with `d` in the
//! low single digits. States and observables are wrapped in small newtypes
//! that carry their validation; superoperators are `d^2 x d^2` matrices in
//! the column-stacking convention.

mod basis;
mod kernel;
mod random;
mod spectral;
mod state;
mod superop;

pub use basis::TracelessBasis;
pub use kernel::{kernel_phi, phi_divided_first, phi_divided_second, phi_unchecked};
pub use random::{
    random_density, random_density_with, random_hermitian, random_matrix, random_pure, random_traceless_hermitian,
    random_unitary, seeded_rng, SeededRng,
};
pub use spectral::{matrix_function, spectral_decompose, Spectral};
pub use state::{DensityMatrix, HermitianMatrix, FAITHFUL_THRESHOLD};
pub use superop::{devectorize, kron, vectorize, Superoperator};

use nalgebra::DMatrix;
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Relative hermiticity tolerance `||A - A^*||_F <= tol ||A||_F`.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn zeros(d: usize) -> CMat {
    CMat::zeros(d, d)
}

pub fn dagger(a: &CMat) -> CMat {
    a.adjoint()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn trace(a: &CMat) -> C64 {
    a.trace()
}

/// Hilbert-Schmidt inner product `Tr(A^* B)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter()
        .zip(b.iter())
        .fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Removes the trace: `A - Tr(A)/d I`.
pub fn traceless_part(a: &CMat) -> CMat {
    let d = a.nrows();
    let t = a.trace() / d as f64;
    let mut out = a.clone();
    for i in 0..d {
        out[(i, i)] -= t;
    }
    out
}

/// Largest singular value.
pub fn operator_norm(a: &CMat) -> f64 {
    let gram = hermitian_part(&(a.adjoint() * a));
    nalgebra::SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .fold(0.0_f64, |m, &v| m.max(v))
        .max(0.0)
        .sqrt()
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(a: &CMat) -> f64 {
    nalgebra::SymmetricEigen::new(hermitian_part(a))
        .eigenvalues
        .iter()
        .map(|v| v.abs())
        .sum()
}

/// `||A - A^*||_F / ||A||_F`, zero for the zero matrix.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    let n = frobenius(a);
    if n == 0.0 {
        return 0.0;
    }
    frobenius(&(a - a.adjoint())) / n
}

pub(crate) fn check_square(a: &CMat, what: &str) -> crate::Result<usize> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(crate::QmsError::InvalidInput(format!(
            "{what} must be a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

pub(crate) fn check_dim(a: &CMat, d: usize, what: &str) -> crate::Result<()> {
    if a.nrows() != d || a.ncols() != d {
        return Err(crate::QmsError::InvalidInput(format!(
            "{what}: expected {d}x{d}, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}
