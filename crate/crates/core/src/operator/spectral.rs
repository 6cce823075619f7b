use nalgebra::SymmetricEigen;

#[cfg(test)]
use super::frobenius;
use super::{check_square, hermitian_part, hermiticity_defect, CMat, C64, HERMITIAN_TOL};
use crate::{QmsError, Result};

/// Eigendecomposition `A = V diag(values) V^*` of a Hermitian matrix with
/// eigenvalues sorted ascending.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Spectral {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn reconstruct(&self) -> CMat {
        self.from_frame(&CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            self.dim(),
            self.values.iter().map(|&v| C64::new(v, 0.0)),
        )))
    }

    /// `V^* A V`: expresses `A` in the eigenbasis.
    pub fn to_frame(&self, a: &CMat) -> CMat {
        self.vectors.adjoint() * a * &self.vectors
    }

    /// `V B V^*`: maps an eigenbasis matrix back.
    pub fn from_frame(&self, b: &CMat) -> CMat {
        &self.vectors * b * self.vectors.adjoint()
    }

    /// `V f(diag) V^*`; fails when `f` is not finite on the spectrum.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<CMat> {
        let mut diag = Vec::with_capacity(self.dim());
        for &v in &self.values {
            let fv = f(v);
            if !fv.is_finite() {
                return Err(QmsError::DomainError(format!(
                    "function is undefined at eigenvalue {v:.6e}"
                )));
            }
            diag.push(C64::new(fv, 0.0));
        }
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(diag));
        Ok(hermitian_part(&self.from_frame(&d)))
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.dim() - 1]
    }
}

/// Diagonalises a Hermitian matrix.
pub fn spectral_decompose(a: &CMat) -> Result<Spectral> {
    check_square(a, "spectral_decompose")?;
    let defect = hermiticity_defect(a);
    if defect > HERMITIAN_TOL {
        return Err(QmsError::InvalidInput(format!(
            "matrix is not Hermitian (relative defect {defect:.3e})"
        )));
    }
    Ok(decompose_hermitian(&hermitian_part(a)))
}

/// Diagonalisation without the hermiticity check; the caller guarantees
/// (or has already enforced) `a == a^*`.
pub(crate) fn decompose_hermitian(a: &CMat) -> Spectral {
    let d = a.nrows();
    if d == 1 {
        return Spectral {
            values: vec![a[(0, 0)].re],
            vectors: CMat::identity(1, 1),
        };
    }
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(d, d);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Spectral { values, vectors }
}

/// Applies a scalar function through the spectral calculus.
pub fn matrix_function<F: Fn(f64) -> f64>(a: &CMat, f: F) -> Result<CMat> {
    spectral_decompose(a)?.map(f)
}

#[cfg(test)]
pub(crate) fn reconstruction_residual(a: &CMat, s: &Spectral) -> f64 {
    let n = frobenius(a).max(f64::MIN_POSITIVE);
    frobenius(&(a - s.reconstruct())) / n
}
