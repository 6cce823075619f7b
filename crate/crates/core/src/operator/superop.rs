use super::{CMat, C64};
use crate::{QmsError, Result};

/// Column-stacking vectorisation: entry `(i, j)` goes to index `i + d j`.
pub fn vectorize(x: &CMat) -> nalgebra::DVector<C64> {
    // nalgebra stores column-major, which is exactly column stacking.
    nalgebra::DVector::from_column_slice(x.as_slice())
}

pub fn devectorize(v: &nalgebra::DVector<C64>, d: usize) -> Result<CMat> {
    if v.len() != d * d {
        return Err(QmsError::InvalidInput(format!(
            "cannot devectorize length {} into {d}x{d}",
            v.len()
        )));
    }
    Ok(CMat::from_column_slice(d, d, v.as_slice()))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Matrix of a linear map on `d x d` matrices acting on `vec(X)`.
#[derive(Clone, Debug)]
pub struct Superoperator {
    dim: usize,
    matrix: CMat,
}

impl Superoperator {
    /// Builds the matrix by applying `map` to the matrix units.
    pub fn from_map<F: Fn(&CMat) -> CMat>(d: usize, map: F) -> Self {
        let n = d * d;
        let mut matrix = CMat::zeros(n, n);
        for col in 0..n {
            let mut unit = CMat::zeros(d, d);
            unit[(col % d, col / d)] = C64::new(1.0, 0.0);
            let image = map(&unit);
            matrix.set_column(col, &vectorize(&image));
        }
        Self { dim: d, matrix }
    }

    pub fn from_matrix(d: usize, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != d * d || matrix.ncols() != d * d {
            return Err(QmsError::InvalidInput(format!(
                "superoperator on {d}x{d} matrices must be {0}x{0}",
                d * d
            )));
        }
        Ok(Self { dim: d, matrix })
    }

    /// Dimension `d` of the underlying Hilbert space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        super::check_dim(x, self.dim, "superoperator argument")?;
        devectorize(&(&self.matrix * vectorize(x)), self.dim)
    }

    /// Hilbert-Schmidt adjoint (conjugate transpose of the matrix).
    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
        }
    }
}
