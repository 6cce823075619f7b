use super::spectral::{decompose_hermitian, Spectral};
use super::{check_square, hermitian_part, hermiticity_defect, CMat, C64, HERMITIAN_TOL};
use crate::{QmsError, Result};

/// Default smallest eigenvalue for a state to count as faithful.
pub const FAITHFUL_THRESHOLD: f64 = 1e-10;

const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-12;

/// A self-adjoint `d x d` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    /// Validates hermiticity (relative `1e-12`) and stores the exact
    /// Hermitian part.
    pub fn new(m: CMat) -> Result<Self> {
        check_square(&m, "Hermitian matrix")?;
        let defect = hermiticity_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(QmsError::InvalidInput(format!(
                "matrix is not Hermitian (relative defect {defect:.3e})"
            )));
        }
        Ok(Self(hermitian_part(&m)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = nalgebra::DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self(CMat::from_diagonal(&v))
    }

    pub fn identity(d: usize) -> Self {
        Self(CMat::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }
}

impl AsRef<CMat> for HermitianMatrix {
    fn as_ref(&self) -> &CMat {
        &self.0
    }
}

/// A unit-trace positive semidefinite matrix with its cached spectrum.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: CMat,
    spectrum: Spectral,
}

impl DensityMatrix {
    /// Validates trace one (within `1e-12`) and eigenvalues `>= -1e-12`.
    pub fn new(m: CMat) -> Result<Self> {
        let h = HermitianMatrix::new(m)?;
        let tr = h.0.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QmsError::InvalidInput(format!(
                "density matrix must have unit trace, got {:.15}",
                tr.re
            )));
        }
        let spectrum = decompose_hermitian(&h.0);
        if spectrum.min() < -POSITIVITY_TOL {
            return Err(QmsError::InvalidInput(format!(
                "density matrix has negative eigenvalue {:.3e}",
                spectrum.min()
            )));
        }
        Ok(Self { mat: h.0, spectrum })
    }

    /// Renormalises the trace and symmetrises before validating; for
    /// matrices produced by numerical propagation.
    pub fn from_numerical(m: &CMat) -> Result<Self> {
        let mut h = hermitian_part(m);
        let tr = h.trace().re;
        if !(tr > 0.0) {
            return Err(QmsError::InvalidInput("matrix has non-positive trace".into()));
        }
        h.scale_mut(1.0 / tr);
        Self::new(h)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let mat = CMat::identity(d, d).scale(1.0 / d as f64);
        Self {
            spectrum: Spectral {
                values: vec![1.0 / d as f64; d],
                vectors: CMat::identity(d, d),
            },
            mat,
        }
    }

    /// `|psi><psi|` for a (not necessarily normalised) vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QmsError::InvalidInput("zero state vector".into()));
        }
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|z| z / norm));
        Self::new(&v * v.adjoint())
    }

    /// Computational basis state `|k><k|`.
    pub fn basis_state(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(QmsError::InvalidInput(format!(
                "basis index {k} out of range for dimension {d}"
            )));
        }
        let mut psi = vec![C64::new(0.0, 0.0); d];
        psi[k] = C64::new(1.0, 0.0);
        Self::pure(&psi)
    }

    pub fn diagonal(p: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(p).into_matrix())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn spectrum(&self) -> &Spectral {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.min()
    }

    pub fn is_faithful(&self) -> bool {
        self.min_eigenvalue() > FAITHFUL_THRESHOLD
    }

    pub fn require_faithful(&self) -> Result<()> {
        if self.is_faithful() {
            Ok(())
        } else {
            Err(QmsError::NotFaithful {
                min_eig: self.min_eigenvalue(),
            })
        }
    }

    /// `(1 - eps) rho + eps I/d`.
    pub fn regularize(&self, eps: f64) -> Self {
        let d = self.dim();
        let mut mat = self.mat.scale(1.0 - eps);
        for i in 0..d {
            mat[(i, i)] += C64::new(eps / d as f64, 0.0);
        }
        let values = self
            .spectrum
            .values
            .iter()
            .map(|&v| (1.0 - eps) * v + eps / d as f64)
            .collect();
        Self {
            mat,
            spectrum: Spectral {
                values,
                vectors: self.spectrum.vectors.clone(),
            },
        }
    }

    /// `ln(rho)`; fails on non-faithful states.
    pub fn log(&self) -> Result<CMat> {
        self.require_faithful()?;
        self.spectrum.map(f64::ln)
    }

    pub fn is_maximally_mixed(&self, tol: f64) -> bool {
        let d = self.dim() as f64;
        self.spectrum.values.iter().all(|&v| (v - 1.0 / d).abs() <= tol)
    }
}
