//! Transport geometry on faithful states: the twisted multiplication
//! `[rho]_omega`, gradient and divergence, the metric operator and the
//! Wasserstein-type distance built from it.

mod coupling;
mod path;

pub use coupling::{coupling_w2, transport_plan, Coupling, CouplingResult};
pub use path::{
    diameter_estimate, w1_bound_check, w2_distance, DiameterEstimate, DiscretePath, W1Bound, W2Options, W2Result,
};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::generator::DetailedBalanceGenerator;
use crate::operator::{
    check_dim, commutator, frobenius, hermiticity_defect, phi_unchecked, CMat, DensityMatrix, Spectral, TracelessBasis,
    C64,
};
use crate::{QmsError, Result};

/// Kernel matrix `Phi_kl = phi_omega(lambda_k, lambda_l)`.
pub(crate) fn kernel_matrix(values: &[f64], omega: f64) -> DMatrix<f64> {
    let d = values.len();
    DMatrix::from_fn(d, d, |k, l| phi_unchecked(values[k], values[l], omega))
}

fn hadamard(phi: &DMatrix<f64>, a: &CMat) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |k, l| a[(k, l)] * phi[(k, l)])
}

/// `[rho]_omega(A)`: entrywise multiplication by the kernel in the eigenbasis
/// of `rho`.
pub fn apply_rho_omega(rho: &DensityMatrix, omega: f64, a: &CMat) -> Result<CMat> {
    rho.require_faithful()?;
    check_dim(a, rho.dim(), "apply_rho_omega")?;
    let s = rho.spectrum();
    let phi = kernel_matrix(&s.values, omega);
    Ok(s.from_frame(&hadamard(&phi, &s.to_frame(a))))
}

/// The generator's jump operators and kernels expressed in the eigenframe of
/// a fixed faithful state.
pub(crate) struct RhoFrame<'g> {
    pub(crate) gen: &'g DetailedBalanceGenerator,
    pub(crate) spectrum: Spectral,
    pub(crate) jumps: Vec<CMat>,
    pub(crate) kernels: Vec<DMatrix<f64>>,
}

impl<'g> RhoFrame<'g> {
    pub(crate) fn new(gen: &'g DetailedBalanceGenerator, rho: &DensityMatrix) -> Result<Self> {
        rho.require_faithful()?;
        check_dim(rho.matrix(), gen.dim(), "state")?;
        let spectrum = rho.spectrum().clone();
        let jumps = gen.modes().iter().map(|m| spectrum.to_frame(&m.l)).collect();
        let mut kernels: Vec<DMatrix<f64>> = Vec::with_capacity(gen.modes().len());
        for (j, m) in gen.modes().iter().enumerate() {
            let cached = gen.modes()[..j].iter().position(|p| p.omega == m.omega);
            let k = match cached {
                Some(i) => kernels[i].clone(),
                None => kernel_matrix(&spectrum.values, m.omega),
            };
            kernels.push(k);
        }
        Ok(Self {
            gen,
            spectrum,
            jumps,
            kernels,
        })
    }

    pub(crate) fn to_frame(&self, a: &CMat) -> CMat {
        self.spectrum.to_frame(a)
    }

    #[allow(clippy::wrong_self_convention)]
    pub(crate) fn from_frame(&self, a: &CMat) -> CMat {
        self.spectrum.from_frame(a)
    }

    pub(crate) fn grad(&self, uf: &CMat) -> Vec<CMat> {
        self.jumps.iter().map(|l| commutator(l, uf)).collect()
    }

    /// `sum_j c_j <A_j, [rho]_{omega_j} B_j>` for frame fields.
    pub(crate) fn field_inner(&self, a: &[CMat], b: &[CMat]) -> f64 {
        let mut acc = 0.0;
        for (j, m) in self.gen.modes().iter().enumerate() {
            let phi = &self.kernels[j];
            let mut s = C64::new(0.0, 0.0);
            for ((x, y), p) in a[j].iter().zip(b[j].iter()).zip(phi.iter()) {
                s += x.conj() * y * *p;
            }
            acc += m.c * s.re;
        }
        acc
    }

    /// `-div([rho]_omega grad U)` for a frame potential.
    pub(crate) fn metric_apply(&self, uf: &CMat) -> CMat {
        let d = uf.nrows();
        let mut out = CMat::zeros(d, d);
        for (j, m) in self.gen.modes().iter().enumerate() {
            let g = hadamard(&self.kernels[j], &commutator(&self.jumps[j], uf));
            out -= commutator(&g, &self.jumps[j].adjoint()).scale(m.c);
        }
        out
    }
}

/// A potential together with its gradient field `(dU_j = [L_j, U])_j`.
#[derive(Clone, Debug)]
pub struct TangentField {
    pub potential: CMat,
    pub components: Vec<CMat>,
}

pub fn gradient(gen: &DetailedBalanceGenerator, u: &CMat) -> Result<TangentField> {
    check_dim(u, gen.dim(), "gradient")?;
    Ok(TangentField {
        potential: u.clone(),
        components: gen.modes().iter().map(|m| commutator(&m.l, u)).collect(),
    })
}

/// `div(A) = sum_j c_j [A_j, L_j^*]`.
pub fn divergence(gen: &DetailedBalanceGenerator, a: &[CMat]) -> Result<CMat> {
    if a.len() != gen.modes().len() {
        return Err(QmsError::InvalidInput(format!(
            "divergence needs {} components, got {}",
            gen.modes().len(),
            a.len()
        )));
    }
    let d = gen.dim();
    let mut out = CMat::zeros(d, d);
    for (x, m) in a.iter().zip(gen.modes()) {
        check_dim(x, d, "divergence component")?;
        out += commutator(x, &m.l.adjoint()).scale(m.c);
    }
    Ok(out)
}

/// `-div([rho]_omega grad U)`.
pub fn apply_metric(gen: &DetailedBalanceGenerator, rho: &DensityMatrix, u: &CMat) -> Result<CMat> {
    check_dim(u, gen.dim(), "potential")?;
    let frame = RhoFrame::new(gen, rho)?;
    Ok(frame.from_frame(&frame.metric_apply(&frame.to_frame(u))))
}

/// `<grad X, grad Y>_{L, rho} = sum_j c_j <dX_j, [rho]_{omega_j} dY_j>`.
pub fn metric_inner(gen: &DetailedBalanceGenerator, rho: &DensityMatrix, x: &CMat, y: &CMat) -> Result<f64> {
    check_dim(x, gen.dim(), "potential")?;
    check_dim(y, gen.dim(), "potential")?;
    let frame = RhoFrame::new(gen, rho)?;
    let gx = frame.grad(&frame.to_frame(x));
    let gy = frame.grad(&frame.to_frame(y));
    Ok(frame.field_inner(&gx, &gy))
}

/// `||grad U||_{L, rho}`.
pub fn tangent_norm(gen: &DetailedBalanceGenerator, rho: &DensityMatrix, u: &CMat) -> Result<f64> {
    Ok(metric_inner(gen, rho, u, u)?.max(0.0).sqrt())
}

/// Matrix of `U -> -div([rho]_omega grad U)` on traceless Hermitian
/// potentials, in [`TracelessBasis`] coordinates.
#[derive(Clone, Debug)]
pub struct MetricOperator {
    rho: DensityMatrix,
    basis: TracelessBasis,
    matrix: DMatrix<f64>,
    cholesky: Option<Cholesky<f64, Dyn>>,
}

impl MetricOperator {
    pub fn new(gen: &DetailedBalanceGenerator, rho: &DensityMatrix) -> Result<Self> {
        let frame = RhoFrame::new(gen, rho)?;
        let basis = TracelessBasis::new(gen.dim());
        let grads: Vec<Vec<CMat>> = basis
            .elements()
            .iter()
            .map(|b| frame.grad(&frame.to_frame(b)))
            .collect();
        let n = basis.len();
        let mut matrix = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let v = frame.field_inner(&grads[a], &grads[b]);
                matrix[(a, b)] = v;
                matrix[(b, a)] = v;
            }
        }
        let cholesky = Cholesky::new(matrix.clone());
        Ok(Self {
            rho: rho.clone(),
            basis,
            matrix,
            cholesky,
        })
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn basis(&self) -> &TracelessBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky.is_some()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn symmetry_residual(&self) -> f64 {
        let n = self.matrix.norm();
        if n == 0.0 {
            0.0
        } else {
            (&self.matrix - self.matrix.transpose()).norm() / n
        }
    }

    /// Potential coordinates `u` solving `M u = v`.
    pub fn solve_coords(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let chol = self.cholesky.as_ref().ok_or(QmsError::NotFaithful {
            min_eig: self.rho.min_eigenvalue(),
        })?;
        Ok(chol.solve(v))
    }

    pub fn apply_coords(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.matrix * u
    }

    /// `<v, M^{-1} v>`, the squared metric norm of the velocity `v`.
    pub fn inverse_quadratic(&self, v: &DVector<f64>) -> Result<f64> {
        Ok(v.dot(&self.solve_coords(v)?))
    }
}

pub fn metric_operator(gen: &DetailedBalanceGenerator, rho: &DensityMatrix) -> Result<MetricOperator> {
    MetricOperator::new(gen, rho)
}

/// Relative tolerance for the trace of a tangent vector.
const TANGENT_TRACE_TOL: f64 = 1e-10;

/// Solves the continuity equation `gamma_dot = -div([rho]_omega grad U)` for
/// the traceless potential `U`.
pub fn solve_continuity(gen: &DetailedBalanceGenerator, rho: &DensityMatrix, gamma_dot: &CMat) -> Result<TangentField> {
    check_dim(gamma_dot, gen.dim(), "velocity")?;
    let scale = frobenius(gamma_dot);
    if gamma_dot.trace().norm() > TANGENT_TRACE_TOL * scale.max(1.0) {
        return Err(QmsError::InvalidInput(format!(
            "velocity must be traceless, trace is {:.3e}",
            gamma_dot.trace().norm()
        )));
    }
    if hermiticity_defect(gamma_dot) > 1e-10 {
        return Err(QmsError::InvalidInput("velocity must be Hermitian".into()));
    }
    let op = MetricOperator::new(gen, rho)?;
    let u = op.solve_coords(&op.basis.coords(gamma_dot))?;
    let potential = op.basis.from_coords(u.as_slice());
    gradient(gen, &potential)
}

#[cfg(test)]
mod tests;
