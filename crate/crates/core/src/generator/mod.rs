//! Detailed-balance Lindblad generators.
//!
//! A generator is stored in its canonical mode form: a faithful invariant
//! state `sigma` and jump modes `(L_j, c_j, omega_j)` with
//!
//! ```text
//! L(f)   = sum_j c_j ( e^{-w_j/2} L_j^* [f, L_j] + e^{w_j/2} [L_j, f] L_j^* )
//! L_*(r) = sum_j c_j ( e^{ w_j/2} [L_j^* r, L_j] + e^{-w_j/2} [L_j, r L_j^*] )
//! ```
//!
//! The modes are orthonormal (`Tr(L_j^* L_k) = d delta_jk`), traceless,
//! closed under adjoints with matching `(c, -omega)`, and eigenvectors of the
//! modular operator `X -> sigma X sigma^{-1}` with eigenvalue `e^{-omega}`.

mod build;
mod builtin;
mod json;

pub use builtin::{builtin, dephasing, depolarizing, thermal_qubit, Builtin};
pub(crate) use json::to_rows;
pub use json::{GeneratorFile, MatrixRows, ModeFile};

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::operator::{
    commutator, frobenius, hermitian_part, hs_inner, kron, vectorize, CMat, DensityMatrix, Superoperator,
    TracelessBasis, C64,
};
use crate::{QmsError, Result};

/// Tolerances for the generator invariants.
pub mod tol {
    pub const NORMALIZATION: f64 = 1e-8;
    pub const TRACELESS: f64 = 1e-10;
    pub const ADJOINT_CLOSURE: f64 = 1e-10;
    pub const MODULAR: f64 = 1e-8;
    pub const UNITALITY: f64 = 1e-10;
    pub const DETAILED_BALANCE: f64 = 1e-9;
    pub const INVARIANCE: f64 = 1e-10;
    /// Relative threshold on the symmetrised spectrum for kernel counting.
    pub const KERNEL: f64 = 1e-9;
    /// Bohr frequencies closer than this are merged.
    pub const BOHR_MERGE: f64 = 1e-8;
}

/// One jump mode `(L_j, c_j, omega_j)`.
#[derive(Clone, Debug)]
pub struct JumpMode {
    pub l: CMat,
    pub c: f64,
    pub omega: f64,
}

impl JumpMode {
    pub fn new(l: CMat, c: f64, omega: f64) -> Self {
        Self { l, c, omega }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Picture {
    Heisenberg,
    Schrodinger,
}

/// Outcome of one invariant check.
#[derive(Clone, Debug, serde::Serialize)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Residuals of every structural invariant of a candidate generator.
#[derive(Clone, Debug, serde::Serialize)]
pub struct GeneratorDiagnostics {
    pub checks: Vec<InvariantCheck>,
    pub kernel_dim: usize,
}

impl GeneratorDiagnostics {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn is_primitive(&self) -> bool {
        self.kernel_dim == 1
    }
}

/// Spectral data of the generator symmetrised in the GNS inner product
/// `<X, Y>_sigma = Tr(sigma X^* Y)`.
///
/// With `T(X) = X sigma^{1/2}` the matrix `S = T L T^{-1}` is Hermitian, so
/// `L` is diagonalisable with real spectrum and `exp(tL)` is evaluated
/// through `S` without conditioning issues.
#[derive(Clone, Debug)]
pub struct GnsSpectrum {
    /// Eigenvalues of `S`, ascending (all `<= 0`).
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors of `S` as columns (vectorised matrices).
    pub vectors: CMat,
    sqrt_sigma: CMat,
    inv_sqrt_sigma: CMat,
}

impl GnsSpectrum {
    /// Converts an eigenvector of `S` into the corresponding eigenvector
    /// `Y sigma^{-1/2}` of the Heisenberg generator.
    pub fn heisenberg_eigenvector(&self, k: usize) -> CMat {
        let d = self.sqrt_sigma.nrows();
        let y = CMat::from_column_slice(d, d, self.vectors.column(k).as_slice());
        y * &self.inv_sqrt_sigma
    }

    fn exp_apply(&self, t: f64, y: &CMat) -> CMat {
        let d = y.nrows();
        let mut coeff = self.vectors.adjoint() * vectorize(y);
        for (k, c) in coeff.iter_mut().enumerate() {
            *c *= (t * self.values[k]).exp();
        }
        let out = &self.vectors * coeff;
        CMat::from_column_slice(d, d, out.as_slice())
    }
}

/// A validated detailed-balance generator.
#[derive(Clone, Debug)]
pub struct DetailedBalanceGenerator {
    sigma: DensityMatrix,
    modes: Vec<JumpMode>,
    adjoint: Vec<usize>,
    k_lindblad: f64,
    gns: OnceLock<GnsSpectrum>,
}

fn heisenberg_map(modes: &[JumpMode], f: &CMat) -> CMat {
    let d = f.nrows();
    let mut out = CMat::zeros(d, d);
    for m in modes {
        let ld = m.l.adjoint();
        let a = (-0.5 * m.omega).exp();
        let b = (0.5 * m.omega).exp();
        out += (&ld * commutator(f, &m.l)).scale(m.c * a) + (commutator(&m.l, f) * &ld).scale(m.c * b);
    }
    out
}

fn schrodinger_map(modes: &[JumpMode], rho: &CMat) -> CMat {
    let d = rho.nrows();
    let mut out = CMat::zeros(d, d);
    for m in modes {
        let ld = m.l.adjoint();
        let a = (0.5 * m.omega).exp();
        let b = (-0.5 * m.omega).exp();
        out += commutator(&(&ld * rho), &m.l).scale(m.c * a) + commutator(&m.l, &(rho * &ld)).scale(m.c * b);
    }
    out
}

/// Index of the mode closest to `L_j^*`, with its closure residual.
fn adjoint_partner(modes: &[JumpMode], j: usize) -> (usize, f64) {
    let d = modes[j].l.nrows() as f64;
    let target = modes[j].l.adjoint();
    let mut best = (j, f64::INFINITY);
    for (k, m) in modes.iter().enumerate() {
        let dist = frobenius(&(&m.l - &target)) / d.sqrt();
        let res = dist
            .max((m.c - modes[j].c).abs() / modes[j].c)
            .max((m.omega + modes[j].omega).abs());
        if res < best.1 {
            best = (k, res);
        }
    }
    best
}

fn gns_symmetrised(sigma: &DensityMatrix, modes: &[JumpMode]) -> GnsSpectrum {
    let d = sigma.dim();
    let s = sigma.spectrum();
    let sqrt_sigma = s.map(f64::sqrt).expect("faithful state has a square root");
    let inv_sqrt_sigma = s.map(|v| 1.0 / v.sqrt()).expect("faithful state is invertible");
    let sup = Superoperator::from_map(d, |y| heisenberg_map(modes, &(y * &inv_sqrt_sigma)) * &sqrt_sigma);
    let herm = hermitian_part(sup.matrix());
    let eig = SymmetricEigen::new(herm);
    let n = d * d;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    GnsSpectrum {
        values,
        vectors,
        sqrt_sigma,
        inv_sqrt_sigma,
    }
}

fn kernel_dimension_of(values: &[f64]) -> usize {
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    values.iter().filter(|v| v.abs() <= tol::KERNEL * scale).count()
}

/// Matrix of `-div o grad` in the traceless basis.
pub(crate) fn dirichlet_matrix(modes: &[JumpMode], basis: &TracelessBasis) -> DMatrix<f64> {
    let n = basis.len();
    let grads: Vec<Vec<CMat>> = basis
        .elements()
        .iter()
        .map(|b| modes.iter().map(|m| commutator(&m.l, b)).collect())
        .collect();
    DMatrix::from_fn(n, n, |a, b| {
        modes
            .iter()
            .enumerate()
            .map(|(j, m)| m.c * hs_inner(&grads[a][j], &grads[b][j]).re)
            .sum()
    })
}

fn compute_k_lindblad(modes: &[JumpMode], d: usize) -> f64 {
    let basis = TracelessBasis::new(d);
    let p = dirichlet_matrix(modes, &basis);
    let p = (&p + p.transpose()) * 0.5;
    let mu_min = SymmetricEigen::new(p)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v));
    let factor = modes
        .iter()
        .map(|m| {
            if m.omega.abs() < 1e-12 {
                1.0
            } else {
                m.omega / (2.0 * (0.5 * m.omega).sinh())
            }
        })
        .fold(0.0_f64, f64::max);
    if mu_min <= 1e-12 {
        f64::INFINITY
    } else {
        factor / mu_min
    }
}

impl DetailedBalanceGenerator {
    /// Validates the mode form and every generator invariant.
    pub fn new(sigma: DensityMatrix, modes: Vec<JumpMode>) -> Result<Self> {
        let diag = Self::diagnose(&sigma, &modes)?;
        if let Some(fail) = diag.first_failure() {
            return Err(QmsError::InvariantViolation {
                condition: fail.name.to_string(),
                residual: fail.residual,
                tolerance: fail.tolerance,
            });
        }
        let adjoint = (0..modes.len()).map(|j| adjoint_partner(&modes, j).0).collect();
        let k_lindblad = compute_k_lindblad(&modes, sigma.dim());
        Ok(Self {
            sigma,
            modes,
            adjoint,
            k_lindblad,
            gns: OnceLock::new(),
        })
    }

    /// Computes every invariant residual without rejecting the input.
    pub fn diagnose(sigma: &DensityMatrix, modes: &[JumpMode]) -> Result<GeneratorDiagnostics> {
        sigma.require_faithful()?;
        let d = sigma.dim();
        if modes.is_empty() {
            return Err(QmsError::DegenerateGenerator);
        }
        for (j, m) in modes.iter().enumerate() {
            if m.l.nrows() != d || m.l.ncols() != d {
                return Err(QmsError::InvalidInput(format!("mode {j} has wrong dimension")));
            }
            if !(m.c > 0.0) || !m.c.is_finite() || !m.omega.is_finite() {
                return Err(QmsError::InvalidInput(format!(
                    "mode {j} needs a positive weight and finite frequency"
                )));
            }
        }
        let df = d as f64;

        let mut normalization = 0.0_f64;
        for (j, a) in modes.iter().enumerate() {
            for (k, b) in modes.iter().enumerate() {
                let target = if j == k { 1.0 } else { 0.0 };
                let g = hs_inner(&a.l, &b.l) / df;
                normalization = normalization.max((g - C64::new(target, 0.0)).norm());
            }
        }

        let traceless = modes.iter().map(|m| m.l.trace().norm()).fold(0.0, f64::max);

        let closure = (0..modes.len())
            .map(|j| adjoint_partner(modes, j).1)
            .fold(0.0, f64::max);

        let s = sigma.spectrum();
        let inv = s.map(|v| 1.0 / v).expect("faithful");
        let modular = modes
            .iter()
            .map(|m| {
                let lhs = sigma.matrix() * &m.l * &inv;
                let rhs = m.l.scale((-m.omega).exp());
                frobenius(&(lhs - &rhs)) / frobenius(&rhs).max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max);

        let weight_scale: f64 = modes.iter().map(|m| m.c * (0.5 * m.omega.abs()).exp()).sum::<f64>() * df;
        let unitality = frobenius(&heisenberg_map(modes, &CMat::identity(d, d))) / weight_scale;

        let heis = Superoperator::from_map(d, |x| heisenberg_map(modes, x));
        let gram = kron(&sigma.matrix().transpose(), &CMat::identity(d, d));
        let m = heis.matrix();
        let detailed_balance = frobenius(&(m.adjoint() * &gram - &gram * m)) / frobenius(m).max(f64::MIN_POSITIVE);

        let invariance = frobenius(&schrodinger_map(modes, sigma.matrix())) / weight_scale;

        let check = |name, residual: f64, tolerance| InvariantCheck {
            name,
            residual,
            tolerance,
            pass: residual <= tolerance,
        };
        let checks = vec![
            check("condition 1 (orthonormal modes)", normalization, tol::NORMALIZATION),
            check("condition 2 (traceless modes)", traceless, tol::TRACELESS),
            check(
                "condition 3 (adjoint closure, matched c and -omega)",
                closure,
                tol::ADJOINT_CLOSURE,
            ),
            check("condition 4 (modular eigenvectors)", modular, tol::MODULAR),
            check("unitality L(I) = 0", unitality, tol::UNITALITY),
            check("detailed balance", detailed_balance, tol::DETAILED_BALANCE),
            check("invariance L_*(sigma) = 0", invariance, tol::INVARIANCE),
        ];
        let kernel_dim = if checks.iter().all(|c| c.pass) {
            kernel_dimension_of(&gns_symmetrised(sigma, modes).values)
        } else {
            0
        };
        Ok(GeneratorDiagnostics { checks, kernel_dim })
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn sigma(&self) -> &DensityMatrix {
        &self.sigma
    }

    pub fn modes(&self) -> &[JumpMode] {
        &self.modes
    }

    /// Index `j'` with `L_{j'} = L_j^*`.
    pub fn adjoint_index(&self, j: usize) -> usize {
        self.adjoint[j]
    }

    /// Constant bounding the inverse metric operator: `D(rho)^{-1} <= K / eps`
    /// whenever `rho >= eps I`. Infinite for non-primitive generators.
    pub fn k_lindblad(&self) -> f64 {
        self.k_lindblad
    }

    pub fn is_unital(&self) -> bool {
        self.sigma.is_maximally_mixed(1e-12)
    }

    /// The generator `a L` (all weights scaled by `a > 0`).
    pub fn scaled(&self, a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(QmsError::InvalidInput("scale factor must be positive".into()));
        }
        let modes = self
            .modes
            .iter()
            .map(|m| JumpMode::new(m.l.clone(), m.c * a, m.omega))
            .collect();
        Self::new(self.sigma.clone(), modes)
    }

    /// `L(X)` without dimension checks.
    pub fn heisenberg(&self, x: &CMat) -> CMat {
        heisenberg_map(&self.modes, x)
    }

    /// `L_*(rho)` without dimension checks.
    pub fn schrodinger(&self, rho: &CMat) -> CMat {
        schrodinger_map(&self.modes, rho)
    }

    pub fn lindblad_heisenberg(&self, x: &CMat) -> Result<CMat> {
        crate::operator::check_dim(x, self.dim(), "lindblad_heisenberg")?;
        Ok(self.heisenberg(x))
    }

    pub fn lindblad_schrodinger(&self, rho: &CMat) -> Result<CMat> {
        crate::operator::check_dim(rho, self.dim(), "lindblad_schrodinger")?;
        Ok(self.schrodinger(rho))
    }

    pub fn superoperator_of(&self, picture: Picture) -> Superoperator {
        match picture {
            Picture::Heisenberg => Superoperator::from_map(self.dim(), |x| self.heisenberg(x)),
            Picture::Schrodinger => Superoperator::from_map(self.dim(), |x| self.schrodinger(x)),
        }
    }

    pub fn gns_spectrum(&self) -> &GnsSpectrum {
        self.gns.get_or_init(|| gns_symmetrised(&self.sigma, &self.modes))
    }

    /// Dimension of `ker L` (the commutant of the jump operators).
    pub fn kernel_dimension(&self) -> usize {
        kernel_dimension_of(&self.gns_spectrum().values)
    }

    pub fn is_primitive(&self) -> bool {
        self.kernel_dimension() == 1
    }

    pub fn require_primitive(&self) -> Result<()> {
        let k = self.kernel_dimension();
        if k == 1 {
            Ok(())
        } else {
            Err(QmsError::NotPrimitive { kernel_dim: k })
        }
    }

    /// `exp(t L_*)(X)` for any real `t` and any matrix `X`.
    pub fn propagate(&self, x: &CMat, t: f64) -> CMat {
        let g = self.gns_spectrum();
        g.exp_apply(t, &(x * &g.inv_sqrt_sigma)) * &g.sqrt_sigma
    }

    /// Heisenberg evolution `Lambda_t(X) = exp(t L)(X)`.
    pub fn heisenberg_evolve(&self, x: &CMat, t: f64) -> Result<CMat> {
        if t < 0.0 {
            return Err(QmsError::InvalidInput(format!("time must be non-negative, got {t}")));
        }
        crate::operator::check_dim(x, self.dim(), "heisenberg_evolve")?;
        let g = self.gns_spectrum();
        Ok(g.exp_apply(t, &(x * &g.sqrt_sigma)) * &g.inv_sqrt_sigma)
    }

    /// Schrodinger evolution `rho_t = exp(t L_*)(rho)`.
    pub fn evolve(&self, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if t < 0.0 || !t.is_finite() {
            return Err(QmsError::InvalidInput(format!("time must be non-negative, got {t}")));
        }
        crate::operator::check_dim(rho.matrix(), self.dim(), "evolve")?;
        if t == 0.0 {
            return Ok(rho.clone());
        }
        DensityMatrix::from_numerical(&self.propagate(rho.matrix(), t))
    }

    /// Coordinates of `L_j` for JSON export.
    pub fn to_file(&self) -> GeneratorFile {
        GeneratorFile::from_generator(self)
    }
}

/// `Tr(sigma X^* Y)`.
pub fn gns_inner(sigma: &CMat, x: &CMat, y: &CMat) -> C64 {
    (sigma * x.adjoint() * y).trace()
}

pub(crate) fn real_eigen_sorted(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

#[cfg(test)]
mod tests;
