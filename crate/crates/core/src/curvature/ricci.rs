use nalgebra::DVector;
use serde::Serialize;

use super::b_value_frame;
use crate::generator::{to_rows, DetailedBalanceGenerator, MatrixRows};
use crate::operator::{
    hermitian_part, random_density_with, random_traceless_hermitian, seeded_rng, traceless_part, CMat, DensityMatrix,
    TracelessBasis,
};
use crate::optim::{lbfgs, numerical_gradient, LbfgsOptions};
use crate::transport::RhoFrame;
use crate::{ConvergenceWarning, QmsError, Result};

/// One evaluated pair `(rho, U)` of the curvature ratio.
#[derive(Clone, Debug)]
pub struct HessianSample {
    pub rho: DensityMatrix,
    pub u: CMat,
    pub b_value: f64,
    pub norm_sq: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HessianSampleFile {
    pub rho: MatrixRows,
    pub u: MatrixRows,
    pub b_value: f64,
    pub norm_sq: f64,
    pub ratio: f64,
    pub min_eigenvalue: f64,
}

impl HessianSample {
    pub fn to_file(&self) -> HessianSampleFile {
        HessianSampleFile {
            rho: to_rows(self.rho.matrix()),
            u: to_rows(&self.u),
            b_value: self.b_value,
            norm_sq: self.norm_sq,
            ratio: self.ratio,
            min_eigenvalue: self.rho.min_eigenvalue(),
        }
    }
}

fn sample(gen: &DetailedBalanceGenerator, rho: &DensityMatrix, u: &CMat) -> Result<HessianSample> {
    let frame = RhoFrame::new(gen, rho)?;
    let uf = frame.to_frame(u);
    let g = frame.grad(&uf);
    let norm_sq = frame.field_inner(&g, &g);
    let scale = u.norm().powi(2) * gen.modes().iter().map(|m| m.c).sum::<f64>();
    if !(norm_sq > 1e-14 * scale) || norm_sq == 0.0 {
        return Err(QmsError::InvalidInput("potential has zero gradient".into()));
    }
    let b_value = b_value_frame(&frame, rho, u);
    Ok(HessianSample {
        rho: rho.clone(),
        u: u.clone(),
        b_value,
        norm_sq,
        ratio: b_value / norm_sq,
    })
}

/// `B(rho, U) / ||grad U||^2_rho`; any value is an upper bound on the best
/// lower Ricci bound.
pub fn ricci_ratio(gen: &DetailedBalanceGenerator, rho: &DensityMatrix, u: &CMat) -> Result<f64> {
    super::check_potential(u, gen.dim())?;
    Ok(sample(gen, rho, &traceless_part(u))?.ratio)
}

#[derive(Clone, Debug)]
pub struct RicciOptions {
    pub n_starts: usize,
    pub max_iter: usize,
    /// States with smaller eigenvalues are outside the search domain.
    pub floor: f64,
    pub fd_step: f64,
}

impl Default for RicciOptions {
    fn default() -> Self {
        Self {
            n_starts: 12,
            max_iter: 150,
            floor: 1e-6,
            fd_step: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RicciEstimate {
    /// Smallest ratio found: an upper bound on the optimal constant.
    pub kappa_hat: f64,
    pub witness: HessianSample,
    /// Gradient norm of the ratio at the witness in chart coordinates.
    pub stationarity: f64,
    pub starts: usize,
    pub warning: Option<ConvergenceWarning>,
}

struct Chart<'g> {
    gen: &'g DetailedBalanceGenerator,
    basis: TracelessBasis,
    floor: f64,
}

impl Chart<'_> {
    fn n(&self) -> usize {
        self.basis.len()
    }

    /// `rho = exp(H(y)) / Tr`, `U = U(u)`.
    fn decode(&self, z: &DVector<f64>) -> Option<(DensityMatrix, CMat)> {
        let n = self.n();
        let h = self.basis.from_coords(&z.as_slice()[..n]);
        let e = crate::operator::matrix_function(&hermitian_part(&h), f64::exp).ok()?;
        let rho = DensityMatrix::from_numerical(&e).ok()?;
        if rho.min_eigenvalue() < self.floor {
            return None;
        }
        Some((rho, self.basis.from_coords(&z.as_slice()[n..])))
    }

    fn ratio(&self, z: &DVector<f64>) -> Option<f64> {
        let (rho, u) = self.decode(z)?;
        sample(self.gen, &rho, &u).ok().map(|s| s.ratio)
    }

    fn encode(&self, rho: &DensityMatrix, u: &CMat) -> DVector<f64> {
        let log = rho.log().expect("start states are faithful");
        let mut z = DVector::zeros(2 * self.n());
        z.rows_mut(0, self.n()).copy_from(&self.basis.coords(&log));
        let uc = self.basis.coords(u);
        let norm = uc.norm();
        z.rows_mut(self.n(), self.n()).copy_from(&(uc / norm));
        z
    }
}

struct StartOutcome {
    z: DVector<f64>,
    value: f64,
    grad_norm: f64,
    converged: bool,
}

fn run_start(chart: &Chart<'_>, z0: DVector<f64>, opts: &RicciOptions) -> Option<StartOutcome> {
    let h = opts.fd_step;
    let fg = |z: &DVector<f64>| {
        let f = chart.ratio(z)?;
        let g = numerical_gradient(z, h, |p| chart.ratio(p))?;
        Some((f, g))
    };
    let lopts = LbfgsOptions {
        max_iter: opts.max_iter,
        memory: 8,
        rel_tol: 1e-12,
        grad_tol: 1e-9,
        max_backtracks: 40,
    };
    let m = lbfgs(z0, fg, &lopts)?;
    Some(StartOutcome {
        grad_norm: m.grad.norm(),
        converged: m.converged,
        z: m.x,
        value: m.value,
    })
}

/// Multi-start minimisation of the curvature ratio over faithful states and
/// potentials. Start `k` uses the seed `seed + k`; start `0` sits at sigma.
pub fn estimate_ricci_lower_bound(
    gen: &DetailedBalanceGenerator,
    seed: u64,
    opts: &RicciOptions,
) -> Result<RicciEstimate> {
    gen.require_primitive()?;
    if opts.n_starts == 0 {
        return Err(QmsError::InvalidInput("need at least one start".into()));
    }
    let d = gen.dim();
    let chart = Chart {
        gen,
        basis: TracelessBasis::new(d),
        floor: opts.floor,
    };
    let start = |k: usize| -> Option<StartOutcome> {
        let mut rng = seeded_rng(seed.wrapping_add(k as u64));
        let rho = if k == 0 {
            gen.sigma().clone()
        } else {
            random_density_with(d, 0.02 / d as f64, &mut rng).ok()?
        };
        let u = random_traceless_hermitian(d, &mut rng);
        run_start(&chart, chart.encode(&rho, &u), opts)
    };
    #[cfg(feature = "parallel")]
    let outcomes: Vec<Option<StartOutcome>> = {
        use rayon::prelude::*;
        (0..opts.n_starts).into_par_iter().map(start).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<Option<StartOutcome>> = (0..opts.n_starts).map(start).collect();

    let mut best: Option<StartOutcome> = None;
    let mut any_converged = false;
    for o in outcomes.into_iter().flatten() {
        any_converged |= o.converged;
        if best.as_ref().is_none_or(|b| o.value < b.value) {
            best = Some(o);
        }
    }
    let best = best.ok_or_else(|| QmsError::InternalError("no curvature start was feasible".into()))?;
    let (rho, u) = chart.decode(&best.z).expect("accepted iterate is feasible");
    let n_sq = u.norm();
    let witness = sample(gen, &rho, &(u / crate::operator::c64(n_sq, 0.0)))?;
    if witness.rho.min_eigenvalue() < 1e3 * opts.floor {
        log::info!(
            "curvature witness is close to the boundary (min eigenvalue {:.3e})",
            witness.rho.min_eigenvalue()
        );
    }
    let warning = (!any_converged).then(|| ConvergenceWarning {
        iterations: opts.max_iter,
        residual: best.grad_norm,
        message: "no curvature start met the stopping criterion".into(),
    });
    Ok(RicciEstimate {
        kappa_hat: best.value,
        witness,
        stationarity: best.grad_norm,
        starts: opts.n_starts,
        warning,
    })
}
