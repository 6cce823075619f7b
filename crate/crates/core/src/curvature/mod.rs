//! Second-order geometry of the relative entropy: the quadratic form
//! derivative `grad U ._rho grad U`, the Hessian `B(rho, U)`, geodesics and
//! lower Ricci bounds.

mod checks;
mod ricci;

pub use checks::{
    displacement_convexity_check, evi_check, gradient_estimate_check, reverse_poincare_check, ConvexityOutcome,
    EviOutcome, ReversePoincare,
};
pub use ricci::{
    estimate_ricci_lower_bound, ricci_ratio, HessianSample, HessianSampleFile, RicciEstimate, RicciOptions,
};

use nalgebra::DVector;
use serde::Serialize;

use crate::generator::DetailedBalanceGenerator;
use crate::operator::{
    check_dim, hermitian_part, hermiticity_defect, hs_inner, phi_divided_first, phi_divided_second, traceless_part,
    CMat, DensityMatrix, TracelessBasis, C64,
};
use crate::transport::RhoFrame;
use crate::{QmsError, Result};

fn check_potential(u: &CMat, d: usize) -> Result<()> {
    check_dim(u, d, "potential")?;
    if hermiticity_defect(u) > 1e-10 {
        return Err(QmsError::InvalidInput("potential must be Hermitian".into()));
    }
    Ok(())
}

pub(crate) fn quad_form_gradient_frame(frame: &RhoFrame<'_>, uf: &CMat) -> CMat {
    let lambda = &frame.spectrum.values;
    let d = lambda.len();
    let mut total = CMat::zeros(d, d);
    for (j, m) in frame.gen.modes().iter().enumerate() {
        let v = crate::operator::commutator(&frame.jumps[j], uf);
        let w = m.omega;
        let mut mt = CMat::zeros(d, d);
        for k in 0..d {
            for mm in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for l in 0..d {
                    let f1 = phi_divided_first(lambda[k], lambda[mm], lambda[l], w);
                    acc += v[(mm, l)] * v[(k, l)].conj() * f1;
                    let f2 = phi_divided_second(lambda[l], lambda[k], lambda[mm], w);
                    acc += v[(l, k)] * v[(l, mm)].conj() * f2;
                }
                mt[(mm, k)] += acc;
            }
        }
        total += mt.scale(m.c);
    }
    total
}

/// `M = grad U ._rho grad U`: the Hermitian traceless matrix with
/// `Tr(A M) = d/dt sum_j c_j <dU_j, [rho + tA]_{omega_j} dU_j>` at `t = 0`
/// for every traceless Hermitian `A`, by Daleckii-Krein divided differences.
pub fn quad_form_gradient(gen: &DetailedBalanceGenerator, rho: &DensityMatrix, u: &CMat) -> Result<CMat> {
    check_potential(u, gen.dim())?;
    let frame = RhoFrame::new(gen, rho)?;
    let mt = quad_form_gradient_frame(&frame, &frame.to_frame(u));
    Ok(traceless_part(&hermitian_part(&frame.from_frame(&mt))))
}

/// Entropy Hessian `B(rho, U) = 1/2 <M, L_* rho> - <grad L(U), grad U>_rho`.
pub fn b_value(gen: &DetailedBalanceGenerator, rho: &DensityMatrix, u: &CMat) -> Result<f64> {
    check_potential(u, gen.dim())?;
    let frame = RhoFrame::new(gen, rho)?;
    Ok(b_value_frame(&frame, rho, u))
}

pub(crate) fn b_value_frame(frame: &RhoFrame<'_>, rho: &DensityMatrix, u: &CMat) -> f64 {
    let gen = frame.gen;
    let uf = frame.to_frame(u);
    let mt = quad_form_gradient_frame(frame, &uf);
    let drift = frame.to_frame(&gen.schrodinger(rho.matrix()));
    let first = 0.5 * hs_inner(&mt, &drift).re;
    let lu = frame.to_frame(&gen.heisenberg(u));
    let second = frame.field_inner(&frame.grad(&lu), &frame.grad(&uf));
    first - second
}

/// One point `(gamma(s), U(s))` on a geodesic.
#[derive(Clone, Debug, Serialize)]
pub struct GeodesicState {
    pub s: f64,
    #[serde(skip)]
    pub gamma: DensityMatrix,
    #[serde(skip)]
    pub u: CMat,
}

/// Smallest eigenvalue tolerated along a geodesic.
pub const GEODESIC_FLOOR: f64 = 1e-7;

struct GeodesicRhs<'g> {
    gen: &'g DetailedBalanceGenerator,
    basis: TracelessBasis,
}

impl GeodesicRhs<'_> {
    fn state(&self, x: &DVector<f64>) -> Result<DensityMatrix> {
        let m = self.basis.state_from_coords(x.as_slice());
        let rho = DensityMatrix::from_numerical(&m)?;
        if rho.min_eigenvalue() < GEODESIC_FLOOR {
            return Err(QmsError::BoundaryHit {
                s: f64::NAN,
                min_eig: rho.min_eigenvalue(),
            });
        }
        Ok(rho)
    }

    /// `(gamma', U') = (-div([gamma] grad U), -M(gamma, U) / 2)`.
    fn eval(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let rho = self.state(x)?;
        let frame = RhoFrame::new(self.gen, &rho)?;
        let uf = frame.to_frame(&self.basis.from_coords(u.as_slice()));
        let dg = frame.from_frame(&frame.metric_apply(&uf));
        let m = frame.from_frame(&quad_form_gradient_frame(&frame, &uf));
        Ok((self.basis.coords(&dg), self.basis.coords(&m) * -0.5))
    }
}

/// Classical RK4 integration of the geodesic equations from `(rho0, U0)`.
/// Returns `steps + 1` states including the initial one.
pub fn integrate_geodesic(
    gen: &DetailedBalanceGenerator,
    rho0: &DensityMatrix,
    u0: &CMat,
    s_max: f64,
    steps: usize,
) -> Result<Vec<GeodesicState>> {
    check_potential(u0, gen.dim())?;
    rho0.require_faithful()?;
    if steps == 0 || !s_max.is_finite() {
        return Err(QmsError::InvalidInput(
            "geodesic needs steps >= 1 and finite s_max".into(),
        ));
    }
    let h = s_max / steps as f64;
    if h.abs() < 1e-14 && s_max != 0.0 {
        return Err(QmsError::IntegrationError("step size underflow".into()));
    }
    let rhs = GeodesicRhs {
        gen,
        basis: TracelessBasis::new(gen.dim()),
    };
    let mut x = rhs.basis.coords(rho0.matrix());
    let mut u = rhs.basis.coords(&traceless_part(u0));
    let mut out = Vec::with_capacity(steps + 1);
    out.push(GeodesicState {
        s: 0.0,
        gamma: rho0.clone(),
        u: rhs.basis.from_coords(u.as_slice()),
    });
    let tag = |e: QmsError, s: f64| match e {
        QmsError::BoundaryHit { min_eig, .. } => QmsError::BoundaryHit { s, min_eig },
        other => other,
    };
    for i in 0..steps {
        let s = i as f64 * h;
        let (k1x, k1u) = rhs.eval(&x, &u).map_err(|e| tag(e, s))?;
        let (k2x, k2u) = rhs
            .eval(&(&x + &k1x * (0.5 * h)), &(&u + &k1u * (0.5 * h)))
            .map_err(|e| tag(e, s + 0.5 * h))?;
        let (k3x, k3u) = rhs
            .eval(&(&x + &k2x * (0.5 * h)), &(&u + &k2u * (0.5 * h)))
            .map_err(|e| tag(e, s + 0.5 * h))?;
        let (k4x, k4u) = rhs
            .eval(&(&x + &k3x * h), &(&u + &k3u * h))
            .map_err(|e| tag(e, s + h))?;
        x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
        u += (k1u + k2u * 2.0 + k3u * 2.0 + k4u) * (h / 6.0);
        let gamma = rhs.state(&x).map_err(|e| tag(e, s + h))?;
        out.push(GeodesicState {
            s: s + h,
            gamma,
            u: rhs.basis.from_coords(u.as_slice()),
        });
    }
    Ok(out)
}
