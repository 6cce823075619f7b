use serde::Serialize;

use crate::entropic::entropy_to_sigma;
use crate::generator::DetailedBalanceGenerator;
use crate::operator::{CMat, DensityMatrix};
use crate::transport::{metric_inner, w2_distance, DiscretePath, W2Options};
use crate::Result;

fn norm_sq(gen: &DetailedBalanceGenerator, rho: &DensityMatrix, u: &CMat) -> Result<f64> {
    metric_inner(gen, rho, u, u)
}

/// Worst relative violation of `||grad P_t U||^2_rho <= e^{-2 kappa t}
/// ||grad U||^2_{rho_t}` over `t_grid`.
pub fn gradient_estimate_check(
    gen: &DetailedBalanceGenerator,
    kappa: f64,
    rho: &DensityMatrix,
    u: &CMat,
    t_grid: &[f64],
) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for &t in t_grid {
        let pu = gen.heisenberg_evolve(u, t)?;
        let lhs = norm_sq(gen, rho, &pu)?;
        let rho_t = gen.evolve(rho, t)?;
        let rhs = norm_sq(gen, &rho_t, u)?;
        let r = if rhs > 0.0 {
            (lhs - (-2.0 * kappa * t).exp() * rhs) / rhs
        } else {
            lhs
        };
        worst = worst.max(r);
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReversePoincare {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `Tr(rho_t U^2) - Tr(rho (P_t U)^2) >= (e^{2 kappa t} - 1)/(2 kappa)
/// ||grad P_t U||^2_rho`.
pub fn reverse_poincare_check(
    gen: &DetailedBalanceGenerator,
    kappa: f64,
    rho: &DensityMatrix,
    u: &CMat,
    t: f64,
) -> Result<ReversePoincare> {
    let pu = gen.heisenberg_evolve(u, t)?;
    let rho_t = gen.evolve(rho, t)?;
    let lhs = (rho_t.matrix() * u * u).trace().re - (rho.matrix() * &pu * &pu).trace().re;
    let factor = if (kappa * t).abs() < 1e-12 {
        t
    } else {
        ((2.0 * kappa * t).exp() - 1.0) / (2.0 * kappa)
    };
    let rhs = factor * norm_sq(gen, rho, &pu)?;
    Ok(ReversePoincare {
        lhs,
        rhs,
        ok: lhs >= rhs * (1.0 - 1e-6) - 1e-14,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EviOutcome {
    /// `1/2 d/dt W^2 + kappa/2 W^2 - (D(omega) - D(rho))`; non-positive when
    /// the inequality holds.
    pub residual: f64,
    pub tolerance: f64,
    pub ok: bool,
}

/// Evolution variational inequality at `t = 0+` by a forward difference.
pub fn evi_check(
    gen: &DetailedBalanceGenerator,
    kappa: f64,
    rho: &DensityMatrix,
    omega: &DensityMatrix,
    h: f64,
    opts: &W2Options,
) -> Result<EviOutcome> {
    rho.require_faithful()?;
    omega.require_faithful()?;
    let w0 = w2_distance(gen, rho, omega, opts)?.value;
    let rho_h = gen.evolve(rho, h)?;
    let wh = w2_distance(gen, &rho_h, omega, opts)?.value;
    let derivative = (wh * wh - w0 * w0) / (2.0 * h);
    let residual = derivative + 0.5 * kappa * w0 * w0 - (entropy_to_sigma(gen, omega) - entropy_to_sigma(gen, rho));
    let tolerance = 5.0 * opts.tol / h;
    Ok(EviOutcome {
        residual,
        tolerance,
        ok: residual <= tolerance,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvexityOutcome {
    /// Largest `D(gamma(s)) - [(1-s) D0 + s D1 - kappa/2 s(1-s) W^2]`.
    pub worst: f64,
    pub at: f64,
}

/// Displacement convexity of the relative entropy along a discrete path,
/// with `W` the path length.
pub fn displacement_convexity_check(
    gen: &DetailedBalanceGenerator,
    kappa: f64,
    path: &DiscretePath,
) -> Result<ConvexityOutcome> {
    let speeds = path.segment_speeds(gen)?;
    let n = speeds.len();
    let w = speeds.iter().sum::<f64>() / n as f64;
    let d0 = entropy_to_sigma(gen, &path.states[0]);
    let d1 = entropy_to_sigma(gen, &path.states[n]);
    let mut out = ConvexityOutcome {
        worst: f64::NEG_INFINITY,
        at: 0.0,
    };
    for (s, state) in path.grid.iter().zip(&path.states) {
        let rhs = (1.0 - s) * d0 + s * d1 - 0.5 * kappa * s * (1.0 - s) * w * w;
        let v = entropy_to_sigma(gen, state) - rhs;
        if v > out.worst {
            out = ConvexityOutcome { worst: v, at: *s };
        }
    }
    Ok(out)
}
