//! Relative entropy, entropy production and the quadratic functionals of
//! the generator.

use serde::Serialize;

use crate::generator::DetailedBalanceGenerator;
use crate::operator::{check_dim, CMat, DensityMatrix, C64};
use crate::transport::{solve_continuity, tangent_norm};
use crate::{QmsError, Result};

/// Eigenvalues below this count as outside the support.
const SUPPORT_TOL: f64 = 1e-12;

/// Relative entropy with a flag for support violations.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RelativeEntropy {
    pub value: f64,
    /// `false` when `supp(rho)` is not contained in `supp(sigma)`; the value
    /// is then `0` by convention.
    pub support_ok: bool,
}

fn entropy_part(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum()
}

/// `D(rho || sigma) = Tr rho (log rho - log sigma)`.
pub fn relative_entropy_checked(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<RelativeEntropy> {
    check_dim(rho.matrix(), sigma.dim(), "relative_entropy")?;
    let s = sigma.spectrum();
    let rt = s.to_frame(rho.matrix());
    let mut cross = 0.0;
    for (k, &mu) in s.values.iter().enumerate() {
        let weight = rt[(k, k)].re;
        if mu <= SUPPORT_TOL {
            if weight > SUPPORT_TOL {
                return Ok(RelativeEntropy {
                    value: 0.0,
                    support_ok: false,
                });
            }
            continue;
        }
        cross += weight * mu.ln();
    }
    Ok(RelativeEntropy {
        value: (entropy_part(rho) - cross).max(0.0),
        support_ok: true,
    })
}

pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    relative_entropy_checked(rho, sigma)
        .map(|r| r.value)
        .unwrap_or(f64::NAN)
}

/// `D(rho || sigma)` relative to the generator's invariant state.
pub fn entropy_to_sigma(gen: &DetailedBalanceGenerator, rho: &DensityMatrix) -> f64 {
    relative_entropy(rho, gen.sigma())
}

/// Entropy production `I(rho) = -Tr(L_*(rho)(log rho - log sigma))`,
/// infinite for non-faithful `rho`.
pub fn fisher_information(gen: &DetailedBalanceGenerator, rho: &DensityMatrix) -> f64 {
    if !rho.is_faithful() || rho.dim() != gen.dim() {
        return f64::INFINITY;
    }
    let log_rho = rho.log().expect("faithful");
    let log_sigma = gen.sigma().log().expect("generator state is faithful");
    let drift = gen.schrodinger(rho.matrix());
    -(drift * (log_rho - log_sigma)).trace().re
}

/// `-Tr(sigma f^* L(f))`.
pub fn dirichlet_form(gen: &DetailedBalanceGenerator, f: &CMat) -> Result<f64> {
    check_dim(f, gen.dim(), "dirichlet_form")?;
    Ok(-(gen.sigma().matrix() * f.adjoint() * gen.heisenberg(f)).trace().re)
}

/// `Tr(sigma f^2) - Tr(sigma f)^2` for Hermitian `f` (with `f^* f` in
/// general).
pub fn variance(sigma: &DensityMatrix, f: &CMat) -> Result<f64> {
    check_dim(f, sigma.dim(), "variance")?;
    let s = sigma.matrix();
    let second = (s * f.adjoint() * f).trace().re;
    let mean = (s * f).trace();
    Ok(second - mean.norm_sqr())
}

/// Smallest non-zero eigenvalue of `-L` with a normalised minimiser.
#[derive(Clone, Debug)]
pub struct SpectralGap {
    pub value: f64,
    /// Hermitian, `Tr(sigma f) = 0`, `Tr(sigma f^2) = 1`.
    pub minimizer: CMat,
}

/// Optimal Poincare constant, from the GNS-symmetrised generator.
pub fn spectral_gap(gen: &DetailedBalanceGenerator) -> Result<SpectralGap> {
    gen.require_primitive()?;
    let g = gen.gns_spectrum();
    let n = g.values.len();
    let k = n - 2;
    let value = -g.values[k];
    let e = g.heisenberg_eigenvector(k);
    let herm = (&e + e.adjoint()) * C64::new(0.5, 0.0);
    let anti = (&e - e.adjoint()) * C64::new(0.0, -0.5);
    let mut f = if herm.norm() >= anti.norm() { herm } else { anti };
    let sigma = gen.sigma();
    let mean = (sigma.matrix() * &f).trace();
    for i in 0..gen.dim() {
        f[(i, i)] -= mean;
    }
    let var = variance(sigma, &f)?;
    if !(var > 0.0) {
        return Err(QmsError::InternalError("gap eigenvector has zero variance".into()));
    }
    Ok(SpectralGap {
        value,
        minimizer: f * C64::new(1.0 / var.sqrt(), 0.0),
    })
}

/// Residuals of the gradient-flow identity at `rho`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GradientFlowResidual {
    pub fisher: f64,
    /// `|d/dt D(rho_t || sigma) + I(rho)|` at `t = 0`.
    pub derivative: f64,
    /// `|I(rho) - ||L_* rho||_g^2|` with the metric norm of the velocity.
    pub metric: f64,
}

/// Finite-difference step for entropy derivatives along the semigroup.
pub const FD_STEP: f64 = 1e-4;

/// `D(exp(t L_*) rho || sigma)` for small `t` of either sign.
fn entropy_along_flow(gen: &DetailedBalanceGenerator, rho: &DensityMatrix, t: f64) -> Result<f64> {
    let m = gen.propagate(rho.matrix(), t);
    Ok(relative_entropy(&DensityMatrix::from_numerical(&m)?, gen.sigma()))
}

/// Checks `d/dt D(rho_t || sigma) = -I(rho) = -||L_* rho||^2_g`, the first by
/// Richardson-extrapolated central differences.
pub fn gradient_flow_residual(gen: &DetailedBalanceGenerator, rho: &DensityMatrix) -> Result<GradientFlowResidual> {
    rho.require_faithful()?;
    let fisher = fisher_information(gen, rho);
    let central = |h: f64| -> Result<f64> {
        Ok((entropy_along_flow(gen, rho, h)? - entropy_along_flow(gen, rho, -h)?) / (2.0 * h))
    };
    let d1 = central(FD_STEP)?;
    let d2 = central(0.5 * FD_STEP)?;
    let derivative = (4.0 * d2 - d1) / 3.0;
    let drift = gen.schrodinger(rho.matrix());
    let metric_sq = if drift.norm() == 0.0 {
        0.0
    } else {
        let field = solve_continuity(gen, rho, &crate::operator::hermitian_part(&drift))?;
        tangent_norm(gen, rho, &field.potential)?.powi(2)
    };
    Ok(GradientFlowResidual {
        fisher,
        derivative: (derivative + fisher).abs(),
        metric: (fisher - metric_sq).abs(),
    })
}

/// One sampled state with its entropy and entropy production.
#[derive(Clone, Debug)]
pub struct EntropicSample {
    pub rho: DensityMatrix,
    pub d_rel: f64,
    pub fisher: f64,
}

impl EntropicSample {
    pub fn new(gen: &DetailedBalanceGenerator, rho: DensityMatrix) -> Self {
        let d_rel = entropy_to_sigma(gen, &rho);
        let fisher = fisher_information(gen, &rho);
        Self { rho, d_rel, fisher }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{depolarizing, thermal_qubit};
    use crate::operator::{c64, random_density, random_hermitian, seeded_rng};

    #[test]
    fn relative_entropy_basics() {
        let rho = random_density(3, 4, 0.01).unwrap();
        assert!(relative_entropy(&rho, &rho).abs() < 1e-12);
        let pure = DensityMatrix::basis_state(2, 0).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((relative_entropy(&pure, &mixed) - 2f64.ln()).abs() < 1e-14);
        let r = relative_entropy_checked(&mixed, &pure).unwrap();
        assert!(!r.support_ok && r.value == 0.0);
    }

    #[test]
    fn commuting_pair_is_classical_kl() {
        let p: [f64; 3] = [0.2, 0.5, 0.3];
        let q = [0.4, 0.4, 0.2];
        let kl: f64 = p.iter().zip(&q).map(|(a, b)| a * (a / b).ln()).sum();
        let d = relative_entropy(
            &DensityMatrix::diagonal(&p).unwrap(),
            &DensityMatrix::diagonal(&q).unwrap(),
        );
        assert!((d - kl).abs() < 1e-12);
    }

    #[test]
    fn fisher_information_branches() {
        let g = thermal_qubit(0.7).unwrap();
        assert!(fisher_information(&g, g.sigma()).abs() < 1e-12);
        assert!(fisher_information(&g, &DensityMatrix::basis_state(2, 1).unwrap()).is_infinite());
        for seed in 0..20 {
            let rho = random_density(2, seed, 1e-3).unwrap();
            assert!(fisher_information(&g, &rho) >= -1e-9);
        }
    }

    #[test]
    fn variance_and_dirichlet() {
        let sigma = DensityMatrix::maximally_mixed(2);
        let z = CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)]);
        assert!((variance(&sigma, &z).unwrap() - 1.0).abs() < 1e-15);
        assert!(variance(&sigma, &CMat::identity(2, 2)).unwrap().abs() < 1e-15);
        let g = depolarizing(2).unwrap();
        assert!(dirichlet_form(&g, &CMat::identity(2, 2)).unwrap().abs() < 1e-15);
        let mut rng = seeded_rng(6);
        let f = random_hermitian(2, &mut rng);
        assert!(dirichlet_form(&g, &f).unwrap() >= -1e-12);
    }

    #[test]
    fn gap_minimizer_attains_ratio() {
        for g in [
            depolarizing(2).unwrap(),
            thermal_qubit(1.2).unwrap(),
            depolarizing(3).unwrap(),
        ] {
            let gap = spectral_gap(&g).unwrap();
            let f = &gap.minimizer;
            assert!((variance(g.sigma(), f).unwrap() - 1.0).abs() < 1e-12);
            assert!((dirichlet_form(&g, f).unwrap() - gap.value).abs() < 1e-10);
        }
        assert!((spectral_gap(&depolarizing(2).unwrap()).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_flow_identity_qubit() {
        let g = thermal_qubit(0.9).unwrap();
        for seed in 0..5 {
            let rho = random_density(2, seed, 0.05).unwrap();
            let r = gradient_flow_residual(&g, &rho).unwrap();
            assert!(r.derivative <= 1e-5 * r.fisher, "{r:?}");
            assert!(r.metric <= 1e-5 * r.fisher, "{r:?}");
        }
        let r = gradient_flow_residual(&g, g.sigma()).unwrap();
        assert!(r.derivative < 1e-9 && r.metric < 1e-9);
    }
}
