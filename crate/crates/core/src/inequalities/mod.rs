//! Functional and transport inequalities: constant estimators, the
//! closed-form interpolation results and the diameter theorems.

mod suite;

pub use suite::{implication_suite, CheckRow, Constant, Constants, FunctionalReport, Seeds, SuiteOptions, Tolerances};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::entropic::{entropy_to_sigma, fisher_information, spectral_gap};
use crate::generator::DetailedBalanceGenerator;
use crate::operator::{
    hermitian_part, matrix_function, phi_unchecked, random_density_with, random_pure, seeded_rng, DensityMatrix,
    TracelessBasis,
};
use crate::optim::{lbfgs, numerical_gradient, LbfgsOptions};
use crate::transport::{metric_operator, w2_distance, W2Options};
use crate::{ConvergenceWarning, QmsError, Result};

/// Which side of the true constant an estimate lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Exact,
    UpperBound,
    LowerBound,
    /// A heuristic value with no one-sided guarantee.
    Estimate,
}

/// Relative entropies below this are treated as `rho = sigma`.
const MIN_ENTROPY: f64 = 1e-9;

pub const BATTERY_MIN_EIG: f64 = 1e-3;
pub const PURE_REGULARIZATION: f64 = 1e-3;

/// Test states: random faithful states followed by regularised pure states.
#[derive(Clone, Debug)]
pub struct Battery {
    pub seed: u64,
    pub n_random: usize,
    pub states: Vec<DensityMatrix>,
}

impl Battery {
    pub fn new(d: usize, n_random: usize, n_pure: usize, seed: u64) -> Result<Self> {
        let mut rng = seeded_rng(seed);
        let mut states = Vec::with_capacity(n_random + n_pure);
        for _ in 0..n_random {
            states.push(random_density_with(d, BATTERY_MIN_EIG, &mut rng)?);
        }
        for _ in 0..n_pure {
            states.push(random_pure(d, &mut rng).regularize(PURE_REGULARIZATION));
        }
        Ok(Self { seed, n_random, states })
    }

    /// 50 random states and 10 regularised pure states.
    pub fn standard(d: usize, seed: u64) -> Result<Self> {
        Self::new(d, 50, 10, seed)
    }

    pub fn random_states(&self) -> &[DensityMatrix] {
        &self.states[..self.n_random]
    }
}

/// A state with its entropy, entropy production and distance to sigma.
#[derive(Clone, Debug)]
pub struct TransportSample {
    pub rho: DensityMatrix,
    pub d_rel: f64,
    pub fisher: f64,
    pub w2: f64,
    pub stationarity: f64,
    pub warning: Option<ConvergenceWarning>,
}

/// Evaluates every state against the invariant state of `gen`.
pub fn transport_samples(
    gen: &DetailedBalanceGenerator,
    states: &[DensityMatrix],
    opts: &W2Options,
) -> Result<Vec<TransportSample>> {
    crate::par::map(states, |rho| {
        let w = w2_distance(gen, rho, gen.sigma(), opts)?;
        Ok(TransportSample {
            rho: rho.clone(),
            d_rel: entropy_to_sigma(gen, rho),
            fisher: fisher_information(gen, rho),
            w2: w.value,
            stationarity: w.stationarity,
            warning: w.warning,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug)]
pub struct MlsiOptions {
    /// Number of best samples refined by local descent.
    pub n_opt_starts: usize,
    pub max_iter: usize,
    pub floor: f64,
    pub fd_step: f64,
}

impl Default for MlsiOptions {
    fn default() -> Self {
        Self {
            n_opt_starts: 4,
            max_iter: 100,
            floor: 1e-6,
            fd_step: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MlsiEstimate {
    /// Smallest ratio `I / (2 D)` found: an upper bound on the optimal constant.
    pub alpha1_hat: f64,
    pub witness: DensityMatrix,
    /// Smallest ratio over the samples alone.
    pub sample_min: f64,
    pub evaluated: usize,
}

fn mlsi_ratio(gen: &DetailedBalanceGenerator, rho: &DensityMatrix) -> Option<f64> {
    let d = entropy_to_sigma(gen, rho);
    if !(d >= MIN_ENTROPY) {
        return None;
    }
    let i = fisher_information(gen, rho);
    i.is_finite().then(|| i / (2.0 * d))
}

fn chart_state(basis: &TracelessBasis, z: &DVector<f64>, floor: f64) -> Option<DensityMatrix> {
    let h = basis.from_coords(z.as_slice());
    let e = matrix_function(&hermitian_part(&h), f64::exp).ok()?;
    let rho = DensityMatrix::from_numerical(&e).ok()?;
    (rho.min_eigenvalue() >= floor).then_some(rho)
}

/// Minimum of `I(rho) / (2 D(rho || sigma))` over `states`, refined by local
/// descent in the log chart from the best few samples.
pub fn mlsi_constant_estimate(
    gen: &DetailedBalanceGenerator,
    states: &[DensityMatrix],
    opts: &MlsiOptions,
) -> Result<MlsiEstimate> {
    gen.require_primitive()?;
    let ratios = crate::par::map(states, |rho| mlsi_ratio(gen, rho));
    let mut ranked: Vec<(usize, f64)> = ratios
        .iter()
        .enumerate()
        .filter_map(|(k, r)| r.map(|v| (k, v)))
        .collect();
    if ranked.is_empty() {
        return Err(QmsError::InvalidInput(
            "no sample differs from the invariant state".into(),
        ));
    }
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let (k0, sample_min) = ranked[0];

    let basis = TracelessBasis::new(gen.dim());
    let lopts = LbfgsOptions {
        max_iter: opts.max_iter,
        memory: 8,
        rel_tol: 1e-12,
        grad_tol: 1e-9,
        max_backtracks: 40,
    };
    let starts: Vec<usize> = ranked.iter().take(opts.n_opt_starts).map(|r| r.0).collect();
    let refined = crate::par::map(&starts, |&k| {
        let f = |z: &DVector<f64>| mlsi_ratio(gen, &chart_state(&basis, z, opts.floor)?);
        let z0 = basis.coords(&states[k].log().ok()?);
        let m = lbfgs(
            z0,
            |z| {
                let v = f(z)?;
                Some((v, numerical_gradient(z, opts.fd_step, f)?))
            },
            &lopts,
        )?;
        Some((m.value, chart_state(&basis, &m.x, opts.floor)?))
    });

    let mut best = (sample_min, states[k0].clone());
    for (v, rho) in refined.into_iter().flatten() {
        if v < best.0 {
            best = (v, rho);
        }
    }
    Ok(MlsiEstimate {
        alpha1_hat: best.0,
        witness: best.1,
        sample_min,
        evaluated: states.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Tc2Estimate {
    /// Largest `W_2(rho, sigma)^2 / (2 D)`; conservative since each distance
    /// is an upper bound.
    pub c2_hat: f64,
    pub witness: Option<usize>,
}

pub fn tc2_constant_estimate(samples: &[TransportSample]) -> Tc2Estimate {
    let mut out = Tc2Estimate {
        c2_hat: 0.0,
        witness: None,
    };
    for (k, s) in samples.iter().enumerate() {
        if s.d_rel < MIN_ENTROPY {
            continue;
        }
        let r = s.w2 * s.w2 / (2.0 * s.d_rel);
        if out.witness.is_none() || r > out.c2_hat {
            out = Tc2Estimate {
                c2_hat: r,
                witness: Some(k),
            };
        }
    }
    out
}

/// Largest `W_2(rho, sigma) / sqrt(I(rho))` over the samples.
pub fn mlsi_tc2_constant_estimate(samples: &[TransportSample]) -> f64 {
    samples
        .iter()
        .filter(|s| s.fisher > 0.0 && s.fisher.is_finite())
        .map(|s| s.w2 / s.fisher.sqrt())
        .fold(0.0, f64::max)
}

/// Fraction of samples with `W_2(rho, sigma) <= c sqrt(I(rho)) (1 + tol)`.
pub fn mlsi_tc2_check(c: f64, samples: &[TransportSample], tol: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(QmsError::InvalidInput(format!("constant must be positive, got {c}")));
    }
    if samples.is_empty() {
        return Ok(1.0);
    }
    let ok = samples
        .iter()
        .filter(|s| s.w2 <= c * s.fisher.sqrt() * (1.0 + tol) + 1e-14)
        .count();
    Ok(ok as f64 / samples.len() as f64)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HwiOutcome {
    /// Largest `D - (W sqrt(I) - kappa W^2 / 2)` over the samples, scaled by
    /// `sqrt(I)`.
    pub worst: f64,
    /// The same with every distance shrunk by the factor `1 - tol`.
    pub worst_shrunk: f64,
    pub witness: Option<usize>,
    pub ok: bool,
}

/// `D(rho || sigma) <= W_2 sqrt(I) - kappa/2 W_2^2` on every sample.
pub fn hwi_check(kappa: f64, samples: &[TransportSample], tol: f64) -> Result<HwiOutcome> {
    let violation = |s: &TransportSample, w: f64| {
        let root = s.fisher.sqrt();
        let v = s.d_rel - (w * root - 0.5 * kappa * w * w);
        if root > 0.0 {
            v / root
        } else {
            v
        }
    };
    let mut out = HwiOutcome {
        worst: f64::NEG_INFINITY,
        worst_shrunk: f64::NEG_INFINITY,
        witness: None,
        ok: true,
    };
    for (k, s) in samples.iter().enumerate() {
        s.rho.require_faithful()?;
        let v = violation(s, s.w2);
        if v > out.worst {
            out.worst = v;
            out.witness = Some(k);
        }
        out.worst_shrunk = out.worst_shrunk.max(violation(s, s.w2 * (1.0 - tol)));
    }
    out.ok = samples.is_empty() || out.worst <= 5.0 * tol;
    Ok(out)
}

/// Limits of the constant ratios as `rho -> sigma`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LocalConstants {
    /// Infimum of `I / (2D)` over directions at sigma.
    pub alpha1: f64,
    /// Supremum of `W_2^2 / (2D)` over directions at sigma.
    pub c2: f64,
    /// Supremum of `W_2 / sqrt(I)` over directions at sigma.
    pub c: f64,
}

/// Extreme eigenvalues of the pencil `(p, q)` with `q` positive definite.
fn pencil_extremes(p: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<(f64, f64)> {
    let l = q
        .clone()
        .cholesky()
        .ok_or_else(|| QmsError::InternalError("quadratic form is not positive definite".into()))?
        .l();
    let li = l
        .try_inverse()
        .ok_or_else(|| QmsError::InternalError("singular Cholesky factor".into()))?;
    let c = &li * p * li.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let ev = c.symmetric_eigenvalues();
    Ok((ev.min(), ev.max()))
}

/// Second-order expansions of `D`, `I` and `W_2^2` at sigma, compared
/// direction by direction.
pub fn local_constants(gen: &DetailedBalanceGenerator) -> Result<LocalConstants> {
    gen.require_primitive()?;
    let sigma = gen.sigma();
    let op = metric_operator(gen, sigma)?;
    let basis = op.basis();
    let n = basis.len();
    let a = op
        .matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| QmsError::InternalError("metric operator is singular".into()))?;
    let spec = sigma.spectrum();
    let frames: Vec<_> = basis.elements().iter().map(|e| spec.to_frame(e)).collect();
    let lam = &spec.values;
    let hd = DMatrix::from_fn(n, n, |i, j| {
        let (x, y) = (&frames[i], &frames[j]);
        let mut acc = 0.0;
        for k in 0..lam.len() {
            for l in 0..lam.len() {
                acc += (x[(k, l)].conj() * y[(k, l)]).re / phi_unchecked(lam[k], lam[l], 0.0);
            }
        }
        acc
    });
    let mut drift = DMatrix::zeros(n, n);
    for (j, e) in basis.elements().iter().enumerate() {
        drift.set_column(j, &basis.coords(&gen.schrodinger(e)));
    }
    let hi = drift.transpose() * &a * &drift;
    let (alpha1, _) = pencil_extremes(&hi, &hd)?;
    let (_, c2) = pencil_extremes(&a, &hd)?;
    let (_, c_sq) = pencil_extremes(&a, &hi)?;
    Ok(LocalConstants {
        alpha1,
        c2,
        c: c_sq.sqrt(),
    })
}

/// MLSI constant from a curvature bound and a transport-cost constant:
/// `max[(1 + c2 kappa)^2 / (4 c2), kappa]`, valid for `1/c2 >= max(0, -kappa)`.
pub fn interpolation_alpha(kappa: f64, c2: f64) -> Result<f64> {
    if !(c2 > 0.0) || !kappa.is_finite() {
        return Err(QmsError::DomainError(format!(
            "need c2 > 0 and finite kappa, got c2 = {c2}"
        )));
    }
    if 1.0 / c2 < (-kappa).max(0.0) {
        return Err(QmsError::DomainError(format!(
            "1/c2 = {} is below max(0, -kappa) = {}",
            1.0 / c2,
            (-kappa).max(0.0)
        )));
    }
    Ok(((1.0 + c2 * kappa).powi(2) / (4.0 * c2)).max(kappa))
}

/// MLSI constant `1 / (c (2 - kappa c))` from a curvature bound and the
/// combined inequality, valid for `1/c >= max(kappa, 0)`.
pub fn mlsi_from_lst2(kappa: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) || !kappa.is_finite() {
        return Err(QmsError::DomainError(format!(
            "need c > 0 and finite kappa, got c = {c}"
        )));
    }
    if 1.0 / c < kappa.max(0.0) {
        return Err(QmsError::DomainError(format!(
            "1/c = {} is below max(kappa, 0) = {}",
            1.0 / c,
            kappa.max(0.0)
        )));
    }
    Ok(1.0 / (c * (2.0 - kappa * c)))
}

/// Poincare constant guaranteed by non-negative curvature and diameter `D`.
pub fn diameter_poincare_bound(diam: f64) -> f64 {
    1.0 / (2.0 * std::f64::consts::E * diam * diam)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DiameterPoincare {
    /// Bound from the estimated diameter; too large when the estimate is
    /// below the true diameter.
    pub bound: f64,
    pub lambda_hat: f64,
    pub ok: bool,
    pub certified_bound: Option<f64>,
    pub certified_ok: Option<bool>,
}

pub fn diameter_poincare_check(
    gen: &DetailedBalanceGenerator,
    kappa_hat: f64,
    diam_hat: f64,
    certified: Option<f64>,
    tol: f64,
) -> Result<DiameterPoincare> {
    if kappa_hat < -tol {
        return Err(QmsError::PreconditionNotMet(format!(
            "curvature estimate {kappa_hat} is negative"
        )));
    }
    if !(diam_hat > 0.0) {
        return Err(QmsError::InvalidInput(format!(
            "diameter must be positive, got {diam_hat}"
        )));
    }
    let lambda_hat = spectral_gap(gen)?.value;
    let bound = diameter_poincare_bound(diam_hat);
    let certified_bound = certified.map(diameter_poincare_bound);
    Ok(DiameterPoincare {
        bound,
        lambda_hat,
        ok: lambda_hat >= bound * (1.0 - 1e-6),
        certified_bound,
        certified_ok: certified_bound.map(|b| lambda_hat >= b * (1.0 - 1e-6)),
    })
}

pub const DIAMETER_MLSI_THRESHOLD: f64 = 0.01;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DiameterMlsi {
    /// `alpha1_hat * diam_hat^2`.
    pub product: f64,
    pub threshold: f64,
    pub ok: bool,
}

/// Trend check of `MLSI(c / D^2)` for unital generators with non-negative
/// curvature; the universal constant is unknown, so `threshold` stands in.
pub fn diameter_mlsi_check(
    gen: &DetailedBalanceGenerator,
    kappa_hat: f64,
    alpha1_hat: f64,
    diam_hat: f64,
    threshold: f64,
    tol: f64,
) -> Result<DiameterMlsi> {
    if !gen.is_unital() {
        return Err(QmsError::PreconditionNotMet("generator is not unital".into()));
    }
    if kappa_hat < -tol {
        return Err(QmsError::PreconditionNotMet(format!(
            "curvature estimate {kappa_hat} is negative"
        )));
    }
    let product = alpha1_hat * diam_hat * diam_hat;
    Ok(DiameterMlsi {
        product,
        threshold,
        ok: product >= threshold,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BonnetMyers {
    /// Largest `W^2 / ((4 / kappa)(D(rho) + D(omega))) - 1` over the pairs.
    pub worst: f64,
    pub ok: bool,
}

/// `W_2(rho, omega)^2 <= (4 / kappa)(D(rho || sigma) + D(omega || sigma))`
/// for pairs with known distances.
pub fn bonnet_myers_check(
    gen: &DetailedBalanceGenerator,
    kappa: f64,
    pairs: &[(&DensityMatrix, &DensityMatrix, f64)],
    tol: f64,
) -> Result<BonnetMyers> {
    if !(kappa > 0.0) {
        return Err(QmsError::PreconditionNotMet(format!(
            "needs positive curvature, got {kappa}"
        )));
    }
    let mut worst = f64::NEG_INFINITY;
    for (a, b, w) in pairs {
        let rhs = 4.0 / kappa * (entropy_to_sigma(gen, a) + entropy_to_sigma(gen, b));
        let v = if rhs > 0.0 { w * w / rhs - 1.0 } else { w * w };
        worst = worst.max(v);
    }
    Ok(BonnetMyers {
        worst,
        ok: pairs.is_empty() || worst <= 5.0 * tol,
    })
}
