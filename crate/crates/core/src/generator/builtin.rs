use std::f64::consts::PI;

use super::{DetailedBalanceGenerator, JumpMode};
use crate::operator::{CMat, DensityMatrix, TracelessBasis, C64};
use crate::{QmsError, Result};

/// Named generators available from the command line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Builtin {
    Depolarizing(usize),
    Dephasing(usize),
    ThermalQubit(f64),
}

impl Builtin {
    pub fn build(self) -> Result<DetailedBalanceGenerator> {
        match self {
            Builtin::Depolarizing(d) => depolarizing(d),
            Builtin::Dephasing(d) => dephasing(d),
            Builtin::ThermalQubit(beta) => thermal_qubit(beta),
        }
    }
}

impl std::str::FromStr for Builtin {
    type Err = QmsError;

    /// Parses `depolarizing(d)`, `dephasing(d)` or `thermal_qubit(beta)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || QmsError::Parse(format!("unknown generator `{s}`"));
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = &s[..open];
        let arg = s[open + 1..s.len() - 1].trim();
        let dim = || {
            arg.parse::<usize>()
                .map_err(|_| QmsError::Parse(format!("expected a dimension, got `{arg}`")))
        };
        match name {
            "depolarizing" => Ok(Builtin::Depolarizing(dim()?)),
            "dephasing" => Ok(Builtin::Dephasing(dim()?)),
            "thermal_qubit" => arg
                .parse::<f64>()
                .map(Builtin::ThermalQubit)
                .map_err(|_| QmsError::Parse(format!("expected an inverse temperature, got `{arg}`"))),
            _ => Err(bad()),
        }
    }
}

/// Parses and builds a named generator.
pub fn builtin(name: &str) -> Result<DetailedBalanceGenerator> {
    name.parse::<Builtin>()?.build()
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(QmsError::InvalidInput(format!("dimension must be at least 2, got {d}")));
    }
    Ok(())
}

/// `L(X) = Tr(X) I/d - X`, spectral gap one.
pub fn depolarizing(d: usize) -> Result<DetailedBalanceGenerator> {
    check_dim(d)?;
    let scale = (d as f64).sqrt();
    let c = 1.0 / (2.0 * (d * d) as f64);
    let modes = TracelessBasis::new(d)
        .elements()
        .iter()
        .map(|b| JumpMode::new(b.scale(scale), c, 0.0))
        .collect();
    DetailedBalanceGenerator::new(DensityMatrix::maximally_mixed(d), modes)
}

/// Dephasing in the computational basis and in its Fourier-conjugate basis.
///
/// Dephasing in a single basis leaves every diagonal matrix invariant; the
/// second basis makes the generator primitive. For `d = 2` the modes are
/// `sigma_z` and `sigma_x` and the spectral gap is one.
pub fn dephasing(d: usize) -> Result<DetailedBalanceGenerator> {
    check_dim(d)?;
    let basis = TracelessBasis::new(d);
    let df = d as f64;
    let fourier = CMat::from_fn(d, d, |j, k| {
        C64::from_polar(1.0 / df.sqrt(), 2.0 * PI * (j * k) as f64 / df)
    });
    let diagonal = &basis.elements()[d * (d - 1)..];
    let mut modes = Vec::with_capacity(2 * (d - 1));
    for z in diagonal {
        modes.push(JumpMode::new(z.scale(df.sqrt()), 0.25, 0.0));
    }
    for z in diagonal {
        let x = &fourier * z * fourier.adjoint();
        modes.push(JumpMode::new(
            crate::operator::hermitian_part(&x).scale(df.sqrt()),
            0.25,
            0.0,
        ));
    }
    DetailedBalanceGenerator::new(DensityMatrix::maximally_mixed(d), modes)
}

/// Qubit thermalisation at inverse temperature `beta`:
/// `sigma = diag(1, e^{-beta}) / Z` driven by `sigma_-` and its adjoint.
pub fn thermal_qubit(beta: f64) -> Result<DetailedBalanceGenerator> {
    if !beta.is_finite() || beta.abs() > 30.0 {
        return Err(QmsError::InvalidInput(format!(
            "inverse temperature must be finite with |beta| <= 30, got {beta}"
        )));
    }
    let z = 1.0 + (-beta).exp();
    let sigma = DensityMatrix::diagonal(&[1.0 / z, (-beta).exp() / z])?;
    let mut lowering = CMat::zeros(2, 2);
    lowering[(0, 1)] = C64::new(1.0, 0.0);
    DetailedBalanceGenerator::build_from_raw(&sigma, &[lowering], &[2.0])
}
