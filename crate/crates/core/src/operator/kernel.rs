//! The eigenbasis kernel of the twisted multiplication `[rho]_omega`.
//!
//! `phi_omega(a, b) = e^{omega/2} (a - e^{-omega} b) / (ln a - ln b + omega)`.
//! Writing `x = ln a - ln b + omega` this is `e^{-omega/2} b (e^x - 1)/x`,
//! which is evaluated through `expm1` and stays accurate as `x -> 0`.

use crate::{QmsError, Result};

/// Below this `|ln a - ln b + omega|` the first-order limit is used.
pub const KERNEL_DEGENERACY: f64 = 1e-8;

/// Relative argument gap below which divided differences switch to the
/// midpoint derivative.
pub const DIVIDED_DIFFERENCE_GAP: f64 = 1e-6;

fn expm1_over_x(x: f64) -> f64 {
    if x.abs() < KERNEL_DEGENERACY {
        1.0 + 0.5 * x
    } else {
        x.exp_m1() / x
    }
}

fn d_expm1_over_x(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        // sum_n (n+1) x^n / (n+2)!
        0.5 + x / 3.0 + x * x / 8.0 + x * x * x / 30.0 + x.powi(4) / 144.0
    } else {
        (x * x.exp() - x.exp_m1()) / (x * x)
    }
}

/// `phi_omega(a, b)` for positive `a, b`.
pub fn kernel_phi(a: f64, b: f64, omega: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(QmsError::DomainError(format!(
            "kernel arguments must be positive, got a={a:e}, b={b:e}"
        )));
    }
    Ok(phi_unchecked(a, b, omega))
}

/// Kernel without argument checks; callers guarantee `a, b > 0`.
#[inline]
pub fn phi_unchecked(a: f64, b: f64, omega: f64) -> f64 {
    let x = a.ln() - b.ln() + omega;
    (-0.5 * omega).exp() * b * expm1_over_x(x)
}

#[inline]
fn dphi_da(a: f64, b: f64, omega: f64) -> f64 {
    let x = a.ln() - b.ln() + omega;
    (-0.5 * omega).exp() * b * d_expm1_over_x(x) / a
}

#[inline]
fn dphi_db(a: f64, b: f64, omega: f64) -> f64 {
    let x = a.ln() - b.ln() + omega;
    (-0.5 * omega).exp() * (expm1_over_x(x) - d_expm1_over_x(x))
}

/// First divided difference in the left argument,
/// `(phi(a1, b) - phi(a2, b)) / (a1 - a2)`, with the derivative as limit.
pub fn phi_divided_first(a1: f64, a2: f64, b: f64, omega: f64) -> f64 {
    let gap = (a1 - a2).abs();
    if gap <= DIVIDED_DIFFERENCE_GAP * a1.max(a2) {
        dphi_da(0.5 * (a1 + a2), b, omega)
    } else {
        (phi_unchecked(a1, b, omega) - phi_unchecked(a2, b, omega)) / (a1 - a2)
    }
}

/// First divided difference in the right argument.
pub fn phi_divided_second(a: f64, b1: f64, b2: f64, omega: f64) -> f64 {
    let gap = (b1 - b2).abs();
    if gap <= DIVIDED_DIFFERENCE_GAP * b1.max(b2) {
        dphi_db(a, 0.5 * (b1 + b2), omega)
    } else {
        (phi_unchecked(a, b1, omega) - phi_unchecked(a, b2, omega)) / (b1 - b2)
    }
}
