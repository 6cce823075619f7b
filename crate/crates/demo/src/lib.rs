//! WebAssembly bindings for a static demo page. Every entry point returns a
//! JSON string so the page needs no generated TypeScript types.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::Serialize;
use wasm_bindgen::prelude::*;

use qms_core::entropic::spectral_gap;
use qms_core::generator::thermal_qubit;
use qms_core::operator::{kernel_phi, CMat, DensityMatrix, C64};
use qms_core::transport::{w2_distance, W2Options};

#[derive(Serialize)]
struct Curve {
    x: Vec<f64>,
    y: Vec<f64>,
}

/// `phi_omega(a, b)` for `a` on a logarithmic grid over `[a_min, a_max]`.
pub fn kernel_curve_json(omega: f64, b: f64, a_min: f64, a_max: f64, points: usize) -> Result<String, String> {
    if !(a_min > 0.0 && a_max > a_min) || points < 2 {
        return Err("need 0 < a_min < a_max and at least two points".into());
    }
    let (lo, hi) = (a_min.ln(), a_max.ln());
    let x: Vec<f64> = (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect();
    let y = x
        .iter()
        .map(|&a| kernel_phi(a, b, omega))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&Curve { x, y }).expect("curve serialises"))
}

/// Spectral gap of the thermal qubit on an even grid of inverse temperatures.
pub fn thermal_gap_json(beta_min: f64, beta_max: f64, points: usize) -> Result<String, String> {
    if !(beta_max > beta_min) || points < 2 {
        return Err("need beta_min < beta_max and at least two points".into());
    }
    let x: Vec<f64> = (0..points)
        .map(|i| beta_min + (beta_max - beta_min) * i as f64 / (points - 1) as f64)
        .collect();
    let y = x
        .iter()
        .map(|&beta| {
            let g = thermal_qubit(beta)?;
            spectral_gap(&g).map(|s| s.value)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&Curve { x, y }).expect("curve serialises"))
}

#[derive(Serialize)]
struct PathView {
    distance: f64,
    stationarity: f64,
    /// Bloch vectors `(x, y, z)` along the optimised path.
    bloch: Vec<[f64; 3]>,
    energy: Vec<f64>,
    /// Bloch vector of the invariant state.
    sigma: [f64; 3],
}

fn from_bloch(r: [f64; 3]) -> Result<DensityMatrix, String> {
    let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm < 1.0) {
        return Err(format!("Bloch vector must lie inside the unit ball, |r| = {norm:.4}"));
    }
    let [x, y, z] = r;
    let m = CMat::from_row_slice(
        2,
        2,
        &[
            C64::new(0.5 * (1.0 + z), 0.0),
            C64::new(0.5 * x, -0.5 * y),
            C64::new(0.5 * x, 0.5 * y),
            C64::new(0.5 * (1.0 - z), 0.0),
        ],
    );
    DensityMatrix::new(m).map_err(|e| e.to_string())
}

fn to_bloch(rho: &DensityMatrix) -> [f64; 3] {
    let m = rho.matrix();
    [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re]
}

/// Optimised transport path between two qubit states for the thermal qubit.
pub fn w2_path_json(beta: f64, from: [f64; 3], to: [f64; 3], points: usize) -> Result<String, String> {
    if points < 3 {
        return Err("a path needs at least three points".into());
    }
    let g = thermal_qubit(beta).map_err(|e| e.to_string())?;
    let a = from_bloch(from)?;
    let b = from_bloch(to)?;
    let opts = W2Options {
        segments: points - 1,
        ..W2Options::default()
    };
    let r = w2_distance(&g, &a, &b, &opts).map_err(|e| e.to_string())?;
    let view = PathView {
        distance: r.value,
        stationarity: r.stationarity,
        bloch: r.path.states.iter().map(to_bloch).collect(),
        energy: r.energy_history,
        sigma: to_bloch(g.sigma()),
    };
    Ok(serde_json::to_string(&view).expect("path serialises"))
}

#[wasm_bindgen]
pub fn kernel_curve(omega: f64, b: f64, a_min: f64, a_max: f64, points: usize) -> Result<String, JsError> {
    kernel_curve_json(omega, b, a_min, a_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn thermal_gap(beta_min: f64, beta_max: f64, points: usize) -> Result<String, JsError> {
    thermal_gap_json(beta_min, beta_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn w2_path(
    beta: f64,
    x0: f64,
    y0: f64,
    z0: f64,
    x1: f64,
    y1: f64,
    z1: f64,
    points: usize,
) -> Result<String, JsError> {
    w2_path_json(beta, [x0, y0, z0], [x1, y1, z1], points).map_err(|e| JsError::new(&e))
}
