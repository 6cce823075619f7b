//! Canonical mode form from arbitrary raw jump operators.

use nalgebra::DMatrix;

use super::{real_eigen_sorted, tol, DetailedBalanceGenerator, JumpMode};
use crate::operator::spectral_decompose;
use crate::operator::{CMat, DensityMatrix, TracelessBasis, C64};
use crate::{QmsError, Result};

/// Relative cut-off for discarding modes with negligible weight.
const MODE_CUTOFF: f64 = 1e-12;

/// Bohr frequency of each matrix-unit slot `(k, l)` in the eigenframe of
/// sigma, with nearly equal values merged onto a common representative.
fn bohr_table(ln_lambda: &[f64]) -> (DMatrix<f64>, Vec<f64>) {
    let d = ln_lambda.len();
    let mut gaps: Vec<f64> = Vec::new();
    for k in 0..d {
        for l in 0..d {
            gaps.push((ln_lambda[l] - ln_lambda[k]).abs());
        }
    }
    gaps.sort_by(f64::total_cmp);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for g in gaps {
        match clusters.last_mut() {
            Some(c) if g - c[c.len() - 1] < tol::BOHR_MERGE => c.push(g),
            _ => clusters.push(vec![g]),
        }
    }
    let reps: Vec<f64> = clusters
        .iter()
        .map(|c| {
            if c[0] < tol::BOHR_MERGE {
                0.0
            } else {
                c.iter().sum::<f64>() / c.len() as f64
            }
        })
        .collect();
    let lookup = |g: f64| {
        reps.iter()
            .copied()
            .min_by(|a, b| (a - g).abs().total_cmp(&(b - g).abs()))
            .unwrap_or(0.0)
    };
    let table = DMatrix::from_fn(d, d, |k, l| {
        let w = ln_lambda[l] - ln_lambda[k];
        w.signum() * lookup(w.abs())
    });
    let positive = reps.into_iter().filter(|&r| r > 0.0).collect();
    (table, positive)
}

impl DetailedBalanceGenerator {
    /// Builds the detailed-balance generator associated with raw jump
    /// operators `R_i` and positive weights `w_i`.
    ///
    /// Each `R_i` is split into Bohr-frequency components in the eigenframe
    /// of sigma. For every frequency the weighted Gram operator of the
    /// components, averaged with that of the adjoint components at the
    /// opposite frequency, is diagonalised; its eigenvectors (scaled to
    /// `Tr(L^* L) = d`) become the modes and its eigenvalues divided by `d`
    /// the weights. The zero-frequency block is diagonalised on real
    /// Hermitian coordinates so that its modes are self-adjoint.
    pub fn build_from_raw(sigma: &DensityMatrix, raw: &[CMat], weights: &[f64]) -> Result<Self> {
        sigma.require_faithful()?;
        let d = sigma.dim();
        if raw.is_empty() {
            return Err(QmsError::InvalidInput("no jump operators given".into()));
        }
        if raw.len() != weights.len() {
            return Err(QmsError::InvalidInput(format!(
                "{} jump operators but {} weights",
                raw.len(),
                weights.len()
            )));
        }
        for (i, (r, &w)) in raw.iter().zip(weights).enumerate() {
            if r.nrows() != d || r.ncols() != d {
                return Err(QmsError::InvalidInput(format!("jump operator {i} has wrong dimension")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(QmsError::InvalidInput(format!("weight {i} must be positive, got {w}")));
            }
        }

        let spec = sigma.spectrum();
        let ln_lambda: Vec<f64> = spec.values.iter().map(|v| v.ln()).collect();
        let (table, positive) = bohr_table(&ln_lambda);
        let frames: Vec<CMat> = raw.iter().map(|r| spec.to_frame(r)).collect();
        let df = d as f64;

        let mut candidates: Vec<(CMat, f64, f64)> = Vec::new();

        // Zero-frequency block on Hermitian coordinates.
        let basis = TracelessBasis::new(d);
        let block0: Vec<usize> = basis
            .elements()
            .iter()
            .enumerate()
            .filter(|(_, b)| {
                b.iter()
                    .enumerate()
                    .all(|(idx, z)| z.norm() == 0.0 || table[(idx % d, idx / d)] == 0.0)
            })
            .map(|(i, _)| i)
            .collect();
        let mut g0 = DMatrix::<f64>::zeros(block0.len(), block0.len());
        for (f, &w) in frames.iter().zip(weights) {
            let c = CMat::from_fn(d, d, |k, l| {
                if table[(k, l)] == 0.0 {
                    f[(k, l)]
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let h1 = &c + c.adjoint();
            let h2 = (&c - c.adjoint()) * C64::new(0.0, 1.0);
            for h in [h1, h2] {
                let x: Vec<f64> = block0
                    .iter()
                    .map(|&b| crate::operator::hs_inner(&basis.elements()[b], &h).re)
                    .collect();
                for p in 0..x.len() {
                    for q in 0..x.len() {
                        g0[(p, q)] += 0.25 * w * x[p] * x[q];
                    }
                }
            }
        }
        if !block0.is_empty() {
            let (vals, vecs) = real_eigen_sorted(g0);
            for (k, &g) in vals.iter().enumerate().rev() {
                let mut l = CMat::zeros(d, d);
                for (p, &b) in block0.iter().enumerate() {
                    l += basis.elements()[b].scale(vecs[(p, k)]);
                }
                candidates.push((l.scale(df.sqrt()), g / df, 0.0));
            }
        }

        // Positive frequencies and their adjoints.
        for &omega in &positive {
            let slots: Vec<(usize, usize)> = (0..d)
                .flat_map(|k| (0..d).map(move |l| (k, l)))
                .filter(|&(k, l)| table[(k, l)] == omega)
                .collect();
            let n = slots.len();
            let mut g = CMat::zeros(n, n);
            for (f, &w) in frames.iter().zip(weights) {
                let cp = nalgebra::DVector::from_iterator(n, slots.iter().map(|&(k, l)| f[(k, l)]));
                let cm = nalgebra::DVector::from_iterator(n, slots.iter().map(|&(k, l)| f[(l, k)].conj()));
                g += (&cp * cp.adjoint() + &cm * cm.adjoint()).scale(0.5 * w);
            }
            let eig = spectral_decompose(&crate::operator::hermitian_part(&g))?;
            for k in (0..n).rev() {
                let mut l = CMat::zeros(d, d);
                for (p, &(a, b)) in slots.iter().enumerate() {
                    l[(a, b)] = eig.vectors[(p, k)] * df.sqrt();
                }
                candidates.push((l, eig.values[k] / df, omega));
            }
        }

        let scale = candidates.iter().fold(0.0_f64, |m, c| m.max(c.1));
        let mut modes = Vec::new();
        for (l_frame, c, omega) in candidates {
            if scale == 0.0 || c <= MODE_CUTOFF * scale {
                continue;
            }
            let l = spec.from_frame(&l_frame);
            if omega > 0.0 {
                modes.push(JumpMode::new(l.adjoint(), c, -omega));
            }
            modes.push(JumpMode::new(l, c, omega));
        }
        if modes.is_empty() {
            return Err(QmsError::DegenerateGenerator);
        }
        modes.sort_by(|a, b| a.omega.total_cmp(&b.omega).then(b.c.total_cmp(&a.c)));
        DetailedBalanceGenerator::new(sigma.clone(), modes)
    }
}
