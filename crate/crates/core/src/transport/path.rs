use nalgebra::DVector;
use serde::Serialize;

use super::{MetricOperator, RhoFrame};
use crate::curvature::quad_form_gradient_frame;
use crate::generator::DetailedBalanceGenerator;
use crate::generator::{to_rows, MatrixRows};
use crate::operator::{
    check_dim, operator_norm, random_unitary, seeded_rng, trace_norm_hermitian, CMat, DensityMatrix, TracelessBasis,
    C64,
};
use crate::optim::{lbfgs, LbfgsOptions};
use crate::{ConvergenceWarning, QmsError, Result};

#[derive(Clone, Debug)]
pub struct W2Options {
    /// Number of path segments `N`.
    pub segments: usize,
    /// Smallest eigenvalue allowed for interior states.
    pub floor: f64,
    pub max_iter: usize,
    /// Target relative suboptimality of the returned value.
    pub tol: f64,
    /// Regularisation levels for non-faithful endpoints, largest first.
    pub eps_levels: [f64; 3],
}

impl Default for W2Options {
    fn default() -> Self {
        Self {
            segments: 16,
            floor: 1e-8,
            max_iter: 2000,
            tol: 1e-4,
            eps_levels: [1e-2, 1e-3, 1e-4],
        }
    }
}

/// Piecewise-linear path `s_i = i / N` with midpoint potentials.
#[derive(Clone, Debug)]
pub struct DiscretePath {
    pub grid: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Potential of each segment, solving the continuity equation at the
    /// segment midpoint.
    pub potentials: Vec<CMat>,
    pub energy: f64,
}

#[derive(Serialize)]
struct PathFile<'a> {
    grid: &'a [f64],
    states: Vec<MatrixRows>,
    energy: f64,
}

impl DiscretePath {
    pub fn to_json(&self) -> String {
        let file = PathFile {
            grid: &self.grid,
            states: self.states.iter().map(|s| to_rows(s.matrix())).collect(),
            energy: self.energy,
        };
        serde_json::to_string_pretty(&file).expect("path serialises")
    }

    /// Metric speed `||gamma_dot||` on each segment.
    pub fn segment_speeds(&self, gen: &DetailedBalanceGenerator) -> Result<Vec<f64>> {
        let n = self.states.len() - 1;
        (0..n)
            .map(|i| {
                let mid = midpoint(&self.states[i], &self.states[i + 1])?;
                super::tangent_norm(gen, &mid, &self.potentials[i])
            })
            .collect()
    }

    /// Recomputes `sum_i ds ||grad U_i||^2` at the midpoints.
    pub fn recompute_energy(&self, gen: &DetailedBalanceGenerator) -> Result<f64> {
        let ds = 1.0 / (self.states.len() - 1) as f64;
        Ok(self.segment_speeds(gen)?.iter().map(|v| v * v * ds).sum())
    }
}

fn midpoint(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    DensityMatrix::from_numerical(&((a.matrix() + b.matrix()) * C64::new(0.5, 0.0)))
}

#[derive(Clone, Debug)]
pub struct W2Result {
    /// Length of the optimised path; an upper bound on the distance.
    pub value: f64,
    pub path: DiscretePath,
    /// Estimated relative suboptimality of `value` (quasi-Newton model).
    pub stationarity: f64,
    pub iterations: usize,
    /// Path energy after each optimiser iteration.
    pub energy_history: Vec<f64>,
    /// Values at each regularisation level when an endpoint was not faithful.
    pub regularized: Option<Vec<(f64, f64)>>,
    pub warning: Option<ConvergenceWarning>,
}

struct PathProblem<'g> {
    gen: &'g DetailedBalanceGenerator,
    basis: TracelessBasis,
    start: DVector<f64>,
    end: DVector<f64>,
    segments: usize,
    floor: f64,
}

struct Evaluation {
    energy: f64,
    grad: DVector<f64>,
    potentials: Vec<DVector<f64>>,
    speeds: Vec<f64>,
}

impl PathProblem<'_> {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn point(&self, x: &DVector<f64>, i: usize) -> DVector<f64> {
        let n = self.dim();
        if i == 0 {
            self.start.clone()
        } else if i == self.segments {
            self.end.clone()
        } else {
            x.rows((i - 1) * n, n).into_owned()
        }
    }

    fn state(&self, c: &DVector<f64>) -> Option<DensityMatrix> {
        let rho = DensityMatrix::from_numerical(&self.basis.state_from_coords(c.as_slice())).ok()?;
        (rho.min_eigenvalue() >= self.floor).then_some(rho)
    }

    fn evaluate(&self, x: &DVector<f64>) -> Option<Evaluation> {
        let n = self.dim();
        let big_n = self.segments;
        let ds = 1.0 / big_n as f64;
        let points: Vec<DVector<f64>> = (0..=big_n).map(|i| self.point(x, i)).collect();
        for p in &points[1..big_n] {
            self.state(p)?;
        }
        let mut energy = 0.0;
        let mut potentials = Vec::with_capacity(big_n);
        let mut forces = Vec::with_capacity(big_n);
        let mut speeds = Vec::with_capacity(big_n);
        for i in 0..big_n {
            let mid = self.state(&((&points[i] + &points[i + 1]) * 0.5))?;
            let v = (&points[i + 1] - &points[i]) / ds;
            let op = MetricOperator::new(self.gen, &mid).ok()?;
            let u = op.solve_coords(&v).ok()?;
            let e = v.dot(&u).max(0.0);
            energy += ds * e;
            speeds.push(e.sqrt());
            let frame = RhoFrame::new(self.gen, &mid).ok()?;
            let uf = frame.to_frame(&self.basis.from_coords(u.as_slice()));
            let m = frame.from_frame(&quad_form_gradient_frame(&frame, &uf));
            forces.push(self.basis.coords(&m));
            potentials.push(u);
        }
        let mut grad = DVector::zeros(n * (big_n - 1));
        for k in 1..big_n {
            let g = (&potentials[k - 1] - &potentials[k]) * 2.0 - (&forces[k - 1] + &forces[k]) * (0.5 * ds);
            grad.rows_mut((k - 1) * n, n).copy_from(&g);
        }
        Some(Evaluation {
            energy,
            grad,
            potentials,
            speeds,
        })
    }

    fn path(&self, x: &DVector<f64>, eval: &Evaluation) -> Result<DiscretePath> {
        let big_n = self.segments;
        let states = (0..=big_n)
            .map(|i| DensityMatrix::from_numerical(&self.basis.state_from_coords(self.point(x, i).as_slice())))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiscretePath {
            grid: (0..=big_n).map(|i| i as f64 / big_n as f64).collect(),
            states,
            potentials: eval
                .potentials
                .iter()
                .map(|u| self.basis.from_coords(u.as_slice()))
                .collect(),
            energy: eval.energy,
        })
    }
}

fn check_options(opts: &W2Options) -> Result<()> {
    if opts.segments < 2 || !(opts.tol > 0.0) || !(opts.floor > 0.0) || opts.max_iter == 0 {
        return Err(QmsError::InvalidInput(
            "W2 options need segments >= 2 and positive tol, floor and iteration budget".into(),
        ));
    }
    Ok(())
}

fn w2_faithful(
    gen: &DetailedBalanceGenerator,
    rho: &DensityMatrix,
    omega: &DensityMatrix,
    opts: &W2Options,
) -> Result<W2Result> {
    let basis = TracelessBasis::new(gen.dim());
    let problem = PathProblem {
        gen,
        start: basis.coords(rho.matrix()),
        end: basis.coords(omega.matrix()),
        basis,
        segments: opts.segments,
        floor: opts.floor.min(0.5 * rho.min_eigenvalue().min(omega.min_eigenvalue())),
    };
    let n = problem.dim();
    let mut x0 = DVector::zeros(n * (opts.segments - 1));
    for i in 1..opts.segments {
        let s = i as f64 / opts.segments as f64;
        let p = &problem.start * (1.0 - s) + &problem.end * s;
        x0.rows_mut((i - 1) * n, n).copy_from(&p);
    }
    let lopts = LbfgsOptions {
        max_iter: opts.max_iter,
        memory: 12,
        rel_tol: 0.01 * opts.tol * opts.tol,
        grad_tol: 1e-14,
        max_backtracks: 60,
    };
    let min = lbfgs(x0, |x| problem.evaluate(x).map(|e| (e.energy, e.grad)), &lopts)
        .ok_or_else(|| QmsError::InternalError("straight-line initial path left the state space".into()))?;
    let eval = problem
        .evaluate(&min.x)
        .ok_or_else(|| QmsError::InternalError("optimised path became infeasible".into()))?;
    let path = problem.path(&min.x, &eval)?;
    let ds = 1.0 / opts.segments as f64;
    let value = eval.speeds.iter().sum::<f64>() * ds;
    let stationarity = if eval.energy > 0.0 {
        0.5 * min.predicted_decrease / eval.energy
    } else {
        0.0
    };
    let warning = (!min.converged && stationarity > opts.tol).then(|| ConvergenceWarning {
        iterations: min.iterations,
        residual: stationarity,
        message: "path optimiser stopped before reaching the target tolerance".into(),
    });
    if let Some(w) = &warning {
        log::warn!("w2_distance: {w}");
    }
    Ok(W2Result {
        value,
        path,
        stationarity,
        iterations: min.iterations,
        energy_history: min.history,
        regularized: None,
        warning,
    })
}

/// Discretised transport distance `W_2` between two states.
///
/// The path energy is minimised over interior states starting from the
/// straight line; the returned value is the length of the optimised path.
/// Non-faithful endpoints are replaced by `(1 - eps) rho + eps I/d` and the
/// values extrapolated linearly in `eps` from the two smallest levels.
pub fn w2_distance(
    gen: &DetailedBalanceGenerator,
    rho: &DensityMatrix,
    omega: &DensityMatrix,
    opts: &W2Options,
) -> Result<W2Result> {
    check_options(opts)?;
    check_dim(rho.matrix(), gen.dim(), "first state")?;
    check_dim(omega.matrix(), gen.dim(), "second state")?;
    if rho.is_faithful() && omega.is_faithful() {
        return w2_faithful(gen, rho, omega, opts);
    }
    let mut levels = Vec::with_capacity(3);
    let mut last = None;
    for &eps in &opts.eps_levels {
        let r = w2_faithful(
            gen,
            &regularize_if_needed(rho, eps),
            &regularize_if_needed(omega, eps),
            opts,
        )?;
        levels.push((eps, r.value));
        last = Some(r);
    }
    let mut result = last.expect("three regularisation levels");
    let (e2, w2) = levels[1];
    let (e3, w3) = levels[2];
    result.value = ((e2 * w3 - e3 * w2) / (e2 - e3)).max(0.0);
    result.regularized = Some(levels);
    Ok(result)
}

fn regularize_if_needed(rho: &DensityMatrix, eps: f64) -> DensityMatrix {
    if rho.is_faithful() && rho.min_eigenvalue() >= eps / rho.dim() as f64 {
        rho.clone()
    } else {
        rho.regularize(eps)
    }
}

/// `||rho - omega||_1` against the transport bound.
#[derive(Clone, Debug, Serialize)]
pub struct W1Bound {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Trace-distance bound `||rho - omega||_1 <= 2 (sum_j c_j (e^{-w/2} + e^{w/2})
/// ||L_j||^2)^{1/2} W_2(rho, omega)`.
pub fn w1_bound_check(gen: &DetailedBalanceGenerator, rho: &DensityMatrix, omega: &DensityMatrix, w2: f64) -> W1Bound {
    let lhs = trace_norm_hermitian(&(rho.matrix() - omega.matrix()));
    let k: f64 = gen
        .modes()
        .iter()
        .map(|m| m.c * ((-0.5 * m.omega).exp() + (0.5 * m.omega).exp()) * operator_norm(&m.l).powi(2))
        .sum();
    let rhs = 2.0 * k.sqrt() * w2;
    W1Bound {
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + 1e-6) + 1e-12,
    }
}

#[derive(Clone, Debug)]
pub struct DiameterEstimate {
    pub value: f64,
    pub pair: (DensityMatrix, DensityMatrix),
    pub evaluated: usize,
}

/// Lower estimate of the diameter: the largest distance over orthogonal pure
/// pairs in the computational basis and in the eigenbasis of sigma, plus
/// `n_pairs` random orthogonal pure pairs.
pub fn diameter_estimate(
    gen: &DetailedBalanceGenerator,
    n_pairs: usize,
    seed: u64,
    opts: &W2Options,
) -> Result<DiameterEstimate> {
    if n_pairs == 0 {
        return Err(QmsError::InvalidInput("n_pairs must be at least 1".into()));
    }
    let d = gen.dim();
    let mut frames = vec![CMat::identity(d, d), gen.sigma().spectrum().vectors.clone()];
    let mut rng = seeded_rng(seed);
    for _ in 0..n_pairs {
        frames.push(random_unitary(d, &mut rng));
    }
    let pure = |u: &CMat, k: usize| {
        let col: Vec<C64> = u.column(k).iter().copied().collect();
        DensityMatrix::pure(&col)
    };
    let mut best: Option<DiameterEstimate> = None;
    let mut evaluated = 0;
    for (f, u) in frames.iter().enumerate() {
        let pairs: Vec<(usize, usize)> = if f < 2 {
            (0..d).flat_map(|a| ((a + 1)..d).map(move |b| (a, b))).collect()
        } else {
            vec![(0, 1)]
        };
        for (a, b) in pairs {
            let (r, s) = (pure(u, a)?, pure(u, b)?);
            let w = w2_distance(gen, &r, &s, opts)?.value;
            evaluated += 1;
            if best.as_ref().is_none_or(|e| w > e.value) {
                best = Some(DiameterEstimate {
                    value: w,
                    pair: (r, s),
                    evaluated: 0,
                });
            }
        }
    }
    let mut best = best.expect("at least one pair");
    best.evaluated = evaluated;
    Ok(best)
}
