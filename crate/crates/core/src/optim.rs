//! Limited-memory BFGS with Armijo backtracking.
//!
//! The objective may refuse a point by returning `None` (an infeasible
//! iterate); the line search then shrinks the step.

use std::collections::VecDeque;

use nalgebra::DVector;

#[derive(Clone, Debug)]
pub struct LbfgsOptions {
    pub max_iter: usize,
    pub memory: usize,
    /// Stop when the predicted decrease `-g.p / 2` falls below
    /// `rel_tol * |f|`.
    pub rel_tol: f64,
    pub grad_tol: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            memory: 8,
            rel_tol: 1e-12,
            grad_tol: 1e-10,
            max_backtracks: 50,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: DVector<f64>,
    pub value: f64,
    pub grad: DVector<f64>,
    pub iterations: usize,
    /// Objective value after each accepted step, starting with `f(x0)`.
    pub history: Vec<f64>,
    /// Quasi-Newton estimate of `f(x) - min f`.
    pub predicted_decrease: f64,
    pub converged: bool,
}

fn two_loop(g: &DVector<f64>, pairs: &VecDeque<(DVector<f64>, DVector<f64>, f64)>) -> DVector<f64> {
    let mut q = g.clone();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * s.dot(&q);
        q.axpy(-a, y, 1.0);
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        q *= s.dot(y) / y.dot(y);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.into_iter().rev()) {
        let b = rho * y.dot(&q);
        q.axpy(a - b, s, 1.0);
    }
    -q
}

/// Minimises `f`, where `fg(x)` returns the value and gradient or `None`
/// outside the feasible region. `x0` must be feasible.
pub fn lbfgs<F>(x0: DVector<f64>, mut fg: F, opts: &LbfgsOptions) -> Option<Minimum>
where
    F: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)>,
{
    let (mut f, mut g) = fg(&x0)?;
    let mut x = x0;
    let mut pairs: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::new();
    let mut history = vec![f];
    let mut predicted = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if g.norm() <= opts.grad_tol {
            predicted = 0.0;
            converged = true;
            break;
        }
        let mut p = two_loop(&g, &pairs);
        let mut slope = g.dot(&p);
        if !(slope < 0.0) {
            pairs.clear();
            p = -g.clone();
            slope = g.dot(&p);
        }
        predicted = -0.5 * slope;
        if predicted <= opts.rel_tol * f.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
        let mut step = if pairs.is_empty() {
            (1.0 / g.norm()).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial = &x + &p * step;
            if let Some((ft, gt)) = fg(&trial) {
                if ft <= f + 1e-4 * step * slope {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gn)) = accepted else {
            if pairs.is_empty() {
                break;
            }
            pairs.clear();
            continue;
        };
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        x = xn;
        f = fnew;
        g = gn;
        history.push(f);
        iterations += 1;
    }
    if !converged && iterations < opts.max_iter && g.norm() > opts.grad_tol {
        // Line search stalled; the estimate from the last direction stands.
        let p = two_loop(&g, &pairs);
        predicted = (-0.5 * g.dot(&p)).max(0.0);
    }
    Some(Minimum {
        x,
        value: f,
        grad: g,
        iterations,
        history,
        predicted_decrease: predicted,
        converged,
    })
}

/// Central-difference gradient.
pub fn numerical_gradient<F>(x: &DVector<f64>, h: f64, mut f: F) -> Option<DVector<f64>>
where
    F: FnMut(&DVector<f64>) -> Option<f64>,
{
    let mut g = DVector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe)?;
        probe[i] = x[i] - h;
        let down = f(&probe)?;
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    Some(g)
}
