#![allow(dead_code)]

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use qms_core::entropic::relative_entropy;
use qms_core::generator::DetailedBalanceGenerator;
use qms_core::operator::{c64, commutator, CMat, DensityMatrix, C64};

/// Gauss-Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    GaussLegendre::new(n)
        .expect("rule degree")
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * ((b - a) * x + b + a), 0.5 * (b - a) * w))
        .collect()
}

/// Composite Gauss-Legendre rule over consecutive break points.
pub fn composite(breaks: &[f64], n: usize) -> Vec<(f64, f64)> {
    breaks.windows(2).flat_map(|w| gauss(n, w[0], w[1])).collect()
}

/// Eigen-decomposition of a Hermitian matrix straight from nalgebra.
pub struct Eig {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eig {
    pub fn new(m: &CMat) -> Self {
        let e = m.clone().symmetric_eigen();
        Self {
            values: e.eigenvalues.iter().copied().collect(),
            vectors: e.eigenvectors,
        }
    }

    pub fn rotate_in(&self, x: &CMat) -> CMat {
        self.vectors.adjoint() * x * &self.vectors
    }

    pub fn rotate_out(&self, x: &CMat) -> CMat {
        &self.vectors * x * self.vectors.adjoint()
    }

    pub fn power(&self, p: f64) -> CMat {
        let d = self.values.len();
        let diag = DVector::from_iterator(d, self.values.iter().map(|v| c64(v.powf(p), 0.0)));
        self.rotate_out(&CMat::from_diagonal(&diag))
    }
}

/// `int_0^1 e^{w(s - 1/2)} rho^s A rho^{1-s} ds` by Gauss-Legendre quadrature.
pub fn rho_omega_quadrature(rho: &DensityMatrix, omega: f64, a: &CMat, n: usize) -> CMat {
    let e = Eig::new(rho.matrix());
    let d = a.nrows();
    let mut out = CMat::zeros(d, d);
    for (s, w) in gauss(n, 0.0, 1.0) {
        let term = e.power(s) * a * e.power(1.0 - s);
        out += term.scale(w * (omega * (s - 0.5)).exp());
    }
    out
}

/// Graded rule on `[0, 1]`, refined towards `s = 1` where the resolvent
/// `((1 - s) I + s rho)^{-1}` is steep for small eigenvalues.
fn resolvent_rule() -> Vec<(f64, f64)> {
    composite(
        &[0.0, 0.5, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995, 0.998, 0.999, 0.9995, 1.0],
        24,
    )
}

/// Eigenbasis weights of the Frechet derivative of `rho^alpha`:
/// `D_alpha[A] = int_0^1 int_0^alpha rho^{alpha-b} R_s A R_s rho^b db ds`,
/// `R_s = ((1-s) I + s rho)^{-1}`, so `D_alpha[A]_kl = A_kl g_kl`.
fn power_derivative_weights(lambda: &[f64], alpha: f64, s_rule: &[(f64, f64)], b_rule: &[(f64, f64)]) -> DMatrix<f64> {
    let d = lambda.len();
    DMatrix::from_fn(d, d, |k, l| {
        let (a, b) = (lambda[k], lambda[l]);
        let res: f64 = s_rule
            .iter()
            .map(|&(s, w)| w / ((1.0 - s + s * a) * (1.0 - s + s * b)))
            .sum();
        let inner: f64 = b_rule
            .iter()
            .map(|&(t, w)| alpha * w * a.powf(alpha - alpha * t) * b.powf(alpha * t))
            .sum();
        res * inner
    })
}

/// Directional derivative `d/dt sum_j c_j <dU_j, [rho + tA]_{w_j} dU_j>` at
/// `t = 0`, from the integral form of `[rho]_w` and the resolvent form of the
/// derivative of matrix powers.
pub fn chi_directional_derivative(
    gen: &DetailedBalanceGenerator,
    rho: &DensityMatrix,
    u: &CMat,
    a: &CMat,
    n: usize,
) -> f64 {
    let e = Eig::new(rho.matrix());
    let d = rho.dim();
    let at = e.rotate_in(a);
    let s_rule = resolvent_rule();
    let b_rule = gauss(n, 0.0, 1.0);
    let grads: Vec<CMat> = gen.modes().iter().map(|m| e.rotate_in(&commutator(&m.l, u))).collect();
    let pow = |p: f64| CMat::from_diagonal(&DVector::from_iterator(d, e.values.iter().map(|v| c64(v.powf(p), 0.0))));
    let deriv = |alpha: f64| {
        let g = power_derivative_weights(&e.values, alpha, &s_rule, &b_rule);
        CMat::from_fn(d, d, |k, l| at[(k, l)] * g[(k, l)])
    };
    let mut total = 0.0;
    for (alpha, w) in gauss(n, 0.0, 1.0) {
        let da = deriv(alpha);
        let db = deriv(1.0 - alpha);
        let (pa, pb) = (pow(alpha), pow(1.0 - alpha));
        for (m, du) in gen.modes().iter().zip(&grads) {
            let inner = &da * du * &pb + &pa * du * &db;
            let tr: C64 = (du.adjoint() * inner).trace();
            total += w * m.c * (m.omega * (alpha - 0.5)).exp() * tr.re;
        }
    }
    total
}

/// `d^2/ds^2 D(gamma_s || sigma)` at `s = 0` from an RK4 geodesic run forward
/// and backward with `steps = 200`, `s_max = 0.1`, Richardson-extrapolating the
/// central second differences taken at 4 and 8 steps.
pub fn geodesic_second_derivative(gen: &DetailedBalanceGenerator, rho: &DensityMatrix, u: &CMat) -> f64 {
    let (s_max, steps) = (0.1, 200);
    let ds = s_max / steps as f64;
    let fwd = qms_core::curvature::integrate_geodesic(gen, rho, u, s_max, steps).expect("forward geodesic");
    let back = qms_core::curvature::integrate_geodesic(gen, rho, &(-u), s_max, steps).expect("backward geodesic");
    let ent = |st: &qms_core::curvature::GeodesicState| relative_entropy(&st.gamma, gen.sigma());
    let f0 = relative_entropy(rho, gen.sigma());
    let second = |n: usize| (ent(&fwd[n]) - 2.0 * f0 + ent(&back[n])) / (n as f64 * ds).powi(2);
    (4.0 * second(4) - second(8)) / 3.0
}

/// Optimal transportation cost by enumerating every basic solution.
pub fn transport_cost_brute_force(a: &[f64], b: &[f64], cost: &[Vec<f64>]) -> f64 {
    let (m, n) = (a.len(), b.len());
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let r = m + n - 1;
    let mut rhs = DVector::zeros(r);
    for i in 0..m {
        rhs[i] = a[i];
    }
    for j in 0..n - 1 {
        rhs[m + j] = b[j];
    }
    let mut best = f64::INFINITY;
    for subset in combinations(cells.len(), r) {
        let mat = DMatrix::from_fn(r, r, |row, col| {
            let (i, j) = cells[subset[col]];
            if (row < m && i == row) || (row >= m && j == row - m) {
                1.0
            } else {
                0.0
            }
        });
        let Some(x) = mat.lu().solve(&rhs) else { continue };
        if x.iter().any(|v| *v < -1e-12 || !v.is_finite()) {
            continue;
        }
        let c: f64 = subset
            .iter()
            .zip(x.iter())
            .map(|(&k, v)| cost[cells[k].0][cells[k].1] * v)
            .sum();
        best = best.min(c);
    }
    best
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Heisenberg Liouvillian as a `d^2 x d^2` matrix acting on column-stacked
/// vectors, built from Kronecker products of the jump operators.
pub fn liouvillian(gen: &DetailedBalanceGenerator) -> CMat {
    let d = gen.dim();
    let id = CMat::identity(d, d);
    let mut out = CMat::zeros(d * d, d * d);
    for m in gen.modes() {
        let l = &m.l;
        let ld = l.adjoint();
        let left = l.transpose().kronecker(&ld) - id.kronecker(&(&ld * l));
        let right = l.conjugate().kronecker(l) - (l * &ld).transpose().kronecker(&id);
        out += left.scale(m.c * (-0.5 * m.omega).exp()) + right.scale(m.c * (0.5 * m.omega).exp());
    }
    out
}

/// Eigenvalues of the Liouvillian by a complex Schur decomposition.
pub fn liouvillian_eigenvalues(gen: &DetailedBalanceGenerator) -> Vec<C64> {
    let l = liouvillian(gen);
    nalgebra::Schur::new(l)
        .eigenvalues()
        .expect("complex Schur form")
        .iter()
        .copied()
        .collect()
}

/// Smallest nonzero `-Re(lambda)` over the Liouvillian spectrum.
pub fn brute_force_gap(gen: &DetailedBalanceGenerator) -> f64 {
    liouvillian_eigenvalues(gen)
        .into_iter()
        .filter(|z| z.norm() > 1e-8)
        .map(|z| -z.re)
        .fold(f64::INFINITY, f64::min)
}

pub fn rel_err(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs().max(1e-300)
}
