use super::*;
use crate::generator::{depolarizing, thermal_qubit};
use crate::operator::{hs_inner, random_density, random_matrix, random_traceless_hermitian, seeded_rng};

#[test]
fn rho_omega_at_maximally_mixed() {
    let mut rng = seeded_rng(1);
    let rho = DensityMatrix::maximally_mixed(3);
    let a = random_matrix(3, &mut rng);
    let out = apply_rho_omega(&rho, 0.0, &a).unwrap();
    assert!(frobenius(&(out - a.scale(1.0 / 3.0))) < 1e-14);
}

#[test]
fn rho_omega_diagonal_case() {
    let rho = DensityMatrix::diagonal(&[0.2, 0.8]).unwrap();
    let a = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C64::new(1.5, 0.0),
        C64::new(-0.5, 0.0),
    ]));
    let w: f64 = 0.6;
    let out = apply_rho_omega(&rho, w, &a).unwrap();
    let f = 2.0 * (0.5 * w).sinh() / w;
    assert!((out[(0, 0)].re - 0.2 * 1.5 * f).abs() < 1e-14);
    assert!((out[(1, 1)].re + 0.8 * 0.5 * f).abs() < 1e-14);
}

#[test]
fn rho_omega_self_adjoint_and_rejects_boundary() {
    let mut rng = seeded_rng(2);
    let rho = random_density(3, 7, 0.01).unwrap();
    let a = random_matrix(3, &mut rng);
    let b = random_matrix(3, &mut rng);
    let lhs = hs_inner(&a, &apply_rho_omega(&rho, 0.4, &b).unwrap());
    let rhs = hs_inner(&apply_rho_omega(&rho, 0.4, &a).unwrap(), &b);
    assert!((lhs - rhs).norm() < 1e-12);
    let pure = DensityMatrix::basis_state(2, 0).unwrap();
    assert!(apply_rho_omega(&pure, 0.0, &CMat::identity(2, 2)).is_err());
}

#[test]
fn gradient_divergence_adjoint() {
    let mut rng = seeded_rng(3);
    let g = thermal_qubit(0.8).unwrap();
    for _ in 0..20 {
        let u = random_matrix(2, &mut rng);
        let v: Vec<CMat> = g.modes().iter().map(|_| random_matrix(2, &mut rng)).collect();
        let lhs = -hs_inner(&divergence(&g, &v).unwrap(), &u);
        let grad = gradient(&g, &u).unwrap();
        let rhs: C64 = g
            .modes()
            .iter()
            .zip(&v)
            .zip(&grad.components)
            .map(|((m, vj), gj)| hs_inner(vj, gj) * m.c)
            .sum();
        assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
    }
    assert!(gradient(&g, &CMat::identity(2, 2))
        .unwrap()
        .components
        .iter()
        .all(|c| c.norm() == 0.0));
    assert!(divergence(&g, &[CMat::zeros(2, 2)]).is_err());
}

#[test]
fn metric_operator_properties() {
    let g = depolarizing(3).unwrap();
    for seed in 0..10 {
        let rho = random_density(3, seed, 0.01).unwrap();
        let op = metric_operator(&g, &rho).unwrap();
        assert!(op.symmetry_residual() < 1e-12);
        assert!(op.is_positive_definite());
        let eps = rho.min_eigenvalue();
        assert!(op.min_eigenvalue() >= 0.9 * eps / g.k_lindblad());
    }
}

#[test]
fn metric_matrix_matches_tangent_norm_and_solver() {
    let mut rng = seeded_rng(4);
    let g = thermal_qubit(1.1).unwrap();
    let rho = random_density(2, 3, 0.05).unwrap();
    let op = metric_operator(&g, &rho).unwrap();
    let u = random_traceless_hermitian(2, &mut rng);
    let c = op.basis().coords(&u);
    let quad = c.dot(&op.apply_coords(&c));
    assert!((tangent_norm(&g, &rho, &u).unwrap().powi(2) - quad).abs() < 1e-12 * quad);
    let v = apply_metric(&g, &rho, &u).unwrap();
    let field = solve_continuity(&g, &rho, &v).unwrap();
    assert!(frobenius(&(field.potential - &u)) < 1e-9 * frobenius(&u));
    assert!(solve_continuity(&g, &rho, &CMat::identity(2, 2)).is_err());
    let zero = solve_continuity(&g, &rho, &CMat::zeros(2, 2)).unwrap();
    assert!(zero.potential.norm() == 0.0);
}

#[test]
fn w2_identity_and_symmetry() {
    let g = thermal_qubit(0.5).unwrap();
    let opts = W2Options::default();
    let a = random_density(2, 31, 0.05).unwrap();
    let b = random_density(2, 32, 0.05).unwrap();
    assert!(w2_distance(&g, &a, &a, &opts).unwrap().value < 1e-12);
    let ab = w2_distance(&g, &a, &b, &opts).unwrap();
    let ba = w2_distance(&g, &b, &a, &opts).unwrap();
    assert!(ab.stationarity <= opts.tol, "{}", ab.stationarity);
    assert!((ab.value - ba.value).abs() <= 2.0 * opts.tol * ab.value.max(1.0));
    assert!(ab.energy_history.windows(2).all(|w| w[1] <= w[0]));
    let e = ab.path.recompute_energy(&g).unwrap();
    assert!((e - ab.path.energy).abs() < 1e-10 * e.max(1.0));
    let speeds = ab.path.segment_speeds(&g).unwrap();
    let mean = speeds.iter().sum::<f64>() / speeds.len() as f64;
    assert!(speeds.iter().all(|s| (s - mean).abs() <= 0.05 * mean));
    assert!(w1_bound_check(&g, &a, &b, ab.value).ok);
}

#[test]
fn w2_pure_endpoints_are_regularised() {
    let g = depolarizing(2).unwrap();
    let a = DensityMatrix::basis_state(2, 0).unwrap();
    let b = DensityMatrix::maximally_mixed(2);
    let r = w2_distance(&g, &a, &b, &W2Options::default()).unwrap();
    let levels = r.regularized.unwrap();
    assert_eq!(levels.len(), 3);
    assert!(levels[0].1 < levels[1].1 && levels[1].1 < levels[2].1 + 1e-9);
    assert!(r.value >= levels[2].1 - 1e-9);
}

#[test]
fn coupling_is_an_upper_bound() {
    let g = depolarizing(2).unwrap();
    let opts = W2Options::default();
    let a = random_density(2, 41, 0.05).unwrap();
    let b = random_density(2, 42, 0.05).unwrap();
    let c = coupling_w2(&g, &a, &b, &opts).unwrap();
    assert!(c.coupling.marginal_residual() < 1e-10);
    let w = w2_distance(&g, &a, &b, &opts).unwrap().value;
    assert!(w <= c.value + 3.0 * opts.tol);
    let same = coupling_w2(&g, &a, &a, &opts).unwrap();
    assert!(same.value < 1e-12);
}
