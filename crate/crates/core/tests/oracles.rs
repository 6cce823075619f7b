mod common;

use common::*;
use qms_core::curvature::{b_value, quad_form_gradient};
use qms_core::entropic::spectral_gap;
use qms_core::generator::{builtin, depolarizing, thermal_qubit};
use qms_core::operator::{frobenius, random_density, random_matrix, random_traceless_hermitian, seeded_rng, CMat};
use qms_core::transport::{apply_rho_omega, metric_operator, transport_plan};
use rand::Rng;

#[test]
fn rho_omega_matches_integral_form() {
    let mut rng = seeded_rng(11);
    for d in 2..=4 {
        for seed in 0..5 {
            let rho = random_density(d, 100 + seed, 0.01).unwrap();
            let a = random_matrix(d, &mut rng);
            let omega = rng.random_range(-2.0..2.0);
            let exact = apply_rho_omega(&rho, omega, &a).unwrap();
            let quad = rho_omega_quadrature(&rho, omega, &a, 40);
            assert!(frobenius(&(exact - &quad)) < 1e-12 * frobenius(&quad).max(1.0));
        }
    }
}

#[test]
fn quad_form_gradient_matches_chi_quadrature() {
    let mut rng = seeded_rng(12);
    for name in ["thermal_qubit(1.3)", "depolarizing(3)", "dephasing(3)"] {
        let g = builtin(name).unwrap();
        let d = g.dim();
        let rho = random_density(d, 3, 0.02).unwrap();
        let u = random_traceless_hermitian(d, &mut rng);
        let m = quad_form_gradient(&g, &rho, &u).unwrap();
        for _ in 0..3 {
            let a = random_traceless_hermitian(d, &mut rng);
            let exact = (&a * &m).trace().re;
            let chi = chi_directional_derivative(&g, &rho, &u, &a, 40);
            assert!(
                (exact - chi).abs() <= 1e-8 * chi.abs().max(1e-3),
                "{name}: {exact} vs {chi}"
            );
        }
    }
}

#[test]
fn b_value_is_entropy_curvature_along_geodesics() {
    let mut rng = seeded_rng(13);
    let g = thermal_qubit(0.8).unwrap();
    for seed in 0..3 {
        let rho = random_density(2, 40 + seed, 0.05).unwrap();
        let u = random_traceless_hermitian(2, &mut rng);
        let op = metric_operator(&g, &rho).unwrap();
        let c = op.basis().coords(&u);
        let u = u.scale(1.0 / c.dot(&op.apply_coords(&c)).sqrt());
        let b = b_value(&g, &rho, &u).unwrap();
        let fd = geodesic_second_derivative(&g, &rho, &u);
        assert!(rel_err(b, fd) < 1e-6, "{b} vs {fd}");
    }
}

#[test]
fn transport_plan_matches_vertex_enumeration() {
    let mut rng = seeded_rng(14);
    for n in 2..=4 {
        for _ in 0..5 {
            let mut a: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
            let mut b: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
            let (sa, sb) = (a.iter().sum::<f64>(), b.iter().sum::<f64>());
            a.iter_mut().for_each(|v| *v /= sa);
            b.iter_mut().for_each(|v| *v /= sb);
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random_range(0.0..2.0)).collect())
                .collect();
            let plan = transport_plan(&a, &b, &cost).unwrap();
            let value: f64 = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| plan[i][j] * cost[i][j])
                .sum();
            let brute = transport_cost_brute_force(&a, &b, &cost);
            assert!((value - brute).abs() < 1e-12, "{value} vs {brute}");
        }
    }
}

#[test]
fn gap_matches_liouvillian_spectrum() {
    for name in [
        "depolarizing(2)",
        "dephasing(2)",
        "thermal_qubit(1.0)",
        "thermal_qubit(0)",
        "depolarizing(3)",
        "dephasing(3)",
    ] {
        let g = builtin(name).unwrap();
        let gap = spectral_gap(&g).unwrap().value;
        let brute = brute_force_gap(&g);
        assert!((gap - brute).abs() < 1e-10, "{name}: {gap} vs {brute}");
        assert!(liouvillian_eigenvalues(&g)
            .iter()
            .all(|z| z.im.abs() < 1e-10 && z.re < 1e-10));
    }
}

#[test]
fn liouvillian_reproduces_heisenberg_action() {
    let mut rng = seeded_rng(15);
    let g = depolarizing(3).unwrap();
    let x = random_matrix(3, &mut rng);
    let vx = nalgebra::DVector::from_column_slice(x.as_slice());
    let lx = liouvillian(&g) * vx;
    let expected = g.heisenberg(&x);
    let got = CMat::from_column_slice(3, 3, lx.as_slice());
    assert!(frobenius(&(got - &expected)) < 1e-12 * frobenius(&expected));
    assert!((gauss(8, 0.0, 2.0).iter().map(|(_, w)| w).sum::<f64>() - 2.0).abs() < 1e-14);
}
