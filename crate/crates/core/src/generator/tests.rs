use super::*;
use crate::operator::{
    c64, random_density, random_density_with, random_hermitian, random_matrix, seeded_rng, trace_norm_hermitian,
};

fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)])
}

fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)])
}

fn sorted_eigs(m: &CMat) -> Vec<C64> {
    let mut e: Vec<C64> = nalgebra::Schur::new(m.clone())
        .eigenvalues()
        .unwrap()
        .iter()
        .copied()
        .collect();
    e.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    e
}

#[test]
fn depolarizing_acts_as_replacement() {
    let mut rng = seeded_rng(3);
    for d in 2..=3 {
        let g = depolarizing(d).unwrap();
        let x = random_matrix(d, &mut rng);
        let expected = CMat::identity(d, d) * (x.trace() / d as f64) - &x;
        assert!(frobenius(&(g.heisenberg(&x) - expected)) < 1e-12);
        assert!(g.is_primitive());
    }
}

#[test]
fn depolarizing_qubit_spectrum() {
    let g = depolarizing(2).unwrap();
    let mut vals = g.gns_spectrum().values.clone();
    vals.sort_by(f64::total_cmp);
    for (v, e) in vals.iter().zip([-1.0, -1.0, -1.0, 0.0]) {
        assert!((v - e).abs() < 1e-12);
    }
}

#[test]
fn pauli_x_on_maximally_mixed() {
    let sigma = DensityMatrix::maximally_mixed(2);
    let g = DetailedBalanceGenerator::build_from_raw(&sigma, &[pauli_x()], &[0.7]).unwrap();
    assert_eq!(g.modes().len(), 1);
    let m = &g.modes()[0];
    assert!(m.omega.abs() < 1e-15);
    assert!((m.c - 0.7).abs() < 1e-12);
    let mut rng = seeded_rng(5);
    let x = random_matrix(2, &mut rng);
    let sx = pauli_x();
    let expected = (&sx * &x * &sx - &x) * c64(2.0 * 0.7, 0.0);
    assert!(frobenius(&(g.heisenberg(&x) - expected)) < 1e-12);
    assert!(frobenius(&g.heisenberg(&CMat::identity(2, 2))) < 1e-14);
}

#[test]
fn identity_raw_operator_is_degenerate() {
    let sigma = DensityMatrix::maximally_mixed(3);
    let r = DetailedBalanceGenerator::build_from_raw(&sigma, &[CMat::identity(3, 3)], &[1.0]);
    assert!(matches!(r, Err(QmsError::DegenerateGenerator)));
}

#[test]
fn raw_build_rejects_non_faithful_sigma() {
    let sigma = DensityMatrix::basis_state(2, 0).unwrap();
    let r = DetailedBalanceGenerator::build_from_raw(&sigma, &[pauli_x()], &[1.0]);
    assert!(matches!(r, Err(QmsError::NotFaithful { .. })));
}

#[test]
fn thermal_qubit_modes() {
    let beta = 1.3;
    let g = thermal_qubit(beta).unwrap();
    assert_eq!(g.modes().len(), 2);
    let (a, b) = (&g.modes()[0], &g.modes()[1]);
    assert!((a.omega + beta).abs() < 1e-12 && (b.omega - beta).abs() < 1e-12);
    assert!((a.c - b.c).abs() < 1e-14);
    // omega = -beta belongs to the lowering operator.
    assert!(a.l[(1, 0)].norm() < 1e-14 && (a.l[(0, 1)].norm() - 2f64.sqrt()).abs() < 1e-12);
    assert!(frobenius(&(g.modes()[g.adjoint_index(0)].l.clone() - a.l.adjoint())) < 1e-14);
    assert!(g.is_primitive());
}

#[test]
fn single_commuting_mode_is_not_primitive() {
    let sigma = DensityMatrix::maximally_mixed(2);
    let g = DetailedBalanceGenerator::new(sigma, vec![JumpMode::new(pauli_z(), 0.5, 0.0)]).unwrap();
    assert_eq!(g.kernel_dimension(), 2);
    assert!(matches!(
        g.require_primitive(),
        Err(QmsError::NotPrimitive { kernel_dim: 2 })
    ));
    assert!(g.k_lindblad().is_infinite());
}

#[test]
fn dephasing_is_primitive_with_unit_qubit_gap() {
    for d in 2..=4 {
        assert!(dephasing(d).unwrap().is_primitive(), "d={d}");
    }
    let g = dephasing(2).unwrap();
    let vals = &g.gns_spectrum().values;
    assert!((vals[vals.len() - 2] + 1.0).abs() < 1e-12);
}

#[test]
fn random_raw_generators_pass_all_invariants() {
    let mut rng = seeded_rng(11);
    for d in 2..=4 {
        for trial in 0..3 {
            let sigma = random_density_with(d, 0.02, &mut rng).unwrap();
            let raw: Vec<CMat> = (0..2).map(|_| random_matrix(d, &mut rng)).collect();
            let g = DetailedBalanceGenerator::build_from_raw(&sigma, &raw, &[1.0, 0.5]).unwrap();
            let diag = DetailedBalanceGenerator::diagnose(g.sigma(), g.modes()).unwrap();
            assert!(diag.all_pass(), "d={d} trial={trial}: {:?}", diag.checks);
            assert!(g.is_primitive());
            assert!(g.k_lindblad().is_finite() && g.k_lindblad() > 0.0);
        }
    }
}

#[test]
fn detailed_balance_on_random_pairs() {
    let mut rng = seeded_rng(12);
    for g in [thermal_qubit(0.8).unwrap(), depolarizing(3).unwrap()] {
        let d = g.dim();
        let s = g.sigma().matrix();
        for _ in 0..20 {
            let x = random_matrix(d, &mut rng);
            let y = random_matrix(d, &mut rng);
            let lhs = gns_inner(s, &g.heisenberg(&x), &y);
            let rhs = gns_inner(s, &x, &g.heisenberg(&y));
            assert!((lhs - rhs).norm() < 1e-9 * frobenius(&x) * frobenius(&y));
        }
    }
}

#[test]
fn schrodinger_is_hilbert_schmidt_adjoint() {
    let mut rng = seeded_rng(13);
    let g = thermal_qubit(0.4).unwrap();
    for _ in 0..10 {
        let x = random_matrix(2, &mut rng);
        let rho = random_density(2, 1, 0.1).unwrap();
        let lhs = hs_inner(&x, &g.schrodinger(rho.matrix()));
        let rhs = hs_inner(&g.heisenberg(&x), rho.matrix());
        assert!((lhs - rhs).norm() < 1e-12);
        assert!(g.schrodinger(rho.matrix()).trace().norm() < 1e-12);
    }
    let h = g.superoperator_of(Picture::Heisenberg);
    let s = g.superoperator_of(Picture::Schrodinger);
    assert!(frobenius(&(h.adjoint().matrix() - s.matrix())) < 1e-12);
    let eh = sorted_eigs(h.matrix());
    let es = sorted_eigs(s.matrix());
    for (a, b) in eh.iter().zip(&es) {
        assert!((a - b).norm() < 1e-9);
        assert!(a.im.abs() < 1e-9 && a.re < 1e-12);
    }
}

#[test]
fn evolution_laws() {
    let g = thermal_qubit(1.0).unwrap();
    let rho = random_density(2, 21, 0.05).unwrap();
    assert_eq!(g.evolve(&rho, 0.0).unwrap().matrix(), rho.matrix());
    let a = g.evolve(&g.evolve(&rho, 0.3).unwrap(), 0.5).unwrap();
    let b = g.evolve(&rho, 0.8).unwrap();
    assert!(frobenius(&(a.matrix() - b.matrix())) < 1e-9);
    let gap = -g.gns_spectrum().values[g.dim() * g.dim() - 2];
    let late = g.evolve(&rho, 50.0 / gap).unwrap();
    assert!(trace_norm_hermitian(&(late.matrix() - g.sigma().matrix())) < 1e-8);
    assert!(g.evolve(&rho, -1.0).is_err());
}

#[test]
fn heisenberg_evolution_is_unital_and_dual() {
    let mut rng = seeded_rng(14);
    let g = depolarizing(3).unwrap();
    let x = random_hermitian(3, &mut rng);
    let rho = random_density(3, 2, 0.01).unwrap();
    let lhs = hs_inner(&g.heisenberg_evolve(&x, 0.7).unwrap(), rho.matrix());
    let rhs = hs_inner(&x, g.evolve(&rho, 0.7).unwrap().matrix());
    assert!((lhs - rhs).norm() < 1e-12);
    let id = g.heisenberg_evolve(&CMat::identity(3, 3), 2.0).unwrap();
    assert!(frobenius(&(id - CMat::identity(3, 3))) < 1e-12);
}

#[test]
fn json_round_trip_and_defects() {
    let g = thermal_qubit(0.9).unwrap();
    let text = g.to_json();
    let back = DetailedBalanceGenerator::from_json(&text).unwrap();
    assert_eq!(back.to_json(), text);
    assert_eq!(back.spec_hash(), g.spec_hash());

    let mut file = GeneratorFile::from_json(&text).unwrap();
    file.modes[0].l[0][0] = [0.3, 0.0];
    match file.into_generator() {
        Err(QmsError::InvariantViolation { condition, .. }) => {
            assert!(condition.contains("condition 1") || condition.contains("condition 2"))
        }
        other => panic!("expected invariant violation, got {other:?}"),
    }
    let mut file = GeneratorFile::from_json(&text).unwrap();
    file.modes[0].l[0][0] = [0.3, 0.0];
    file.modes[0].l[1][1] = [0.3, 0.0];
    let (sigma, modes) = file.decode().unwrap();
    let diag = DetailedBalanceGenerator::diagnose(&sigma, &modes).unwrap();
    assert!(!diag.checks[1].pass);
    assert!(DetailedBalanceGenerator::from_json("{not json").is_err());
}

#[test]
fn scaling_scales_spectrum() {
    let g = thermal_qubit(0.5).unwrap();
    let h = g.scaled(3.0).unwrap();
    for (a, b) in g.gns_spectrum().values.iter().zip(&h.gns_spectrum().values) {
        assert!((3.0 * a - b).abs() < 1e-12);
    }
    assert!((g.k_lindblad() / 3.0 - h.k_lindblad()).abs() < 1e-12);
}
