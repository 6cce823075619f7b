use proptest::prelude::*;
use qms_core::entropic::{relative_entropy, variance};
use qms_core::generator::{builtin, DetailedBalanceGenerator};
use qms_core::operator::{
    frobenius, hs_inner, kernel_phi, random_density, random_hermitian, seeded_rng, CMat, DensityMatrix,
};
use qms_core::transport::{apply_rho_omega, metric_inner};

const BUILTINS: [&str; 5] = [
    "depolarizing(2)",
    "dephasing(2)",
    "thermal_qubit(0.7)",
    "depolarizing(3)",
    "dephasing(3)",
];

fn generator(i: usize) -> DetailedBalanceGenerator {
    builtin(BUILTINS[i % BUILTINS.len()]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_homogeneous_and_flips_with_omega(a in 1e-3..10.0f64, b in 1e-3..10.0f64, t in 0.1..5.0f64, w in -3.0..3.0f64) {
        let p = kernel_phi(a, b, w).unwrap();
        prop_assert!((kernel_phi(t * a, t * b, w).unwrap() - t * p).abs() <= 1e-12 * t * p);
        prop_assert!((kernel_phi(b, a, -w).unwrap() - p).abs() <= 1e-12 * p);
        prop_assert!(p > 0.0);
    }

    #[test]
    fn kernel_lies_between_log_mean_bounds(a in 1e-3..10.0f64, b in 1e-3..10.0f64) {
        let p = kernel_phi(a, b, 0.0).unwrap();
        prop_assert!(p <= 0.5 * (a + b) * (1.0 + 1e-12));
        prop_assert!(p >= (a * b).sqrt() * (1.0 - 1e-12));
    }

    #[test]
    fn rho_omega_is_positive_on_hermitian_squares(seed in 0u64..10_000, d in 2usize..5, w in -2.0..2.0f64) {
        let rho = random_density(d, seed, 1e-3).unwrap();
        let mut rng = seeded_rng(seed ^ 0xabcd);
        let x = random_hermitian(d, &mut rng);
        let y = apply_rho_omega(&rho, w, &x).unwrap();
        prop_assert!(hs_inner(&x, &y).re > 0.0);
        prop_assert!(hs_inner(&x, &y).im.abs() <= 1e-12 * frobenius(&x).powi(2));
    }

    #[test]
    fn metric_is_symmetric_and_positive(seed in 0u64..10_000, g in 0usize..5) {
        let gen = generator(g);
        let d = gen.dim();
        let rho = random_density(d, seed, 1e-3).unwrap();
        let mut rng = seeded_rng(seed + 1);
        let u = random_hermitian(d, &mut rng);
        let v = random_hermitian(d, &mut rng);
        let uv = metric_inner(&gen, &rho, &u, &v).unwrap();
        let vu = metric_inner(&gen, &rho, &v, &u).unwrap();
        prop_assert!((uv - vu).abs() <= 1e-12 * (1.0 + uv.abs()));
        prop_assert!(metric_inner(&gen, &rho, &u, &u).unwrap() > 0.0);
    }

    #[test]
    fn evolution_contracts_relative_entropy(seed in 0u64..10_000, g in 0usize..5, t in 0.01..2.0f64) {
        let gen = generator(g);
        let rho = random_density(gen.dim(), seed, 1e-4).unwrap();
        let rho_t = gen.evolve(&rho, t).unwrap();
        prop_assert!((rho_t.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho_t.min_eigenvalue() > 0.0);
        prop_assert!(relative_entropy(&rho_t, gen.sigma()) <= relative_entropy(&rho, gen.sigma()) + 1e-12);
    }

    #[test]
    fn variance_is_shift_invariant(seed in 0u64..10_000, shift in -5.0..5.0f64) {
        let sigma = random_density(3, seed, 1e-2).unwrap();
        let mut rng = seeded_rng(seed);
        let f = random_hermitian(3, &mut rng);
        let shifted = &f + CMat::identity(3, 3).scale(shift);
        let v1 = variance(&sigma, &f).unwrap();
        let v2 = variance(&sigma, &shifted).unwrap();
        prop_assert!((v1 - v2).abs() <= 1e-10 * (1.0 + v1));
        prop_assert!(v1 >= 0.0);
    }
}

#[test]
fn maximally_mixed_has_zero_entropy_to_itself() {
    let m = DensityMatrix::maximally_mixed(4);
    assert!(relative_entropy(&m, &m).abs() < 1e-14);
}
