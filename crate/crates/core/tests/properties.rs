use meixner::apc::moment_equal;
use meixner::classify::decouple;
use meixner::graded::{bracket, GradedOperator};
use meixner::lie::{extract_coefficients, jacobi_audit};
use meixner::meixner1d::{build_triple, lie_closure_1d, JacobiSpec};
use meixner::sampling::{random_mixed_spec, random_mixing_matrix};
use meixner::vectors2d::{build_mixed, mix_linear, ApcSystem, MixedPreservationSpec};
use nalgebra::Matrix2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn system(seed: u64, n: usize) -> (MixedPreservationSpec, Matrix2<f64>, ApcSystem) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = random_mixed_spec(&mut rng).with_truncation(n);
    let m = random_mixing_matrix(&mut rng, 50.0);
    let sys = mix_linear(&build_mixed(&spec).unwrap(), &m).unwrap();
    (spec, m, sys)
}

fn signed_permutations() -> Vec<Matrix2<f64>> {
    let mut out = Vec::new();
    for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        out.push(Matrix2::new(a, 0.0, 0.0, b));
        out.push(Matrix2::new(0.0, a, b, 0.0));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn one_dimensional_brackets(
        alpha in -2.0f64..2.0,
        alpha0 in -1.0f64..1.0,
        beta in 0.0f64..2.0,
        t in 0.05f64..2.0,
    ) {
        let spec = JacobiSpec { alpha0, ..JacobiSpec::infinite(alpha, beta, t) };
        let tr = build_triple(&spec, 9).unwrap();
        let g = tr.grading().clone();
        let law = meixner::graded::number_operator(&g)
            .scale(2.0 * beta)
            .add_scaled(t, &GradedOperator::identity(&g))
            .unwrap();
        prop_assert!(bracket(&tr.minus, &tr.plus).unwrap().max_abs_diff_valid(&law).unwrap() < 1e-10);
        let mz = bracket(&tr.minus, &tr.zero).unwrap();
        prop_assert!(mz.max_abs_diff_valid(&tr.minus.scale(alpha)).unwrap() < 1e-10);
        let closed = lie_closure_1d(&tr).unwrap().closed;
        prop_assert_eq!(closed, alpha.abs() > 1e-3 || beta < 1e-12);
    }

    #[test]
    fn adjoint_pairs_and_antisymmetry(seed in any::<u64>()) {
        let (_, _, sys) = system(seed, 7);
        prop_assert_eq!(&sys.x.minus.adjoint(), &sys.x.plus);
        prop_assert_eq!(&sys.y.plus.adjoint(), &sys.y.minus);
        let ab = bracket(&sys.x.minus, &sys.y.zero).unwrap();
        let ba = bracket(&sys.y.zero, &sys.x.minus).unwrap();
        prop_assert!(ab.add_scaled(1.0, &ba).unwrap().max_abs_valid() < 1e-12);
    }

    #[test]
    fn mixing_composes(seed in any::<u64>()) {
        let (_, _, sys) = system(seed, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let m1 = random_mixing_matrix(&mut rng, 20.0);
        let m2 = random_mixing_matrix(&mut rng, 20.0);
        let a = mix_linear(&mix_linear(&sys, &m1).unwrap(), &m2).unwrap();
        let b = mix_linear(&sys, &(m2 * m1)).unwrap();
        prop_assert!(moment_equal(&a, &b, 6, 1e-10).unwrap().equal);
    }

    #[test]
    fn mixed_coefficients_satisfy_jacobi(seed in any::<u64>()) {
        let (_, _, sys) = system(seed, 7);
        let cf = extract_coefficients(&sys).unwrap();
        prop_assert!(cf.is_closed());
        for check in jacobi_audit(&cf) {
            prop_assert!(check.pass, "{:?}", check);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn decoupling_is_certified_and_stable(seed in any::<u64>()) {
        let (spec, _, sys) = system(seed, 10);
        let report = decouple(&sys, 8, 1e-8).unwrap();
        let s = report.transform_matrix();
        prop_assert!(s.determinant().abs() > 1e-12);
        let target = build_mixed(&report.target).unwrap();
        prop_assert!(moment_equal(&mix_linear(&sys, &s).unwrap(), &target, 8, 1e-8).unwrap().equal);

        // a second mixing of the same pair leads to an equivalent target
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let m = random_mixing_matrix(&mut rng, 50.0);
        let other = decouple(&mix_linear(&build_mixed(&spec).unwrap(), &m).unwrap(), 8, 1e-8).unwrap();
        let other_target = build_mixed(&other.target).unwrap();
        let equivalent = signed_permutations().iter().any(|p| {
            moment_equal(&target, &mix_linear(&other_target, p).unwrap(), 6, 1e-8).unwrap().equal
        });
        prop_assert!(equivalent);

        // running the pipeline on its own output changes nothing
        let again = decouple(&target, 8, 1e-8).unwrap();
        prop_assert!((again.transform_matrix() - Matrix2::identity()).abs().max() < 1e-8);
    }
}
