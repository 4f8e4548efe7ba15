use proptest::prelude::*;

use qchain::exactnum::rational;
use qchain::format::{distribution_from_str, distribution_to_string};
use qchain::markov::{
    build_distribution, compose, exact_setup, k_step_distribution, simulate, ChainConfig,
    ConditionalDistribution, MassPolicy,
};
use qchain::qcore::{al_salam_chihara, QParams};
use qchain::spectra::verify_support_roots;
use qchain::Scalar;

fn ratios() -> impl Strategy<Value = (i64, i64)> {
    (-20i64..=20, 1i64..=9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn float_masses_are_a_probability_vector(m in 2usize..=6, q in 1.05f64..=10.0, y in -5.0f64..=5.0) {
        let params = QParams::new(q).unwrap();
        let dist = build_distribution(m, &y, &params, MassPolicy::Audit).unwrap();
        prop_assert!((dist.total_mass() - 1.0).abs() <= 1e-10);
        prop_assert!(dist.negative_atoms().is_empty(), "negative mass: {:?}", dist.negative_atoms());
        let report = verify_support_roots(m, &y, &params, 1e-9);
        prop_assert!(report.is_ok(), "{:?}", report);
    }

    #[test]
    fn float_json_round_trips(m in 2usize..=5, q in 1.1f64..=6.0, y in -3.0f64..=3.0) {
        let params = QParams::new(q).unwrap();
        let dist = build_distribution(m, &y, &params, MassPolicy::Audit).unwrap();
        let back: ConditionalDistribution<f64> = distribution_from_str(&distribution_to_string(&dist)).unwrap();
        prop_assert_eq!(back, dist);
    }

    #[test]
    fn k_steps_are_iterated_compositions(m in 2usize..=3, k in 1usize..=3, y in -2.0f64..=2.0) {
        let params = QParams::new(2.25).unwrap();
        let mut dist = build_distribution(m, &y, &params, MassPolicy::Audit).unwrap();
        for _ in 1..k {
            dist = compose(&dist, m, MassPolicy::Audit).unwrap();
        }
        let direct = k_step_distribution(m, k, &y, &params, MassPolicy::Audit).unwrap();
        prop_assert_eq!(dist.order(), direct.order());
        for (k, atom) in direct.atoms() {
            let other = dist.atom(*k).unwrap();
            prop_assert!((other.mass - atom.mass).abs() < 1e-9);
            prop_assert!(other.value.agrees(&atom.value, 1e-9));
        }
    }

    #[test]
    fn simulation_is_a_function_of_the_seed(seed in any::<u64>(), steps in 0usize..30) {
        let config = ChainConfig::new(4.0, 3, 0.5, steps).with_seed(seed);
        let a = simulate(&config).unwrap();
        prop_assert_eq!(a.states.len(), steps + 1);
        prop_assert_eq!(a, simulate(&config).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn exact_atoms_are_roots_of_p(m in 2usize..=5, s in prop::sample::select(vec![(2i64, 1i64), (3, 2), (5, 2)]), y in ratios()) {
        let q = rational(s.0 * s.0, s.1 * s.1);
        let (params, y) = exact_setup(&q, &rational(y.0, y.1)).unwrap();
        let dist = build_distribution(m, &y, &params, MassPolicy::Audit).unwrap();
        let rho = params.rho(m);
        for atom in dist.atoms().values() {
            prop_assert!(al_salam_chihara(m, &atom.value, &y, &rho, params.q()).unwrap().is_zero());
        }
        prop_assert!(dist.negative_atoms().is_empty());
        prop_assert!(dist.total_mass() == Scalar::one());
    }
}
