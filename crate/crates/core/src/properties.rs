//! Property tests over random models and parameters.

use crate::degrees::{degree_mgf, degree_mixture};
use crate::edge_ldp::{edge_cgf, edge_rate, typical_edge_density};
use crate::fixedpoint::{residual, solve_z_star};
use crate::oracle::{
    brute_force_log_partition, exact_degree_mgf, exact_edge_mgf, exact_log_partition, ExactInstance,
};
use crate::spin_ldp::spin_rate;
use crate::thermo::{annealed_pressure, magnetization};
use crate::{ModelPoint, WeightModel};
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = WeightModel> {
    prop::collection::vec((0.2f64..2.0, 0.05f64..1.0), 1..=3).prop_map(|pairs| {
        let atoms: Vec<f64> = pairs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p.0;
                Some(*acc)
            })
            .collect();
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let probs: Vec<f64> = pairs.iter().map(|p| p.1 / total).collect();
        WeightModel::new(&atoms, &probs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fixed_point_is_odd_in_the_field(model in model_strategy(), beta in 0.0f64..2.0, b in 0.01f64..2.0) {
        let theta = beta.sinh();
        let up = solve_z_star(theta, b, &model).unwrap().z_star;
        let down = solve_z_star(theta, -b, &model).unwrap().z_star;
        prop_assert_eq!(up, -down);
        prop_assert!(up > 0.0);
        prop_assert!(residual(up, theta, b, &model).abs() < 1e-10);
    }

    #[test]
    fn pressure_is_even_and_convex_in_the_field(model in model_strategy(), beta in 0.0f64..1.5, b in 0.05f64..1.5) {
        let p = |x: f64| annealed_pressure(&ModelPoint::new(beta, x, model.clone()).unwrap()).unwrap();
        let h = 1e-2;
        prop_assert!((p(b) - p(-b)).abs() < 1e-12);
        prop_assert!(p(b + h) - 2.0 * p(b) + p(b - h) >= -1e-12);
    }

    #[test]
    fn magnetization_is_monotone_in_the_field(model in model_strategy(), beta in 0.0f64..1.5, b in -1.5f64..1.5) {
        let m = |x: f64| magnetization(&ModelPoint::new(beta, x, model.clone()).unwrap()).unwrap();
        let (lo, hi) = (m(b), m(b + 0.05));
        prop_assert!(lo.abs() < 1.0 && hi.abs() < 1.0);
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn spin_rate_is_nonnegative_and_symmetric(beta in 0.0f64..1.2, b in -0.8f64..0.8, m in -0.9f64..0.9) {
        let model = WeightModel::new(&[1.0, 3.0], &[0.5, 0.5]).unwrap();
        let a = spin_rate(m, &ModelPoint::new(beta, b, model.clone()).unwrap()).unwrap().value;
        let r = spin_rate(-m, &ModelPoint::new(beta, -b, model).unwrap()).unwrap().value;
        prop_assert!(a >= -1e-10);
        prop_assert!((a - r).abs() < 1e-8);
    }

    #[test]
    fn edge_rate_vanishes_only_at_typical_density(beta in 0.0f64..1.5, b in -1.0f64..1.0, f in 0.3f64..3.0) {
        let model = WeightModel::new(&[1.0, 3.0], &[0.5, 0.5]).unwrap();
        let p = ModelPoint::new(beta, b, model).unwrap();
        let y0 = typical_edge_density(&p).unwrap();
        let r = edge_rate(f * y0, &p).unwrap();
        prop_assert!(r.finite && r.value >= -1e-12);
        if (f - 1.0).abs() > 0.05 {
            prop_assert!(r.value > 0.0);
        }
        prop_assert!(edge_cgf(0.0, &p).unwrap().value == 0.0);
    }

    #[test]
    fn degree_laws_are_normalized(model in model_strategy(), beta in 0.0f64..2.0, b in -1.0f64..1.0, w in 0.1f64..5.0) {
        let p = ModelPoint::new(beta, b, model).unwrap();
        prop_assert_eq!(degree_mgf(0.0, w, &p).unwrap(), 1.0);
        let mix = degree_mixture(w, &p).unwrap();
        prop_assert!(mix.valid_pmf);
        prop_assert!((mix.weight_plus + mix.weight_minus - 1.0).abs() < 1e-12);
        prop_assert!((mix.mgf(0.0) - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn type_reduction_matches_enumeration(
        counts in prop::collection::vec(0usize..=4, 1..=3),
        beta in 0.0f64..2.0,
        b in -1.0f64..1.0,
    ) {
        prop_assume!(counts.iter().sum::<usize>() > 0);
        let atoms: Vec<f64> = (0..counts.len()).map(|k| 1.0 + 1.5 * k as f64).collect();
        let inst = ExactInstance::new(&counts, &atoms, beta, b).unwrap();
        let a = exact_log_partition(&inst).unwrap();
        let e = brute_force_log_partition(&inst.weight_sequence().unwrap(), beta, b).unwrap();
        prop_assert!((a - e).abs() <= 1e-10 * e.abs().max(1.0));
    }

    #[test]
    fn exact_generating_functions_are_one_at_zero_tilt(
        n0 in 1usize..30,
        n1 in 0usize..30,
        beta in 0.0f64..2.0,
        b in -1.0f64..1.0,
    ) {
        let inst = ExactInstance::new(&[n0, n1], &[1.0, 3.0], beta, b).unwrap();
        prop_assert!((exact_edge_mgf(0.0, &inst).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((exact_degree_mgf(0.0, 0, &inst).unwrap() - 1.0).abs() < 1e-12);
    }
}
