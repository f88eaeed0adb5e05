use etc_core::estimator::{
    epe_of_rule, etc_hat, Direction, LabeledSample, OperatingCondition, ThresholdRule, UnitCosts,
};
use etc_core::nulldist::{null_distribution, null_distribution_with, p_value, Memoization};
use etc_core::permutation::{etc_on_permutation, phi, rank_reduce, LabelPermutation, Orientation};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn arb_oc() -> impl Strategy<Value = OperatingCondition> {
    (1i64..6, 1i64..6, 1i64..10).prop_map(|(c0, c1, k)| OperatingCondition::from_ints(c0, c1, k, 10))
}

/// Distinct values with at least one label of each class.
fn arb_sample(max_n: usize) -> impl Strategy<Value = LabeledSample> {
    (2..=max_n)
        .prop_flat_map(|n| {
            (
                proptest::collection::hash_set(-1000i32..1000, n),
                proptest::collection::vec(0u8..2, n),
            )
        })
        .prop_filter("both classes", |(_, labels)| labels.contains(&0) && labels.contains(&1))
        .prop_map(|(values, labels)| {
            let values = values.into_iter().map(|v| v as f64 / 7.0).collect();
            LabeledSample::new(values, labels).unwrap()
        })
}

fn exhaustive_min(sample: &LabeledSample, oc: &OperatingCondition) -> BigRational {
    (1..=sample.n())
        .flat_map(|i| {
            [Direction::Below, Direction::AtOrAbove].map(|d| epe_of_rule(sample, oc, ThresholdRule::new(d, i)).unwrap())
        })
        .min()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn estimator_is_the_minimum_over_all_rules(sample in arb_sample(12), oc in arb_oc()) {
        let est = etc_hat(&sample, &oc).unwrap();
        prop_assert_eq!(&est.value, &exhaustive_min(&sample, &oc));
        prop_assert_eq!(&est.value, &epe_of_rule(&sample, &oc, est.rule).unwrap());
    }

    #[test]
    fn estimator_factors_through_ranks(sample in arb_sample(12), oc in arb_oc()) {
        let est = etc_hat(&sample, &oc).unwrap();
        let perm = rank_reduce(&sample).unwrap();
        prop_assert_eq!(est.value, etc_on_permutation(&perm, &oc).unwrap());
    }

    #[test]
    fn estimator_is_monotone_invariant(sample in arb_sample(12), oc in arb_oc(), scale in 0.05f64..0.5, shift in -3.0f64..3.0) {
        let est = etc_hat(&sample, &oc).unwrap();
        let moved: Vec<f64> = sample.values().iter().map(|&x| (scale * x + shift).exp()).collect();
        let moved = LabeledSample::new(moved, sample.labels().to_vec()).unwrap();
        prop_assert_eq!(est, etc_hat(&moved, &oc).unwrap());
    }

    #[test]
    fn statistic_is_bounded_and_decomposes(sample in arb_sample(12), oc in arb_oc()) {
        let est = etc_hat(&sample, &oc).unwrap();
        prop_assert!(est.value >= BigRational::zero());
        prop_assert!(est.value <= oc.max_statistic());
        let costs = UnitCosts::new(&oc, sample.n0(), sample.n1());
        prop_assert_eq!(&est.value, &costs.cost(est.fn_count, est.fp_count));
    }

    #[test]
    fn cell_map_agrees_with_statistic(labels in proptest::collection::vec(0u8..2, 2..14), oc in arb_oc()) {
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let p = LabelPermutation::new(labels).unwrap();
        let split = phi(&p, &oc).unwrap();
        let costs = UnitCosts::new(&oc, p.n0(), p.n1());
        prop_assert_eq!(costs.cost(split.cell.fn_count, split.cell.fp_count), etc_on_permutation(&p, &oc).unwrap());
        let representable = match split.orientation {
            Orientation::PositivesLeft => p.n0() - split.cell.fp_count + split.cell.fn_count >= 1,
            Orientation::PositivesRight => p.n1() - split.cell.fn_count + split.cell.fp_count >= 1,
        };
        prop_assert!(representable);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn p_value_is_monotone(n0 in 1usize..8, n1 in 1usize..8, oc in arb_oc()) {
        let nd = null_distribution(n0, n1, &oc).unwrap();
        let mut prev = BigRational::zero();
        for (v, _) in nd.support() {
            let p = p_value(&nd, v);
            prop_assert!(p > BigRational::zero());
            prop_assert!(p >= prev);
            prev = p;
        }
        prop_assert_eq!(p_value(&nd, nd.max_value()), BigRational::from_integer(1.into()));
    }

    #[test]
    fn memoization_is_transparent(n0 in 1usize..7, n1 in 1usize..7, oc in arb_oc()) {
        let a = null_distribution_with(n0, n1, &oc, Memoization::Enabled, false).unwrap();
        let b = null_distribution_with(n0, n1, &oc, Memoization::Disabled, true).unwrap();
        prop_assert_eq!(a, b);
    }
}
