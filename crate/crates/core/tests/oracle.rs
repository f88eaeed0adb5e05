use std::collections::BTreeMap;

use etc_core::estimator::OperatingCondition;
use etc_core::nulldist::{null_distribution, CountingEngine, Memoization};
use etc_core::permutation::{enumerate_cells_bruteforce, nulldist_bruteforce, Orientation};
use etc_core::rational::binomial;
use num_bigint::BigUint;

fn oc_grid() -> Vec<OperatingCondition> {
    [(1, 1, 1, 2), (1, 2, 1, 2), (2, 1, 1, 2), (1, 3, 3, 10), (3, 1, 7, 10), (1, 1, 1, 4)]
        .into_iter()
        .map(|(c0, c1, n, d)| OperatingCondition::from_ints(c0, c1, n, d))
        .collect()
}

#[test]
fn per_orientation_counts_match_enumeration() {
    for oc in oc_grid() {
        for n0 in 1..=5 {
            for n1 in 1..=5 {
                let engine = CountingEngine::new(n0, n1, &oc, Memoization::Enabled).unwrap();
                let mut got = BTreeMap::new();
                for (cell, counts) in engine.all_cells(false) {
                    for (o, c) in Orientation::BOTH.into_iter().zip(counts) {
                        if c != BigUint::ZERO {
                            got.insert((cell, o), c);
                        }
                    }
                }
                assert_eq!(got, enumerate_cells_bruteforce(n0, n1, &oc).unwrap(), "n0={n0} n1={n1} {oc}");
            }
        }
    }
}

#[test]
fn distributions_match_enumeration() {
    for oc in oc_grid() {
        for (n0, n1) in [(6, 4), (3, 8), (7, 7)] {
            assert_eq!(null_distribution(n0, n1, &oc).unwrap(), nulldist_bruteforce(n0, n1, &oc).unwrap());
        }
    }
}

#[test]
fn counts_partition_the_permutations() {
    for oc in oc_grid() {
        for (n0, n1) in [(1, 1), (10, 2), (9, 9), (15, 12)] {
            let engine = CountingEngine::new(n0, n1, &oc, Memoization::Enabled).unwrap();
            let sum: BigUint = engine.all_cells(true).into_values().flat_map(|c| c).sum();
            assert_eq!(sum, binomial(n0 + n1, n0));
        }
    }
}

#[test]
fn csv_export_matches_oracle_export() {
    let oc = OperatingCondition::from_ints(1, 1, 1, 2);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    null_distribution(3, 3, &oc).unwrap().write_csv(&mut a).unwrap();
    nulldist_bruteforce(3, 3, &oc).unwrap().write_csv(&mut b).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().last().unwrap().split(',').last().unwrap(), "1");
}
