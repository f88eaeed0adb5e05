use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::counting::{CountingEngine, Memoization};
use crate::error::{Error, Result};
use crate::estimator::{validate_oc, OperatingCondition, UnitCosts};
use crate::permutation::CellIndex;
use crate::rational::{binomial, format_decimal, format_exact, from_uint};

/// Exact null distribution of the statistic for fixed `(n0, n1, oc)`.
///
/// Counts are over the `C(n0+n1, n0)` equally likely label permutations.
#[derive(Debug, Clone)]
pub struct NullDistribution {
    n0: usize,
    n1: usize,
    oc: OperatingCondition,
    cells: BTreeMap<CellIndex, BigUint>,
    support: Vec<(BigRational, BigUint)>,
    total: BigUint,
    cumulative: Vec<BigUint>,
}

impl PartialEq for NullDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.n0 == other.n0
            && self.n1 == other.n1
            && self.oc == other.oc
            && self.cells == other.cells
            && self.support == other.support
            && self.total == other.total
    }
}

impl Eq for NullDistribution {}

impl NullDistribution {
    /// Assembles the distribution from per-cell counts (orientations summed).
    /// Zero-count cells are dropped; counts must add up to `C(n, n0)`.
    pub fn from_cells(
        n0: usize,
        n1: usize,
        oc: OperatingCondition,
        cells: BTreeMap<CellIndex, BigUint>,
    ) -> Result<Self> {
        let cells: BTreeMap<_, _> = cells.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let total = binomial(n0 + n1, n0);
        let sum: BigUint = cells.values().sum();
        if sum != total {
            return Err(Error::PartitionSumMismatch {
                got: sum.to_string(),
                expected: total.to_string(),
            });
        }
        let costs = UnitCosts::new(&oc, n0, n1);
        let mut grouped: BTreeMap<BigRational, BigUint> = BTreeMap::new();
        for (cell, count) in &cells {
            *grouped.entry(costs.cost(cell.fn_count, cell.fp_count)).or_default() += count;
        }
        let support: Vec<_> = grouped.into_iter().collect();
        Ok(Self::assemble(n0, n1, oc, cells, support, total))
    }

    pub(crate) fn assemble(
        n0: usize,
        n1: usize,
        oc: OperatingCondition,
        cells: BTreeMap<CellIndex, BigUint>,
        support: Vec<(BigRational, BigUint)>,
        total: BigUint,
    ) -> Self {
        let cumulative = support
            .iter()
            .scan(BigUint::zero(), |acc, (_, c)| {
                *acc += c;
                Some(acc.clone())
            })
            .collect();
        NullDistribution {
            n0,
            n1,
            oc,
            cells,
            support,
            total,
            cumulative,
        }
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn oc(&self) -> &OperatingCondition {
        &self.oc
    }

    pub fn cells(&self) -> &BTreeMap<CellIndex, BigUint> {
        &self.cells
    }

    /// `(value, count)` pairs, values strictly increasing.
    pub fn support(&self) -> &[(BigRational, BigUint)] {
        &self.support
    }

    pub fn total(&self) -> &BigUint {
        &self.total
    }

    pub fn matches(&self, n0: usize, n1: usize, oc: &OperatingCondition) -> bool {
        self.n0 == n0 && self.n1 == n1 && &self.oc == oc
    }

    fn ratio_of(&self, count: &BigUint) -> BigRational {
        BigRational::new(
            BigInt::from(count.clone()),
            BigInt::from(self.total.clone()),
        )
    }

    /// `P[ETC = value]`.
    pub fn probability_at(&self, value: &BigRational) -> BigRational {
        match self.support.binary_search_by(|(v, _)| v.cmp(value)) {
            Ok(i) => self.ratio_of(&self.support[i].1),
            Err(_) => BigRational::zero(),
        }
    }

    /// `P[ETC <= value]`.
    pub fn cdf(&self, value: &BigRational) -> BigRational {
        let below = self.support.partition_point(|(v, _)| v <= value);
        if below == 0 {
            BigRational::zero()
        } else {
            self.ratio_of(&self.cumulative[below - 1])
        }
    }

    pub fn max_value(&self) -> &BigRational {
        &self.support.last().expect("support is never empty").0
    }

    /// CSV with columns `value,exact_value,probability,cumulative`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["value", "exact_value", "probability", "cumulative"])?;
        for ((value, count), cum) in self.support.iter().zip(&self.cumulative) {
            w.write_record([
                format_decimal(value, 17),
                format_exact(value),
                format_decimal(&self.ratio_of(count), 17),
                format_decimal(&self.ratio_of(cum), 17),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Exact null distribution via the recursive counting engine.
pub fn null_distribution(n0: usize, n1: usize, oc: &OperatingCondition) -> Result<NullDistribution> {
    null_distribution_with(n0, n1, oc, Memoization::Enabled, true)
}

pub fn null_distribution_with(
    n0: usize,
    n1: usize,
    oc: &OperatingCondition,
    memo: Memoization,
    parallel: bool,
) -> Result<NullDistribution> {
    let oc = validate_oc(oc, true)?;
    let engine = CountingEngine::new(n0, n1, &oc, memo)?;
    let cells = engine
        .all_cells(parallel)
        .into_iter()
        .map(|(cell, [l, r])| (cell, l + r))
        .collect();
    NullDistribution::from_cells(n0, n1, oc, cells)
}

/// Left-tail p-value `P[ETC <= observed]`; small errors are the extreme ones.
pub fn p_value(nd: &NullDistribution, observed: &BigRational) -> BigRational {
    if observed.is_negative() {
        return BigRational::zero();
    }
    nd.cdf(observed)
}

/// `C(n, n0)` as a rational, handy for exact expected values in tests.
pub fn permutation_count(n0: usize, n1: usize) -> BigRational {
    from_uint(&binomial(n0 + n1, n0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permutation::nulldist_bruteforce;
    use crate::rational::ratio;
    use num_traits::One;

    fn oc(c0: i64, c1: i64, n: i64, d: i64) -> OperatingCondition {
        OperatingCondition::from_ints(c0, c1, n, d)
    }

    #[test]
    fn mass_at_zero_is_two_orderings() {
        let nd = null_distribution(9, 9, &oc(1, 2, 1, 2)).unwrap();
        assert_eq!(nd.total(), &BigUint::from(48620u32));
        assert_eq!(nd.probability_at(&BigRational::zero()), ratio(2, 48620));
        assert_eq!(p_value(&nd, &BigRational::zero()), ratio(2, 48620));
    }

    #[test]
    fn matches_bruteforce_small() {
        for (n0, n1) in [(2, 2), (3, 3), (2, 5), (4, 3)] {
            let o = oc(1, 1, 1, 2);
            assert_eq!(null_distribution(n0, n1, &o).unwrap(), nulldist_bruteforce(n0, n1, &o).unwrap());
        }
    }

    #[test]
    fn cdf_reaches_one_at_bound() {
        for o in [oc(1, 2, 1, 2), oc(1, 3, 3, 10), oc(1, 1, 1, 4)] {
            let nd = null_distribution(5, 7, &o).unwrap();
            assert_eq!(p_value(&nd, &o.max_statistic()), BigRational::one());
            assert!(nd.max_value() <= &o.max_statistic());
            assert_eq!(p_value(&nd, &ratio(1000, 1)), BigRational::one());
        }
    }

    #[test]
    fn mid_support_cdf_agrees_with_oracle() {
        let o = oc(1, 1, 1, 2);
        let nd = null_distribution(3, 3, &o).unwrap();
        let oracle = nulldist_bruteforce(3, 3, &o).unwrap();
        for (v, _) in oracle.support() {
            assert_eq!(p_value(&nd, v), oracle.cdf(v));
        }
        // between support points the CDF is flat
        let (v0, v1) = (&nd.support()[0].0, &nd.support()[1].0);
        let mid = (v0 + v1) / BigRational::from_integer(2.into());
        assert_eq!(p_value(&nd, &mid), p_value(&nd, v0));
    }

    #[test]
    fn degenerate_and_mismatch_errors() {
        assert!(matches!(
            null_distribution(3, 3, &oc(1, 1, 0, 1)),
            Err(Error::DegenerateOperatingCondition)
        ));
        let mut cells = BTreeMap::new();
        cells.insert(CellIndex::new(0, 0), BigUint::from(3u32));
        assert!(matches!(
            NullDistribution::from_cells(1, 1, oc(1, 1, 1, 2), cells),
            Err(Error::PartitionSumMismatch { .. })
        ));
    }

    #[test]
    fn csv_export() {
        let nd = null_distribution(1, 1, &oc(1, 1, 1, 2)).unwrap();
        let mut out = Vec::new();
        nd.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "value,exact_value,probability,cumulative\n0,0/1,1,1\n"
        );
    }
}
