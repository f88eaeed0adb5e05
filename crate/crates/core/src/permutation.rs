//! The permutation space: labels ordered by increasing value.
//!
//! Under the null hypothesis every arrangement of `n1` positives and `n0`
//! negatives is equally likely, and the statistic depends on a sample only
//! through this arrangement. This module holds the reduction, the
//! permutation-level statistic, the cell map and a brute-force enumerator
//! that serves as the oracle for the counting engine.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::ops::{Add, Sub};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{validate_oc, LabeledSample, OperatingCondition, UnitCosts};
use crate::nulldist::NullDistribution;

/// Largest `n0 + n1` enumerated by default.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 28;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelPermutation {
    labels: Vec<u8>,
    n1: usize,
}

impl LabelPermutation {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidSample("labels must be 0 or 1".into()));
        }
        let n1 = labels.iter().filter(|&&l| l == 1).count();
        Ok(LabelPermutation { labels, n1 })
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n0(&self) -> usize {
        self.labels.len() - self.n1
    }
}

/// A `(fn, fp)` cell of the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub fn_count: usize,
    pub fp_count: usize,
}

impl CellIndex {
    pub fn new(fn_count: usize, fp_count: usize) -> Self {
        CellIndex { fn_count, fp_count }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    PositivesLeft,
    PositivesRight,
}

impl Orientation {
    pub const BOTH: [Orientation; 2] = [Orientation::PositivesLeft, Orientation::PositivesRight];

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::PositivesLeft => "positives-left",
            Orientation::PositivesRight => "positives-right",
        }
    }
}

/// Optimal threshold of a label sequence: the cell, the orientation and the
/// 1-based position `index` of the first instance right of the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Split {
    pub cell: CellIndex,
    pub orientation: Orientation,
    pub index: usize,
}

/// Finds the optimal split of `labels` among admissible threshold indices.
///
/// The positives-left cost at index `i` is `a*(#neg before i) + b*(#pos from i)`,
/// the positives-right cost `a*(#neg from i) + b*(#pos before i)`. The smallest
/// minimizing index is taken, and positives-left wins ties between the two
/// orientations. Index 1 must be admissible.
pub(crate) fn optimal_split(labels: &[u8], costs: &UnitCosts, admissible: impl Fn(usize) -> bool) -> Split {
    const SMALL: i128 = i64::MAX as i128;
    match costs.scaled_i128() {
        Some((a, b)) if a <= SMALL && b <= SMALL => scan(labels, a, b, admissible),
        _ => {
            let (a, b) = costs.scaled();
            scan(labels, a, b, admissible)
        }
    }
}

fn scan<T>(labels: &[u8], a: T, b: T, admissible: impl Fn(usize) -> bool) -> Split
where
    T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T>,
{
    let n = labels.len();
    let n1 = labels.iter().filter(|&&l| l == 1).count();
    let n0 = n - n1;

    // left(1) = b*n1, right(1) = a*n0
    let mut left = (0..n1).fold(T::zero(), |acc, _| acc + b.clone());
    let mut right = (0..n0).fold(T::zero(), |acc, _| acc + a.clone());
    let mut best_left: Option<(T, usize)> = None;
    let mut best_right: Option<(T, usize)> = None;
    for i in 1..=n {
        if admissible(i) {
            if best_left.as_ref().is_none_or(|(v, _)| left < *v) {
                best_left = Some((left.clone(), i));
            }
            if best_right.as_ref().is_none_or(|(v, _)| right < *v) {
                best_right = Some((right.clone(), i));
            }
        }
        if labels[i - 1] == 0 {
            left = left + a.clone();
            right = right - a.clone();
        } else {
            left = left - b.clone();
            right = right + b.clone();
        }
    }
    let (lv, li) = best_left.expect("index 1 is always admissible");
    let (rv, ri) = best_right.expect("index 1 is always admissible");

    let ones_before = |i: usize| labels[..i - 1].iter().filter(|&&l| l == 1).count();
    if lv <= rv {
        let pos_before = ones_before(li);
        let neg_before = li - 1 - pos_before;
        Split {
            cell: CellIndex::new(n1 - pos_before, neg_before),
            orientation: Orientation::PositivesLeft,
            index: li,
        }
    } else {
        let pos_before = ones_before(ri);
        let neg_before = ri - 1 - pos_before;
        Split {
            cell: CellIndex::new(pos_before, n0 - neg_before),
            orientation: Orientation::PositivesRight,
            index: ri,
        }
    }
}

/// Labels ordered by increasing value.
pub fn rank_reduce(sample: &LabeledSample) -> Result<LabelPermutation> {
    if sample.has_cross_class_ties() {
        return Err(Error::TiedAcrossClasses);
    }
    let labels = sample.order().into_iter().map(|i| sample.labels()[i]).collect();
    LabelPermutation::new(labels)
}

fn require_both_classes(p: &LabelPermutation) -> Result<()> {
    if p.n0() == 0 || p.n1() == 0 {
        return Err(Error::SingleClassSample);
    }
    Ok(())
}

/// Minimum over both orientations and all threshold positions.
pub fn etc_on_permutation(p: &LabelPermutation, oc: &OperatingCondition) -> Result<BigRational> {
    validate_oc(oc, false)?;
    require_both_classes(p)?;
    let costs = UnitCosts::new(oc, p.n0(), p.n1());
    let split = optimal_split(p.labels(), &costs, |_| true);
    Ok(costs.cost(split.cell.fn_count, split.cell.fp_count))
}

/// The cell map: which `(fn, fp)` cell and orientation a permutation falls in.
pub fn phi(p: &LabelPermutation, oc: &OperatingCondition) -> Result<Split> {
    validate_oc(oc, true)?;
    require_both_classes(p)?;
    let costs = UnitCosts::new(oc, p.n0(), p.n1());
    Ok(optimal_split(p.labels(), &costs, |_| true))
}

pub type CellTally = BTreeMap<(CellIndex, Orientation), BigUint>;

/// Tallies every one of the `C(n0+n1, n0)` permutations by its cell.
pub fn enumerate_cells_bruteforce(n0: usize, n1: usize, oc: &OperatingCondition) -> Result<CellTally> {
    enumerate_cells_bruteforce_with_limit(n0, n1, oc, DEFAULT_ENUMERATION_LIMIT)
}

pub fn enumerate_cells_bruteforce_with_limit(
    n0: usize,
    n1: usize,
    oc: &OperatingCondition,
    limit: usize,
) -> Result<CellTally> {
    validate_oc(oc, true)?;
    let n = n0 + n1;
    if n > limit {
        return Err(Error::EnumerationTooLarge { n, n0, limit });
    }
    if n0 == 0 || n1 == 0 {
        return Err(Error::SingleClassSample);
    }
    let costs = UnitCosts::new(oc, n0, n1);
    let mut buf = Vec::with_capacity(n);
    let raw = walk(&mut buf, n0, n1, &costs, 0);
    Ok(raw.into_iter().map(|(k, v)| (k, BigUint::from(v))).collect())
}

type RawTally = HashMap<(CellIndex, Orientation), u64>;

// Lexicographic depth-first walk over label vectors; the first few levels
// fork onto the rayon pool and the partial tallies are merged.
fn walk(buf: &mut Vec<u8>, zeros: usize, ones: usize, costs: &UnitCosts, depth: usize) -> RawTally {
    const FORK_DEPTH: usize = 6;
    if zeros == 0 && ones == 0 {
        let split = optimal_split(buf, costs, |_| true);
        return HashMap::from([((split.cell, split.orientation), 1)]);
    }
    if depth < FORK_DEPTH && zeros > 0 && ones > 0 && zeros + ones > 12 {
        let mut left_buf = buf.clone();
        left_buf.push(0);
        let mut right_buf = buf.clone();
        right_buf.push(1);
        let (mut l, r) = rayon::join(
            || walk(&mut left_buf, zeros - 1, ones, costs, depth + 1),
            || walk(&mut right_buf, zeros, ones - 1, costs, depth + 1),
        );
        merge(&mut l, r);
        return l;
    }
    let mut tally = RawTally::new();
    if zeros > 0 {
        buf.push(0);
        merge(&mut tally, walk(buf, zeros - 1, ones, costs, depth + 1));
        buf.pop();
    }
    if ones > 0 {
        buf.push(1);
        merge(&mut tally, walk(buf, zeros, ones - 1, costs, depth + 1));
        buf.pop();
    }
    tally
}

fn merge(into: &mut RawTally, from: RawTally) {
    for (k, v) in from {
        *into.entry(k).or_insert(0) += v;
    }
}

/// The null distribution assembled from brute-force tallies.
pub fn nulldist_bruteforce(n0: usize, n1: usize, oc: &OperatingCondition) -> Result<NullDistribution> {
    let tally = enumerate_cells_bruteforce(n0, n1, oc)?;
    let mut cells: BTreeMap<CellIndex, BigUint> = BTreeMap::new();
    for ((cell, _), count) in tally {
        *cells.entry(cell).or_default() += count;
    }
    NullDistribution::from_cells(n0, n1, oc.clone(), cells)
}

/// Writes a tally as CSV with columns `fn,fp,orientation,count`.
pub fn write_tally_csv<W: Write>(tally: &CellTally, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["fn", "fp", "orientation", "count"])?;
    for ((cell, orientation), count) in tally {
        w.write_record([
            cell.fn_count.to_string(),
            cell.fp_count.to_string(),
            orientation.as_str().to_string(),
            count.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{binomial, ratio};

    fn perm(labels: &[u8]) -> LabelPermutation {
        LabelPermutation::new(labels.to_vec()).unwrap()
    }

    fn oc(c0: i64, c1: i64, n: i64, d: i64) -> OperatingCondition {
        OperatingCondition::from_ints(c0, c1, n, d)
    }

    #[test]
    fn rank_reduce_examples() {
        let s = LabeledSample::new(vec![3.0, 1.0, 2.0], vec![1, 0, 0]).unwrap();
        assert_eq!(rank_reduce(&s).unwrap().labels(), &[0, 0, 1]);
        let s = LabeledSample::new(vec![0.4, 1.2, 2.5, 3.1], vec![0, 0, 1, 1]).unwrap();
        assert_eq!(rank_reduce(&s).unwrap().labels(), &[0, 0, 1, 1]);
        let s = LabeledSample::new(vec![1.0, 1.0], vec![0, 1]).unwrap();
        assert!(matches!(rank_reduce(&s), Err(Error::TiedAcrossClasses)));
    }

    #[test]
    fn etc_on_permutation_examples() {
        assert_eq!(etc_on_permutation(&perm(&[1, 1, 0, 0]), &oc(1, 1, 1, 2)).unwrap(), ratio(0, 1));
        assert_eq!(etc_on_permutation(&perm(&[0, 1, 0, 1]), &oc(1, 1, 1, 2)).unwrap(), ratio(1, 4));
        assert_eq!(etc_on_permutation(&perm(&[0, 1]), &oc(1, 2, 1, 2)).unwrap(), ratio(0, 1));
    }

    #[test]
    fn phi_examples() {
        let o = oc(1, 1, 1, 2);
        let s = phi(&perm(&[1, 1, 0, 0]), &o).unwrap();
        assert_eq!((s.cell, s.orientation), (CellIndex::new(0, 0), Orientation::PositivesLeft));
        let s = phi(&perm(&[0, 0, 1, 1]), &o).unwrap();
        assert_eq!((s.cell, s.orientation), (CellIndex::new(0, 0), Orientation::PositivesRight));
        let s = phi(&perm(&[0, 1, 0, 1]), &o).unwrap();
        assert_eq!(
            (s.cell, s.orientation, s.index),
            (CellIndex::new(0, 1), Orientation::PositivesRight, 2)
        );
        assert!(matches!(
            phi(&perm(&[0, 1]), &oc(1, 1, 0, 1)),
            Err(Error::DegenerateOperatingCondition)
        ));
    }

    #[test]
    fn enumeration_small_cases() {
        let t = enumerate_cells_bruteforce(1, 1, &oc(1, 1, 1, 2)).unwrap();
        let expected: CellTally = [
            ((CellIndex::new(0, 0), Orientation::PositivesLeft), BigUint::from(1u32)),
            ((CellIndex::new(0, 0), Orientation::PositivesRight), BigUint::from(1u32)),
        ]
        .into_iter()
        .collect();
        assert_eq!(t, expected);

        let t = enumerate_cells_bruteforce(3, 3, &oc(1, 1, 1, 2)).unwrap();
        let total: BigUint = t.values().sum();
        assert_eq!(total, BigUint::from(20u32));
    }

    #[test]
    fn enumeration_reproduces_worked_example() {
        let t = enumerate_cells_bruteforce(9, 9, &oc(1, 2, 1, 2)).unwrap();
        let key = (CellIndex::new(1, 2), Orientation::PositivesLeft);
        assert_eq!(t[&key], BigUint::from(210u32));
        let total: BigUint = t.values().sum();
        assert_eq!(total, binomial(18, 9));
    }

    #[test]
    fn enumeration_guard() {
        assert!(matches!(
            enumerate_cells_bruteforce_with_limit(10, 10, &oc(1, 1, 1, 2), 12),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn bruteforce_nd_small() {
        let nd = nulldist_bruteforce(1, 1, &oc(1, 1, 1, 2)).unwrap();
        assert_eq!(nd.support().len(), 1);
        assert_eq!(nd.probability_at(&ratio(0, 1)), ratio(1, 1));

        // n0 = n1 = 2: [0,0,1,1] and [1,1,0,0] separate; [0,1,0,1], [1,0,1,0]
        // and [1,0,0,1] cost 1/4; [0,1,1,0] costs 1/4 too.
        let nd = nulldist_bruteforce(2, 2, &oc(1, 1, 1, 2)).unwrap();
        let values: Vec<_> = nd.support().iter().map(|(v, _)| v.clone()).collect();
        assert_eq!(values, vec![ratio(0, 1), ratio(1, 4)]);
        assert_eq!(nd.probability_at(&ratio(0, 1)), ratio(1, 3));
        assert_eq!(nd.probability_at(&ratio(1, 4)), ratio(2, 3));
    }

    #[test]
    fn label_complement_symmetry() {
        let o = oc(1, 1, 1, 2);
        for (n0, n1) in [(2, 5), (3, 4), (1, 6)] {
            let a = nulldist_bruteforce(n0, n1, &o).unwrap();
            let b = nulldist_bruteforce(n1, n0, &o).unwrap();
            assert_eq!(a.support(), b.support());
        }
    }

    #[test]
    fn tally_csv_layout() {
        let t = enumerate_cells_bruteforce(1, 1, &oc(1, 1, 1, 2)).unwrap();
        let mut out = Vec::new();
        write_tally_csv(&t, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "fn,fp,orientation,count\n0,0,positives-left,1\n0,0,positives-right,1\n"
        );
    }
}
