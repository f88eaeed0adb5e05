//! Operating conditions, labeled samples and the ETC statistic: the
//! cost-weighted empirical prediction error of the best threshold classifier.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permutation::{self, LabelPermutation, Orientation, Split};
use crate::rational::{format_exact, parse_rational};

/// Misclassification costs `c0` (negatives) and `c1` (positives) together
/// with the positive-class prevalence `pi1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OperatingCondition {
    c0: BigRational,
    c1: BigRational,
    pi1: BigRational,
}

impl OperatingCondition {
    /// Builds the triple without validation; see [`validate_oc`].
    pub fn new(c0: BigRational, c1: BigRational, pi1: BigRational) -> Self {
        OperatingCondition { c0, c1, pi1 }
    }

    /// Parses decimal or `num/den` strings and checks the basic invariants.
    pub fn parse(c0: &str, c1: &str, pi1: &str) -> Result<Self> {
        let oc = OperatingCondition::new(parse_rational(c0)?, parse_rational(c1)?, parse_rational(pi1)?);
        validate_oc(&oc, false)
    }

    /// Small-integer convenience constructor: `c0`, `c1`, `pi1 = num/den`.
    pub fn from_ints(c0: i64, c1: i64, pi1_num: i64, pi1_den: i64) -> Self {
        OperatingCondition::new(
            BigRational::from_integer(c0.into()),
            BigRational::from_integer(c1.into()),
            BigRational::new(pi1_num.into(), pi1_den.into()),
        )
    }

    pub fn c0(&self) -> &BigRational {
        &self.c0
    }

    pub fn c1(&self) -> &BigRational {
        &self.c1
    }

    pub fn pi1(&self) -> &BigRational {
        &self.pi1
    }

    pub fn pi0(&self) -> BigRational {
        BigRational::one() - &self.pi1
    }

    /// `c0 * pi0`, the cost of classifying every negative as positive.
    pub fn negative_weight(&self) -> BigRational {
        &self.c0 * self.pi0()
    }

    /// `c1 * pi1`, the cost of classifying every positive as negative.
    pub fn positive_weight(&self) -> BigRational {
        &self.c1 * &self.pi1
    }

    /// Upper bound of the statistic, attained by the better trivial classifier.
    pub fn max_statistic(&self) -> BigRational {
        self.negative_weight().min(self.positive_weight())
    }
}

impl fmt::Display for OperatingCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "c0={}, c1={}, pi1={}",
            format_exact(&self.c0),
            format_exact(&self.c1),
            format_exact(&self.pi1)
        )
    }
}

/// Checks the operating-condition invariants. With `for_null` both classes
/// must carry positive weight, otherwise the null distribution collapses.
pub fn validate_oc(oc: &OperatingCondition, for_null: bool) -> Result<OperatingCondition> {
    if oc.c0.is_negative() || oc.c1.is_negative() {
        return Err(Error::NegativeCost);
    }
    if oc.pi1.is_negative() || oc.pi1 > BigRational::one() {
        return Err(Error::PrevalenceOutOfRange);
    }
    if for_null && (!oc.negative_weight().is_positive() || !oc.positive_weight().is_positive()) {
        return Err(Error::DegenerateOperatingCondition);
    }
    Ok(oc.clone())
}

/// Per-instance costs for a fixed `(n0, n1)`: one false positive costs
/// `c0*pi0/n0`, one false negative costs `c1*pi1/n1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitCosts {
    pub per_fp: BigRational,
    pub per_fn: BigRational,
}

impl UnitCosts {
    pub fn new(oc: &OperatingCondition, n0: usize, n1: usize) -> Self {
        assert!(n0 > 0 && n1 > 0, "both classes must be present");
        UnitCosts {
            per_fp: oc.negative_weight() / BigRational::from_integer(n0.into()),
            per_fn: oc.positive_weight() / BigRational::from_integer(n1.into()),
        }
    }

    /// Exact statistic value of a cell.
    pub fn cost(&self, fn_count: usize, fp_count: usize) -> BigRational {
        &self.per_fp * BigRational::from_integer(fp_count.into())
            + &self.per_fn * BigRational::from_integer(fn_count.into())
    }

    /// Both unit costs over a common denominator, as integers.
    pub fn scaled(&self) -> (BigInt, BigInt) {
        let den = self.per_fp.denom().lcm(self.per_fn.denom());
        let fp = (&self.per_fp * BigRational::from_integer(den.clone())).to_integer();
        let fn_ = (&self.per_fn * BigRational::from_integer(den)).to_integer();
        (fp, fn_)
    }

    /// Integer weights `(per_fp, per_fn)` if they fit in `i128`.
    pub fn scaled_i128(&self) -> Option<(i128, i128)> {
        let (fp, fn_) = self.scaled();
        Some((fp.to_i128()?, fn_.to_i128()?))
    }
}

/// Real values paired with 0/1 class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    values: Vec<f64>,
    labels: Vec<u8>,
}

impl LabeledSample {
    pub fn new(values: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if values.len() != labels.len() {
            return Err(Error::InvalidSample(format!(
                "{} values but {} labels",
                values.len(),
                labels.len()
            )));
        }
        if values.len() < 2 {
            return Err(Error::InvalidSample("need at least two observations".into()));
        }
        if let Some(i) = labels.iter().position(|&l| l > 1) {
            return Err(Error::InvalidSample(format!("label {} at index {i} is not 0 or 1", labels[i])));
        }
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::InvalidSample(format!("NaN value at index {i}")));
        }
        Ok(LabeledSample { values, labels })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn n1(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn n0(&self) -> usize {
        self.n() - self.n1()
    }

    /// Indices ordering the values ascending (stable).
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        idx
    }

    /// The `j`-th order statistic, `j` in `1..=n`.
    pub fn order_statistic(&self, j: usize) -> Result<f64> {
        if j == 0 || j > self.n() {
            return Err(Error::IndexOutOfRange { index: j, n: self.n() });
        }
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        Ok(v[j - 1])
    }

    /// Whether some value is shared by a positive and a negative instance.
    pub fn has_cross_class_ties(&self) -> bool {
        let order = self.order();
        order.windows(2).any(|w| {
            self.values[w[0]] == self.values[w[1]] && self.labels[w[0]] != self.labels[w[1]]
        })
    }

    fn require_both_classes(&self) -> Result<()> {
        if self.n0() == 0 || self.n1() == 0 {
            return Err(Error::SingleClassSample);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Positive region `(-inf, t)`.
    Below,
    /// Positive region `[t, inf)`.
    AtOrAbove,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Below => "below",
            Direction::AtOrAbove => "at-or-above",
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            Direction::Below => Orientation::PositivesLeft,
            Direction::AtOrAbove => Orientation::PositivesRight,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A threshold classifier with `t = x_(threshold_index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ThresholdRule {
    pub direction: Direction,
    pub threshold_index: usize,
}

impl ThresholdRule {
    pub fn new(direction: Direction, threshold_index: usize) -> Self {
        ThresholdRule { direction, threshold_index }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtcEstimate {
    pub value: BigRational,
    pub rule: ThresholdRule,
    pub fn_count: usize,
    pub fp_count: usize,
    pub tie_adjusted: bool,
}

impl EtcEstimate {
    fn from_split(split: &Split, costs: &UnitCosts) -> Self {
        let direction = match split.orientation {
            Orientation::PositivesLeft => Direction::Below,
            Orientation::PositivesRight => Direction::AtOrAbove,
        };
        EtcEstimate {
            value: costs.cost(split.cell.fn_count, split.cell.fp_count),
            rule: ThresholdRule::new(direction, split.index),
            fn_count: split.cell.fn_count,
            fp_count: split.cell.fp_count,
            tie_adjusted: false,
        }
    }
}

/// Empirical EPE of one threshold rule, evaluated on the raw values.
pub fn epe_of_rule(sample: &LabeledSample, oc: &OperatingCondition, rule: ThresholdRule) -> Result<BigRational> {
    sample.require_both_classes()?;
    let t = sample.order_statistic(rule.threshold_index)?;
    let (mut fp, mut fn_) = (0usize, 0usize);
    for (&x, &y) in sample.values.iter().zip(&sample.labels) {
        let positive = match rule.direction {
            Direction::Below => x < t,
            Direction::AtOrAbove => x >= t,
        };
        match (positive, y) {
            (true, 0) => fp += 1,
            (false, 1) => fn_ += 1,
            _ => {}
        }
    }
    Ok(UnitCosts::new(oc, sample.n0(), sample.n1()).cost(fn_, fp))
}

/// The ETC statistic of a tie-free sample.
///
/// Among minimizing rules the smallest threshold index wins, and positives
/// on the left win over positives on the right when both orientations
/// reach the minimum.
pub fn etc_hat(sample: &LabeledSample, oc: &OperatingCondition) -> Result<EtcEstimate> {
    validate_oc(oc, false)?;
    sample.require_both_classes()?;
    if sample.has_cross_class_ties() {
        return Err(Error::TiedAcrossClasses);
    }
    let perm = permutation::rank_reduce(sample)?;
    let costs = UnitCosts::new(oc, sample.n0(), sample.n1());
    let split = permutation::optimal_split(perm.labels(), &costs, |_| true);
    Ok(EtcEstimate::from_split(&split, &costs))
}

/// ETC with cross-class ties resolved against the alternative.
///
/// Thresholds may only fall between distinct values, so a tie group is
/// never split. This value is at least as large as the statistic under any
/// within-group ordering of labels. `tie_adjusted` is set when it exceeds
/// the statistic of one of the two extreme orderings (negatives first,
/// positives first).
pub fn etc_hat_conservative(sample: &LabeledSample, oc: &OperatingCondition) -> Result<EtcEstimate> {
    validate_oc(oc, false)?;
    sample.require_both_classes()?;
    if !sample.has_cross_class_ties() {
        return etc_hat(sample, oc);
    }
    let costs = UnitCosts::new(oc, sample.n0(), sample.n1());
    let order = sample.order();
    let sorted_values: Vec<f64> = order.iter().map(|&i| sample.values[i]).collect();
    let sorted_labels: Vec<u8> = order.iter().map(|&i| sample.labels[i]).collect();

    // threshold index i (1-based) is admissible iff it starts a tie group
    let group_start = |i: usize| i == 1 || sorted_values[i - 2] < sorted_values[i - 1];
    let split = permutation::optimal_split(&sorted_labels, &costs, group_start);
    let mut estimate = EtcEstimate::from_split(&split, &costs);

    let extremes = [false, true].map(|positives_first| {
        let perm = tie_ordering(&sorted_values, &sorted_labels, positives_first);
        let split = permutation::optimal_split(perm.labels(), &costs, |_| true);
        costs.cost(split.cell.fn_count, split.cell.fp_count)
    });
    estimate.tie_adjusted = extremes.iter().any(|v| estimate.value > *v);
    Ok(estimate)
}

/// Label permutation with every tie group ordered negatives-first or
/// positives-first.
fn tie_ordering(sorted_values: &[f64], sorted_labels: &[u8], positives_first: bool) -> LabelPermutation {
    let mut labels = Vec::with_capacity(sorted_labels.len());
    let mut start = 0;
    while start < sorted_values.len() {
        let mut end = start + 1;
        while end < sorted_values.len() && sorted_values[end] == sorted_values[start] {
            end += 1;
        }
        let mut group = sorted_labels[start..end].to_vec();
        group.sort_unstable();
        if positives_first {
            group.reverse();
        }
        labels.extend(group);
        start = end;
    }
    LabelPermutation::new(labels).expect("labels are 0/1")
}
