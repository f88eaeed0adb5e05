//! Exact cell counts by recursive nested sums.
//!
//! A permutation in cell `(fn, fp)` splits at its threshold into a positive
//! domain (`tp` positives, `fp` false positives) and a negative domain (`tn`
//! negatives, `fn` false negatives). Optimality of the threshold constrains
//! each domain separately, so a cell count per orientation is the product
//! of two domain counts.
//!
//! Positions inside a domain are numbered 1, 2, ... outward from the
//! threshold and the false instances are numbered from the outermost one
//! inward, `i_1 > i_2 > ... > i_f`. Every constraint on the `k`-th false
//! instance depends only on `k` and its own position, which gives
//!
//! ```text
//! count = sum_{i_1=start_1}^{stop_1} sum_{i_2=start_2}^{min(stop_2, i_1-1)} ... 1
//! ```
//!
//! with `start_k = l1 + (f - k + 1)`, where `l1` is the least number of true
//! instances between the threshold and the `k`-th false instance keeping the
//! threshold optimal, and `stop_k = min(D - (k - 1), start_k + l2)`, where
//! `l2` is the largest outward shift before the opposite orientation at the
//! same threshold becomes at least as good. `D` is the domain size.
//!
//! Which comparisons are strict follows from the two tie conventions of the
//! cell map (smallest minimizing index; positives-left on orientation ties):
//!
//! | quadrant          | `l1` test  | `l2` test |
//! |-------------------|------------|-----------|
//! | positive, left    | `>`        | `<=`      |
//! | negative, left    | `>=`       | `<=`      |
//! | positive, right   | `>=`       | `<`       |
//! | negative, right   | `>`        | `<`       |
//!
//! The last position of the positive domain in the positives-right
//! orientation is the end of the sample, where the threshold search stops.
//! There the outermost false positive is held to the strict whole-domain
//! condition `tp*c1*pi1/n1 > fp*c0*pi0/n0` instead of the `l1` test.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Sub};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{validate_oc, OperatingCondition, UnitCosts};
use crate::permutation::{CellIndex, Orientation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    /// Instances on the positive side of the threshold (`tp` + `fp`).
    Positive,
    /// Instances on the negative side of the threshold (`tn` + `fn`).
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadrantSpec {
    pub domain: Domain,
    pub orientation: Orientation,
    pub cell: CellIndex,
    pub n0: usize,
    pub n1: usize,
    pub oc: OperatingCondition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Memoization {
    Enabled,
    Disabled,
}

/// Summation range of one level; empty when `start > stop`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Level {
    pub start: usize,
    pub stop: usize,
}

impl Level {
    const EMPTY: Level = Level { start: 1, stop: 0 };

    fn is_empty(&self) -> bool {
        self.start > self.stop
    }
}

#[derive(Debug, Clone)]
enum Weights {
    Small { per_fp: i128, per_fn: i128 },
    Big { per_fp: BigInt, per_fn: BigInt },
}

/// Counts cells for one `(n0, n1, oc)`.
#[derive(Debug)]
pub struct CountingEngine {
    n0: usize,
    n1: usize,
    oc: OperatingCondition,
    weights: Weights,
    memo: Memoization,
    calls: AtomicU64,
}

impl CountingEngine {
    pub fn new(n0: usize, n1: usize, oc: &OperatingCondition, memo: Memoization) -> Result<Self> {
        let oc = validate_oc(oc, true)?;
        if n0 == 0 || n1 == 0 {
            return Err(Error::SingleClassSample);
        }
        let costs = UnitCosts::new(&oc, n0, n1);
        const SMALL: i128 = 1 << 60;
        let weights = match costs.scaled_i128() {
            Some((per_fp, per_fn)) if per_fp < SMALL && per_fn < SMALL => Weights::Small { per_fp, per_fn },
            _ => {
                let (per_fp, per_fn) = costs.scaled();
                Weights::Big { per_fp, per_fn }
            }
        };
        Ok(CountingEngine {
            n0,
            n1,
            oc,
            weights,
            memo,
            calls: AtomicU64::new(0),
        })
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

    /// Number of recursive evaluations performed so far.
    pub fn recursion_calls(&self) -> u64 {
        self.calls.load(AtomicOrdering::Relaxed)
    }

    fn check_cell(&self, cell: CellIndex) -> Result<()> {
        if cell.fn_count > self.n1 || cell.fp_count > self.n0 {
            return Err(Error::InvalidCell {
                fn_count: cell.fn_count,
                fp_count: cell.fp_count,
                n0: self.n0,
                n1: self.n1,
            });
        }
        Ok(())
    }

    /// The per-level summation ranges of a quadrant.
    pub fn levels(&self, domain: Domain, orientation: Orientation, cell: CellIndex) -> Result<Vec<Level>> {
        self.check_cell(cell)?;
        let levels = match &self.weights {
            Weights::Small { per_fp, per_fn } => {
                quadrant_levels(domain, orientation, cell, self.n0, self.n1, *per_fp, *per_fn)
            }
            Weights::Big { per_fp, per_fn } => {
                quadrant_levels(domain, orientation, cell, self.n0, self.n1, per_fp.clone(), per_fn.clone())
            }
        };
        Ok(levels)
    }

    /// Number of favorable arrangements of one domain.
    pub fn quadrant(&self, domain: Domain, orientation: Orientation, cell: CellIndex) -> Result<BigUint> {
        let levels = self.levels(domain, orientation, cell)?;
        Ok(self.nested_sum(&levels))
    }

    /// `[positives-left, positives-right]` counts of a cell.
    pub fn cell_by_orientation(&self, cell: CellIndex) -> Result<[BigUint; 2]> {
        self.check_cell(cell)?;
        let tp = self.n1 - cell.fn_count;
        let tn = self.n0 - cell.fp_count;
        Ok(Orientation::BOTH.map(|orientation| {
            // the threshold index must stay within 1..=n
            let representable = match orientation {
                Orientation::PositivesLeft => tn + cell.fn_count >= 1,
                Orientation::PositivesRight => tp + cell.fp_count >= 1,
            };
            if !representable {
                return BigUint::zero();
            }
            let pos = self.quadrant(Domain::Positive, orientation, cell).expect("cell checked");
            if pos.is_zero() {
                return pos;
            }
            pos * self.quadrant(Domain::Negative, orientation, cell).expect("cell checked")
        }))
    }

    pub fn cell(&self, cell: CellIndex) -> Result<BigUint> {
        let [left, right] = self.cell_by_orientation(cell)?;
        Ok(left + right)
    }

    /// Counts of every cell, optionally in parallel over `fn`.
    pub fn all_cells(&self, parallel: bool) -> BTreeMap<CellIndex, [BigUint; 2]> {
        let row = |fn_count: usize| -> Vec<(CellIndex, [BigUint; 2])> {
            (0..=self.n0)
                .map(|fp_count| {
                    let cell = CellIndex::new(fn_count, fp_count);
                    (cell, self.cell_by_orientation(cell).expect("cell in range"))
                })
                .collect()
        };
        if parallel {
            (0..=self.n1).into_par_iter().flat_map_iter(row).collect()
        } else {
            (0..=self.n1).flat_map(row).collect()
        }
    }

    fn nested_sum(&self, levels: &[Level]) -> BigUint {
        if levels.is_empty() {
            return BigUint::from(1u32);
        }
        if levels[0].is_empty() {
            return BigUint::zero();
        }
        match self.memo {
            Memoization::Enabled => {
                let mut memo = HashMap::new();
                self.sum_memo(levels, 0, levels[0].stop, &mut memo)
            }
            Memoization::Disabled => self.sum_plain(levels, 0, levels[0].stop),
        }
    }

    // Sequences for levels k.. with i_k <= hi.
    fn sum_plain(&self, levels: &[Level], k: usize, hi: usize) -> BigUint {
        self.calls.fetch_add(1, AtomicOrdering::Relaxed);
        let start = levels[k].start;
        if hi < start {
            return BigUint::zero();
        }
        if k + 1 == levels.len() {
            return BigUint::from(hi - start + 1);
        }
        let next = levels[k + 1];
        (start..=hi)
            .map(|i| self.sum_plain(levels, k + 1, next.stop.min(i - 1)))
            .sum()
    }

    fn sum_memo(
        &self,
        levels: &[Level],
        k: usize,
        hi: usize,
        memo: &mut HashMap<(usize, usize), BigUint>,
    ) -> BigUint {
        if let Some(hit) = memo.get(&(k, hi)) {
            return hit.clone();
        }
        self.calls.fetch_add(1, AtomicOrdering::Relaxed);
        let start = levels[k].start;
        let value = if hi < start {
            BigUint::zero()
        } else if k + 1 == levels.len() {
            BigUint::from(hi - start + 1)
        } else {
            let next = levels[k + 1];
            let mut acc = BigUint::zero();
            for i in start..=hi {
                acc += self.sum_memo(levels, k + 1, next.stop.min(i - 1), memo);
            }
            acc
        };
        memo.insert((k, hi), value.clone());
        value
    }
}

fn quadrant_levels<T>(
    domain: Domain,
    orientation: Orientation,
    cell: CellIndex,
    n0: usize,
    n1: usize,
    per_fp: T,
    per_fn: T,
) -> Vec<Level>
where
    T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + From<u32>,
{
    let t = |x: usize| T::from(x.to_u32().expect("sample sizes fit in u32"));
    let (fn_count, fp_count) = (cell.fn_count, cell.fp_count);
    let (tp, tn) = (n1 - fn_count, n0 - fp_count);

    // cost of the chosen threshold vs. the opposite orientation at the same threshold
    let chosen = per_fp.clone() * t(fp_count) + per_fn.clone() * t(fn_count);
    let opposite = per_fp.clone() * t(tn) + per_fn.clone() * t(tp);

    let (false_count, size, true_weight, false_weight) = match domain {
        Domain::Positive => (fp_count, tp + fp_count, per_fn, per_fp),
        Domain::Negative => (fn_count, tn + fn_count, per_fp, per_fn),
    };
    let strict_near = matches!(
        (domain, orientation),
        (Domain::Positive, Orientation::PositivesLeft) | (Domain::Negative, Orientation::PositivesRight)
    );
    let strict_far = orientation == Orientation::PositivesRight;

    let mut levels = Vec::with_capacity(false_count);
    for k in 1..=false_count {
        let inner = false_count - k + 1;
        let cap = size - (k - 1);
        let near = |trues: usize, strict: bool| {
            let lhs = true_weight.clone() * t(trues);
            let rhs = false_weight.clone() * t(inner);
            if strict {
                lhs > rhs
            } else {
                lhs >= rhs
            }
        };
        // the k-th false instance at position start + shift leaves
        // l1 + shift true instances between it and the threshold
        let far = |trues: usize| {
            let lhs = chosen.clone() + true_weight.clone() * t(trues);
            let rhs = opposite.clone() + false_weight.clone() * t(false_count - k);
            if strict_far {
                lhs < rhs
            } else {
                lhs <= rhs
            }
        };

        let l1 = (0..=size).find(|&x| near(x, strict_near));
        let mut level = match l1 {
            Some(l1) if l1 + inner <= cap && far(l1) => {
                let start = l1 + inner;
                let l2 = (0..=cap - start).take_while(|&s| far(l1 + s)).last().unwrap_or(0);
                Level {
                    start,
                    stop: cap.min(start + l2),
                }
            }
            _ => Level::EMPTY,
        };

        if domain == Domain::Positive && orientation == Orientation::PositivesRight && k == 1 {
            // position `size` is the last instance of the sample
            let trues_at_end = size - inner;
            if near(trues_at_end, true) && far(trues_at_end) {
                if level.is_empty() {
                    level.start = size;
                }
                level.stop = size;
            } else {
                level.stop = level.stop.min(size - 1);
            }
        }
        levels.push(level);
    }
    levels
}

/// Count of one quadrant, memoized.
pub fn count_quadrant(spec: &QuadrantSpec) -> Result<BigUint> {
    count_quadrant_with(spec, Memoization::Enabled)
}

pub fn count_quadrant_with(spec: &QuadrantSpec, memo: Memoization) -> Result<BigUint> {
    CountingEngine::new(spec.n0, spec.n1, &spec.oc, memo)?.quadrant(spec.domain, spec.orientation, spec.cell)
}

/// `|S_left| + |S_right|` for one cell.
pub fn count_cell(cell: CellIndex, n0: usize, n1: usize, oc: &OperatingCondition) -> Result<BigUint> {
    CountingEngine::new(n0, n1, oc, Memoization::Enabled)?.cell(cell)
}
