//! Exact, distribution-free test of whether a real-valued variable separates
//! two classes by a single threshold.
//!
//! The statistic is the cost-weighted empirical prediction error of the best
//! threshold classifier under an operating condition (misclassification
//! costs and class prevalence). Under the null hypothesis of equal
//! class-conditional distributions its law depends only on the class sizes
//! and the operating condition, and is computed exactly by counting label
//! permutations.
//!
//! ```
//! use etc_core::estimator::{etc_hat, LabeledSample, OperatingCondition};
//! use etc_core::nulldist::{null_distribution, p_value};
//!
//! let oc = OperatingCondition::parse("1", "1", "0.5").unwrap();
//! let sample = LabeledSample::new(vec![0.3, 1.1, 1.9, 2.4, 3.0, 3.8], vec![0, 0, 0, 1, 1, 1]).unwrap();
//! let est = etc_hat(&sample, &oc).unwrap();
//! let nd = null_distribution(3, 3, &oc).unwrap();
//! assert_eq!(p_value(&nd, &est.value).to_string(), "1/10");
//! ```

pub mod error;
pub mod estimator;
pub mod filter;
pub mod nulldist;
pub mod permutation;
pub mod rational;
pub mod simbench;

pub use error::{Error, Result};
