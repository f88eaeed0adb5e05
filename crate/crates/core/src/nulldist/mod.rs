//! Exact null distribution: recursive cell counting, assembly into a
//! distribution over statistic values, p-values and on-disk caching.

pub mod cache;
pub mod counting;
pub mod distribution;

pub use cache::{cache_file_name, load_nd, render_nd, save_nd, NdCache};
pub use counting::{
    count_cell, count_quadrant, count_quadrant_with, CountingEngine, Domain, Level, Memoization, QuadrantSpec,
};
pub use distribution::{null_distribution, null_distribution_with, p_value, permutation_count, NullDistribution};
