//! Data generators for the four studies.
//!
//! Every variable draws from its own ChaCha8 stream. The stream number packs
//! `(grid key, replication, variable)` as `key << 44 | rep << 24 | var`; the
//! column shuffle uses variable slot `2^24 - 1`. The contamination fraction
//! of study C is not part of the grid key, so each fraction reuses the same
//! standard normal draws.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{GridPoint, Study, StudyConfig};
use crate::error::Result;
use crate::filter::VariableMatrix;

pub(crate) const MAX_VARIABLES: usize = (1 << 24) - 1;
pub(crate) const MAX_REPLICATIONS: usize = 1 << 20;
const SHUFFLE_SLOT: u64 = (1 << 24) - 1;

pub(crate) fn stream_id(grid_key: usize, rep: usize, var: u64) -> u64 {
    ((grid_key as u64) << 44) | ((rep as u64) << 24) | var
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn signal_name(j: usize) -> String {
    format!("signal{j:06}")
}

pub fn noise_name(j: usize) -> String {
    format!("noise{j:06}")
}

pub fn is_signal(name: &str) -> bool {
    name.starts_with("signal")
}

/// A generated matrix with the names of its signal variables.
#[derive(Debug, Clone)]
pub struct GeneratedStudy {
    pub matrix: VariableMatrix,
    pub signal: HashSet<String>,
}

/// Rows hold the `n1` positives first, then the `n0` negatives.
pub(crate) fn layout_labels(n0: usize, n1: usize) -> Vec<u8> {
    let mut labels = vec![1u8; n1];
    labels.resize(n0 + n1, 0);
    labels
}

fn floor_frac(phi: f64, n: usize) -> usize {
    (phi * n as f64 + 1e-9).floor() as usize
}

/// One column. `signal` selects the class-dependent recipe.
fn column(cfg: &StudyConfig, gp: &GridPoint, signal: bool, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (n0, n1) = (cfg.n0, cfg.n1);
    let n = n0 + n1;
    let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let dmu = gp.delta_mu;
    match cfg.study {
        Study::A => (0..n).map(|i| if signal && i < n1 { dmu + z[i] } else { z[i] }).collect(),
        Study::B => {
            let s1 = gp.second.expect("study B has sigma1");
            (0..n)
                .map(|i| match (signal, i < n1) {
                    (true, true) => dmu + s1 * z[i],
                    (true, false) => z[i] / s1,
                    (false, _) => z[i],
                })
                .collect()
        }
        Study::C => {
            let phi = gp.second.expect("study C has phi");
            let scale = cfg.contamination_sd;
            if signal {
                let (k1, k0) = (floor_frac(phi, n1), floor_frac(phi, n0));
                (0..n)
                    .map(|i| {
                        let (mu, dirty) = if i < n1 { (dmu, i >= n1 - k1) } else { (0.0, i >= n - k0) };
                        mu + if dirty { scale * z[i] } else { z[i] }
                    })
                    .collect()
            } else {
                let k = floor_frac(phi, n);
                (0..n).map(|i| if i >= n - k { scale * z[i] } else { z[i] }).collect()
            }
        }
        Study::D => {
            let sigma = gp.second.expect("study D has sigma");
            (0..n)
                .map(|i| {
                    let shift = if signal && i >= n1 { dmu } else { 0.0 };
                    (sigma * z[i] - shift).exp()
                })
                .collect()
        }
    }
}

/// Generates the matrix for grid point `point` and replication `rep`.
/// Columns come in a shuffled order.
pub fn generate_study(cfg: &StudyConfig, point: usize, rep: usize) -> Result<GeneratedStudy> {
    cfg.validate()?;
    let gp = cfg.grid_point(point)?;
    let key = cfg.grid_key(point);
    let total = cfg.signal_count + cfg.noise_count;
    let mut cols: Vec<(String, Vec<f64>)> = (0..total)
        .map(|v| {
            let mut rng = stream(cfg.seed, stream_id(key, rep, v as u64));
            let signal = v < cfg.signal_count;
            let name = if signal { signal_name(v) } else { noise_name(v - cfg.signal_count) };
            (name, column(cfg, &gp, signal, &mut rng))
        })
        .collect();
    cols.shuffle(&mut stream(cfg.seed, stream_id(key, rep, SHUFFLE_SLOT)));
    let signal = cols.iter().map(|(n, _)| n).filter(|n| is_signal(n)).cloned().collect();
    let (names, columns) = cols.into_iter().unzip();
    let matrix = VariableMatrix::new(names, columns, layout_labels(cfg.n0, cfg.n1))?;
    Ok(GeneratedStudy { matrix, signal })
}
