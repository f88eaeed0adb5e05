//! Simulation studies comparing ETC with Gaussian LDA and QDA filters.
//!
//! A study generates signal and noise variables on a parameter grid, ranks
//! them with each method and records the filtering performance: the share of
//! signal variables among the top `signal_count` ranks.

mod baselines;
mod generate;

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

pub use baselines::{lda_from_fit, lda_score, qda_from_fit, qda_score, GaussianFit, LdaScore, QdaScore, Region};
pub use generate::{generate_study, is_signal, noise_name, signal_name, GeneratedStudy};

use crate::error::{Error, Result};
use crate::estimator::{validate_oc, OperatingCondition};
use crate::filter::{rank_variables, Adjustment, VariableMatrix};
use crate::nulldist::{null_distribution, NullDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Study {
    A,
    B,
    C,
    D,
}

impl Study {
    pub const ALL: [Study; 4] = [Study::A, Study::B, Study::C, Study::D];

    /// Name of the second grid axis, if any.
    pub fn second_axis(self) -> Option<&'static str> {
        match self {
            Study::A => None,
            Study::B => Some("sigma1"),
            Study::C => Some("phi"),
            Study::D => Some("sigma"),
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Study::A),
            "B" => Ok(Study::B),
            "C" => Ok(Study::C),
            "D" => Ok(Study::D),
            _ => Err(Error::InvalidConfig(format!("unknown study `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Etc,
    Lda,
    Qda,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Etc, Method::Lda, Method::Qda];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Etc => "etc",
            Method::Lda => "lda",
            Method::Qda => "qda",
        }
    }
}

/// Location shift plus the study's second coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub delta_mu: f64,
    /// `sigma1` (B), `phi` (C) or `sigma` (D).
    pub second: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub study: Study,
    pub delta_mu: Vec<f64>,
    /// Empty for study A.
    pub second: Vec<f64>,
    pub n0: usize,
    pub n1: usize,
    pub signal_count: usize,
    pub noise_count: usize,
    pub oc: OperatingCondition,
    pub seed: u64,
    pub replications: usize,
    /// Standard deviation of study C contaminants.
    pub contamination_sd: f64,
}

fn default_delta_mu() -> Vec<f64> {
    (0..=5).map(|i| 0.5 * i as f64).collect()
}

fn pow2_range() -> impl Iterator<Item = f64> {
    (-3..=3).map(|e| 2f64.powi(e))
}

impl StudyConfig {
    /// Laptop-sized defaults: 100 signal and 9900 noise variables,
    /// `n0 = n1 = 25`, five replications.
    pub fn desk(study: Study) -> Self {
        let second = match study {
            Study::A => vec![],
            Study::B => pow2_range().collect(),
            Study::C => vec![0.0, 0.1, 0.2, 0.3],
            Study::D => pow2_range().map(f64::sqrt).collect(),
        };
        StudyConfig {
            study,
            delta_mu: default_delta_mu(),
            second,
            n0: 25,
            n1: 25,
            signal_count: 100,
            noise_count: 9900,
            oc: OperatingCondition::from_ints(1, 1, 1, 2),
            seed: 1,
            replications: 5,
            contamination_sd: 5.0,
        }
    }

    /// 1000 signal and 99000 noise variables with `n0 = n1 = 50`.
    pub fn full_scale(study: Study) -> Self {
        StudyConfig {
            n0: 50,
            n1: 50,
            signal_count: 1000,
            noise_count: 99000,
            ..Self::desk(study)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n0 == 0 || self.n1 == 0 {
            return bad("n0 and n1 must be at least 1".into());
        }
        if self.signal_count == 0 || self.noise_count == 0 {
            return bad("signal and noise counts must be at least 1".into());
        }
        if self.signal_count + self.noise_count > generate::MAX_VARIABLES {
            return bad(format!("at most {} variables", generate::MAX_VARIABLES));
        }
        if self.replications == 0 || self.replications > generate::MAX_REPLICATIONS {
            return bad(format!("replications must be in 1..={}", generate::MAX_REPLICATIONS));
        }
        if self.delta_mu.is_empty() || self.delta_mu.iter().any(|d| !d.is_finite()) {
            return bad("delta_mu grid must be nonempty and finite".into());
        }
        match self.study {
            Study::A if !self.second.is_empty() => return bad("study A has no second axis".into()),
            Study::B | Study::D if self.second.is_empty() || self.second.iter().any(|s| !(*s > 0.0 && s.is_finite())) => {
                return bad("sigma grid must be nonempty and positive".into())
            }
            Study::C if self.second.is_empty() || self.second.iter().any(|p| !(0.0..=1.0).contains(p)) => {
                return bad("phi grid must be nonempty and within [0, 1]".into())
            }
            Study::C if !(self.contamination_sd > 0.0 && self.contamination_sd.is_finite()) => {
                return bad("contamination sd must be positive".into())
            }
            _ => {}
        }
        validate_oc(&self.oc, true)?;
        Ok(())
    }

    fn second_len(&self) -> usize {
        self.second.len().max(1)
    }

    pub fn grid_len(&self) -> usize {
        self.delta_mu.len() * self.second_len()
    }

    /// Grid points in row-major order: `delta_mu` outer, second axis inner.
    pub fn grid_point(&self, index: usize) -> Result<GridPoint> {
        if index >= self.grid_len() {
            return Err(Error::InvalidGridPoint(format!(
                "index {index} outside a grid of {} points",
                self.grid_len()
            )));
        }
        let (d, s) = (index / self.second_len(), index % self.second_len());
        Ok(GridPoint {
            delta_mu: self.delta_mu[d],
            second: self.second.get(s).copied(),
        })
    }

    /// Random-stream key of a grid point; study C ignores `phi`.
    pub(crate) fn grid_key(&self, index: usize) -> usize {
        match self.study {
            Study::C => index / self.second_len(),
            _ => index,
        }
    }
}

/// Share of signal variables among the first `|signal|` entries of `ranking`.
pub fn filtering_performance<S: AsRef<str>>(ranking: &[S], signal: &HashSet<String>) -> Result<f64> {
    if signal.is_empty() {
        return Err(Error::EmptySignalSet);
    }
    if ranking.len() < signal.len() {
        return Err(Error::InvalidConfig(format!(
            "ranking of {} variables is shorter than the signal set ({})",
            ranking.len(),
            signal.len()
        )));
    }
    let hits = ranking[..signal.len()].iter().filter(|n| signal.contains(n.as_ref())).count();
    Ok(hits as f64 / signal.len() as f64)
}

/// Variable names ordered by ascending score, input order on ties.
fn rank_by_score(names: &[String], scores: &[f64]) -> Vec<String> {
    let mut idx: Vec<usize> = (0..names.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    idx.into_iter().map(|i| names[i].clone()).collect()
}

pub fn rank_etc(m: &VariableMatrix, oc: &OperatingCondition, nd: &NullDistribution) -> Result<Vec<String>> {
    let report = rank_variables(m, oc, nd, Adjustment::None)?;
    Ok(report.records.into_iter().map(|r| r.name).collect())
}

pub fn rank_lda(m: &VariableMatrix, oc: &OperatingCondition) -> Result<Vec<String>> {
    let scores = m
        .columns()
        .par_iter()
        .map(|c| lda_score(c, m.labels(), oc).map(|s| s.plugin_epe))
        .collect::<Result<Vec<_>>>()?;
    Ok(rank_by_score(m.names(), &scores))
}

pub fn rank_qda(m: &VariableMatrix, oc: &OperatingCondition) -> Result<Vec<String>> {
    let scores = m
        .columns()
        .par_iter()
        .map(|c| qda_score(c, m.labels(), oc).map(|s| s.plugin_epe))
        .collect::<Result<Vec<_>>>()?;
    Ok(rank_by_score(m.names(), &scores))
}

/// Filtering performance of one method on one matrix.
pub fn method_fp(
    method: Method,
    m: &VariableMatrix,
    signal: &HashSet<String>,
    oc: &OperatingCondition,
    nd: &NullDistribution,
) -> Result<f64> {
    let ranking = match method {
        Method::Etc => rank_etc(m, oc, nd)?,
        Method::Lda => rank_lda(m, oc)?,
        Method::Qda => rank_qda(m, oc)?,
    };
    filtering_performance(&ranking, signal)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub delta_mu: f64,
    pub second: Option<f64>,
    pub method: Method,
    /// FP per replication.
    pub fp: Vec<f64>,
    /// `FP(phi) - FP(0)` per replication (study C only).
    pub delta_fp: Option<Vec<f64>>,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl GridCell {
    pub fn fp_mean(&self) -> f64 {
        mean_se(&self.fp).0
    }

    pub fn fp_se(&self) -> f64 {
        mean_se(&self.fp).1
    }

    pub fn delta_fp_mean(&self) -> Option<f64> {
        self.delta_fp.as_deref().map(|d| mean_se(d).0)
    }

    pub fn delta_fp_se(&self) -> Option<f64> {
        self.delta_fp.as_deref().map(|d| mean_se(d).1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteringPerformanceGrid {
    pub study: Study,
    pub delta_mu: Vec<f64>,
    pub second: Vec<f64>,
    pub replications: usize,
    /// Grid order, methods innermost.
    pub cells: Vec<GridCell>,
}

impl FilteringPerformanceGrid {
    pub fn cell(&self, delta_mu: f64, second: Option<f64>, method: Method) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.delta_mu == delta_mu && c.second == second && c.method == method)
    }

    /// One row per grid point and method.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["study", "delta_mu"];
        header.extend(self.study.second_axis());
        header.extend(["method", "fp_mean", "fp_se", "replications"]);
        if self.study == Study::C {
            header.extend(["delta_fp_mean", "delta_fp_se"]);
        }
        w.write_record(&header)?;
        for c in &self.cells {
            let mut row = vec![self.study.to_string(), c.delta_mu.to_string()];
            row.extend(c.second.map(|s| s.to_string()));
            row.extend([
                c.method.as_str().to_string(),
                c.fp_mean().to_string(),
                c.fp_se().to_string(),
                c.fp.len().to_string(),
            ]);
            if self.study == Study::C {
                row.push(c.delta_fp_mean().map_or(String::new(), |v| v.to_string()));
                row.push(c.delta_fp_se().map_or(String::new(), |v| v.to_string()));
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Runs the study, computing the null distribution it needs.
pub fn run_study(cfg: &StudyConfig) -> Result<FilteringPerformanceGrid> {
    cfg.validate()?;
    let nd = null_distribution(cfg.n0, cfg.n1, &cfg.oc)?;
    run_study_with(cfg, &nd)
}

pub fn run_study_with(cfg: &StudyConfig, nd: &NullDistribution) -> Result<FilteringPerformanceGrid> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.grid_len())
        .flat_map(|g| (0..cfg.replications).map(move |r| (g, r)))
        .collect();
    // fp[g][r] = [etc, lda, qda]
    let results = jobs
        .par_iter()
        .map(|&(g, r)| {
            let data = generate_study(cfg, g, r)?;
            let mut fps = [0.0; 3];
            for (k, method) in Method::ALL.into_iter().enumerate() {
                fps[k] = method_fp(method, &data.matrix, &data.signal, &cfg.oc, nd)?;
            }
            Ok(fps)
        })
        .collect::<Result<Vec<[f64; 3]>>>()?;
    let fp = |g: usize, r: usize, k: usize| results[g * cfg.replications + r][k];

    let clean = |g: usize| -> Option<usize> {
        if cfg.study != Study::C {
            return None;
        }
        let base = g - g % cfg.second.len();
        (base..base + cfg.second.len()).find(|&i| cfg.second[i - base] == 0.0)
    };
    if cfg.study == Study::C && clean(0).is_none() {
        return Err(Error::InvalidConfig("study C needs phi = 0 in its grid".into()));
    }

    let mut cells = Vec::new();
    for g in 0..cfg.grid_len() {
        let gp = cfg.grid_point(g)?;
        for (k, method) in Method::ALL.into_iter().enumerate() {
            let fps: Vec<f64> = (0..cfg.replications).map(|r| fp(g, r, k)).collect();
            let delta_fp = clean(g).map(|g0| (0..cfg.replications).map(|r| fp(g, r, k) - fp(g0, r, k)).collect());
            cells.push(GridCell {
                delta_mu: gp.delta_mu,
                second: gp.second,
                method,
                fp: fps,
                delta_fp,
            });
        }
    }
    Ok(FilteringPerformanceGrid {
        study: cfg.study,
        delta_mu: cfg.delta_mu.clone(),
        second: cfg.second.clone(),
        replications: cfg.replications,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(study: Study) -> StudyConfig {
        StudyConfig {
            signal_count: 20,
            noise_count: 80,
            n0: 10,
            n1: 10,
            replications: 2,
            ..StudyConfig::desk(study)
        }
    }

    #[test]
    fn fp_examples() {
        let signal: HashSet<String> = ["s1", "s2", "s3", "s4"].map(String::from).into();
        assert_eq!(filtering_performance(&["s1", "s2", "s3", "s4", "n1"], &signal).unwrap(), 1.0);
        assert_eq!(filtering_performance(&["s1", "n1", "s2", "n2", "s3", "s4"], &signal).unwrap(), 0.5);
        assert!(matches!(filtering_performance(&["a"], &HashSet::new()), Err(Error::EmptySignalSet)));
    }

    #[test]
    fn grid_indexing() {
        let cfg = StudyConfig::desk(Study::C);
        assert_eq!(cfg.grid_len(), 24);
        let gp = cfg.grid_point(5).unwrap();
        assert_eq!((gp.delta_mu, gp.second), (0.5, Some(0.1)));
        assert!(matches!(cfg.grid_point(24), Err(Error::InvalidGridPoint(_))));
        let a = StudyConfig::desk(Study::A);
        assert_eq!(a.grid_point(3).unwrap(), GridPoint { delta_mu: 1.5, second: None });
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = small(Study::B);
        cfg.second = vec![];
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        let mut cfg = small(Study::A);
        cfg.signal_count = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small(Study::C);
        cfg.second = vec![0.1, 0.2];
        assert!(matches!(run_study(&cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = small(Study::B);
        let a = generate_study(&cfg, 7, 1).unwrap();
        let b = generate_study(&cfg, 7, 1).unwrap();
        assert_eq!(a.matrix, b.matrix);
        let c = generate_study(&cfg, 7, 0).unwrap();
        assert_ne!(a.matrix, c.matrix);
        assert_eq!(a.signal.len(), 20);
        assert_eq!(a.matrix.len(), 100);
    }

    #[test]
    fn clean_study_c_matches_study_a() {
        let a = small(Study::A);
        let c = small(Study::C);
        // grid point (delta_mu = 1.0, phi = 0) in C and delta_mu = 1.0 in A
        let ga = generate_study(&a, 2, 0).unwrap();
        let gc = generate_study(&c, 8, 0).unwrap();
        assert_eq!(c.grid_point(8).unwrap().second, Some(0.0));
        assert_eq!(ga.matrix, gc.matrix);
    }

    #[test]
    fn contamination_pattern() {
        let mut cfg = small(Study::C);
        cfg.contamination_sd = 1e6;
        // phi = 0.3 at delta_mu = 0: 3 of 10 per class for signal, 6 of 20 for noise
        let g = generate_study(&cfg, 3, 0).unwrap();
        for (name, col) in g.matrix.names().iter().zip(g.matrix.columns()) {
            let dirty: Vec<usize> = (0..20).filter(|&i| col[i].abs() > 1e3).collect();
            if is_signal(name) {
                assert!(dirty.iter().all(|&i| (7..10).contains(&i) || (17..20).contains(&i)), "{dirty:?}");
            } else {
                assert!(dirty.iter().all(|&i| i >= 14), "{dirty:?}");
            }
        }
    }

    #[test]
    fn run_small_study_and_csv() {
        let mut cfg = small(Study::C);
        cfg.delta_mu = vec![0.0, 2.5];
        cfg.second = vec![0.0, 0.3];
        let grid = run_study(&cfg).unwrap();
        assert_eq!(grid.cells.len(), 2 * 2 * 3);
        for c in &grid.cells {
            assert!(c.fp.iter().all(|v| (0.0..=1.0).contains(v)));
            if c.second == Some(0.0) {
                assert!(c.delta_fp.as_ref().unwrap().iter().all(|d| *d == 0.0));
            }
        }
        let strong = grid.cell(2.5, Some(0.0), Method::Lda).unwrap();
        assert!(strong.fp_mean() > 0.8);
        let mut out = Vec::new();
        grid.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("study,delta_mu,phi,method,fp_mean,fp_se,replications,delta_fp_mean,delta_fp_se\n"));
        assert_eq!(text.lines().count(), 13);
        assert_eq!(run_study(&cfg).unwrap(), grid);
    }
}
