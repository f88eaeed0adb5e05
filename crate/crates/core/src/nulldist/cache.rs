//! Line-oriented on-disk format for null distributions.
//!
//! ```text
//! #ETC-ND v1
//! n0=9
//! n1=9
//! c0=1/1
//! c1=2/1
//! pi1=1/2
//! cell <fn> <fp> <count>
//! support <num>/<den> <count>
//! total <count>
//! ```
//!
//! One distribution serves every variable with the same sizes and
//! operating condition, so files are keyed by those alone.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigUint;
use num_rational::BigRational;
use sha2::{Digest, Sha256};

use super::distribution::{null_distribution, NullDistribution};
use crate::error::{Error, Result};
use crate::estimator::{validate_oc, OperatingCondition};
use crate::permutation::CellIndex;
use crate::rational::{binomial, format_exact, parse_rational};

pub const FORMAT_HEADER: &str = "#ETC-ND v1";

pub fn render_nd(nd: &NullDistribution) -> String {
    let oc = nd.oc();
    let mut s = String::new();
    s.push_str(FORMAT_HEADER);
    s.push('\n');
    s.push_str(&format!("n0={}\nn1={}\n", nd.n0(), nd.n1()));
    s.push_str(&format!(
        "c0={}\nc1={}\npi1={}\n",
        format_exact(oc.c0()),
        format_exact(oc.c1()),
        format_exact(oc.pi1())
    ));
    for (cell, count) in nd.cells() {
        s.push_str(&format!("cell {} {} {}\n", cell.fn_count, cell.fp_count, count));
    }
    for (value, count) in nd.support() {
        s.push_str(&format!("support {} {}\n", format_exact(value), count));
    }
    s.push_str(&format!("total {}\n", nd.total()));
    s
}

/// Writes atomically (temporary file + rename).
pub fn save_nd(nd: &NullDistribution, path: &Path) -> Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, render_nd(nd)).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_nd(path: &Path) -> Result<NullDistribution> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_nd(&text, path)
}

fn parse_nd(text: &str, path: &Path) -> Result<NullDistribution> {
    let malformed = |message: String| Error::Malformed {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(FORMAT_HEADER) => {}
        other => {
            return Err(Error::FormatVersionMismatch(format!(
                "expected `{FORMAT_HEADER}`, found `{}`",
                other.unwrap_or("")
            )))
        }
    }

    let mut field = |key: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| malformed(format!("missing `{key}=`")))?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| malformed(format!("expected `{key}=`, found `{line}`")))
    };
    let n0: usize = field("n0")?.parse().map_err(|_| malformed("bad n0".into()))?;
    let n1: usize = field("n1")?.parse().map_err(|_| malformed("bad n1".into()))?;
    let c0 = parse_rational(&field("c0")?)?;
    let c1 = parse_rational(&field("c1")?)?;
    let pi1 = parse_rational(&field("pi1")?)?;
    let oc = validate_oc(&OperatingCondition::new(c0, c1, pi1), true)?;

    let count = |s: &str| -> Result<BigUint> { s.parse().map_err(|_| malformed(format!("bad count `{s}`"))) };
    let mut cells = BTreeMap::new();
    let mut support: Vec<(BigRational, BigUint)> = Vec::new();
    let mut total = None;
    for line in lines {
        let parts: Vec<&str> = line.split(' ').collect();
        match parts.as_slice() {
            ["cell", f, p, c] if total.is_none() && support.is_empty() => {
                let cell = CellIndex::new(
                    f.parse().map_err(|_| malformed(format!("bad cell `{line}`")))?,
                    p.parse().map_err(|_| malformed(format!("bad cell `{line}`")))?,
                );
                cells.insert(cell, count(c)?);
            }
            ["support", v, c] if total.is_none() => {
                let value = parse_rational(v)?;
                if support.last().is_some_and(|(prev, _)| prev >= &value) {
                    return Err(malformed("support values not strictly increasing".into()));
                }
                support.push((value, count(c)?));
            }
            ["total", c] if total.is_none() => total = Some(count(c)?),
            [""] => {}
            _ => return Err(malformed(format!("unexpected line `{line}`"))),
        }
    }
    let total = total.ok_or_else(|| malformed("missing total".into()))?;

    let cell_sum: BigUint = cells.values().sum();
    let support_sum: BigUint = support.iter().map(|(_, c)| c).sum();
    if cell_sum != total || support_sum != total {
        return Err(Error::ChecksumMismatch(format!(
            "declared total {total}, cells sum to {cell_sum}, support sums to {support_sum}"
        )));
    }
    if total != binomial(n0 + n1, n0) {
        return Err(Error::ChecksumMismatch(format!("total {total} is not C({}, {n0})", n0 + n1)));
    }
    let rebuilt = NullDistribution::from_cells(n0, n1, oc.clone(), cells.clone())?;
    if rebuilt.support() != support.as_slice() {
        return Err(Error::ChecksumMismatch("support does not match cell counts".into()));
    }
    Ok(NullDistribution::assemble(n0, n1, oc, cells, support, total))
}

/// Canonical cache file name for `(n0, n1, oc)`.
pub fn cache_file_name(n0: usize, n1: usize, oc: &OperatingCondition) -> String {
    let key = format!(
        "n0={n0};n1={n1};c0={};c1={};pi1={}",
        format_exact(oc.c0()),
        format_exact(oc.c1()),
        format_exact(oc.pi1())
    );
    let digest = Sha256::digest(key.as_bytes());
    format!("nd-{n0}-{n1}-{}.txt", &hex::encode(digest)[..16])
}

/// Directory of cached null distributions.
#[derive(Debug)]
pub struct NdCache {
    dir: PathBuf,
    computed: AtomicUsize,
    loaded: AtomicUsize,
}

impl NdCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(NdCache {
            dir,
            computed: AtomicUsize::new(0),
            loaded: AtomicUsize::new(0),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, n0: usize, n1: usize, oc: &OperatingCondition) -> PathBuf {
        self.dir.join(cache_file_name(n0, n1, oc))
    }

    /// Loads the cached distribution or computes and stores it.
    pub fn get_or_compute(&self, n0: usize, n1: usize, oc: &OperatingCondition) -> Result<NullDistribution> {
        let path = self.path_for(n0, n1, oc);
        if path.exists() {
            let nd = load_nd(&path)?;
            if nd.matches(n0, n1, oc) {
                self.loaded.fetch_add(1, Ordering::Relaxed);
                return Ok(nd);
            }
        }
        let nd = null_distribution(n0, n1, oc)?;
        self.computed.fetch_add(1, Ordering::Relaxed);
        save_nd(&nd, &path)?;
        Ok(nd)
    }

    /// Distributions computed (not loaded) by this handle.
    pub fn computed(&self) -> usize {
        self.computed.load(Ordering::Relaxed)
    }

    pub fn loaded(&self) -> usize {
        self.loaded.load(Ordering::Relaxed)
    }
}
