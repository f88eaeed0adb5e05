//! Filter-type variable selection: one test per variable against a shared
//! null distribution, ranking, and multiplicity adjustment.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{etc_hat_conservative, Direction, LabeledSample, OperatingCondition};
use crate::nulldist::{cache_file_name, p_value, NullDistribution};
use crate::rational::{format_decimal, format_exact};

/// A variable that was dropped while loading, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedVariable {
    pub name: String,
    pub reason: String,
}

/// Named real-valued columns sharing one label vector.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    labels: Vec<u8>,
    rejected: Vec<RejectedVariable>,
}

impl VariableMatrix {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::InvalidSample(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::InvalidSample(format!("duplicate variable name `{dup}`")));
        }
        if let Some((name, col)) = names.iter().zip(&columns).find(|(_, c)| c.len() != labels.len()) {
            return Err(Error::LabelMismatch(format!(
                "variable `{name}` has {} values for {} labels",
                col.len(),
                labels.len()
            )));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::LabelMismatch("labels must be 0 or 1".into()));
        }
        let n1 = labels.iter().filter(|&&l| l == 1).count();
        if n1 == 0 || n1 == labels.len() {
            return Err(Error::SingleClassLabels);
        }
        if let Some((name, _)) = names.iter().zip(&columns).find(|(_, c)| c.iter().any(|v| v.is_nan())) {
            return Err(Error::InvalidSample(format!("variable `{name}` contains NaN")));
        }
        Ok(VariableMatrix {
            names,
            columns,
            labels,
            rejected: Vec::new(),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn rejected(&self) -> &[RejectedVariable] {
        &self.rejected
    }

    pub fn n1(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn n0(&self) -> usize {
        self.labels.len() - self.n1()
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Applies `f` to every value of every column.
    pub fn map_values(&self, f: impl Fn(f64) -> f64 + Sync) -> VariableMatrix {
        VariableMatrix {
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c.iter().map(|&v| f(v)).collect()).collect(),
            labels: self.labels.clone(),
            rejected: self.rejected.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    /// Header row, one label column, one column per variable.
    CsvWide,
    /// Columns `variable,sample_id,value`; labels in a separate
    /// `sample_id,label` file.
    CsvLong,
}

#[derive(Debug, Clone, Copy)]
pub enum LabelSource<'a> {
    Column(&'a str),
    File(&'a Path),
}

/// Empty, `NA` and `NaN` cells mark a value as missing.
fn parse_cell(s: &str) -> Option<Option<f64>> {
    let t = s.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan") {
        return Some(None);
    }
    t.parse::<f64>().ok().filter(|v| !v.is_nan()).map(Some)
}

fn parse_label(s: &str, row: usize, col: usize) -> Result<u8> {
    match s.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(Error::ParseError {
            row,
            col,
            message: format!("label `{other}` is not 0 or 1"),
        }),
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file))
}

/// Reads a matrix. Rows and columns in diagnostics are 1-based file
/// positions (the header is row 1). Variables with missing values are
/// dropped and listed in [`VariableMatrix::rejected`].
pub fn load_matrix(path: &Path, format: MatrixFormat, labels: LabelSource<'_>) -> Result<VariableMatrix> {
    let (names, columns, labels) = match (format, labels) {
        (MatrixFormat::CsvWide, LabelSource::Column(label_col)) => read_wide(path, label_col)?,
        (MatrixFormat::CsvLong, LabelSource::File(label_path)) => read_long(path, label_path)?,
        (MatrixFormat::CsvWide, LabelSource::File(_)) => {
            return Err(Error::LabelMismatch("wide format takes a label column".into()))
        }
        (MatrixFormat::CsvLong, LabelSource::Column(_)) => {
            return Err(Error::LabelMismatch("long format takes a label file".into()))
        }
    };

    let mut kept_names = Vec::new();
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for (name, col) in names.into_iter().zip(columns) {
        let missing = col.iter().filter(|v| v.is_none()).count();
        if missing > 0 {
            rejected.push(RejectedVariable {
                name,
                reason: format!("{missing} missing value(s)"),
            });
        } else {
            kept_names.push(name);
            kept.push(col.into_iter().flatten().collect());
        }
    }
    let mut m = VariableMatrix::new(kept_names, kept, labels)?;
    m.rejected = rejected;
    Ok(m)
}

type RawColumns = (Vec<String>, Vec<Vec<Option<f64>>>, Vec<u8>);

fn read_wide(path: &Path, label_col: &str) -> Result<RawColumns> {
    let mut rdr = open_csv(path)?;
    let header = rdr.headers()?.clone();
    let label_idx = header
        .iter()
        .position(|h| h == label_col)
        .ok_or_else(|| Error::LabelMismatch(format!("no label column `{label_col}`")))?;
    let var_idx: Vec<usize> = (0..header.len()).filter(|&i| i != label_idx).collect();
    let names: Vec<String> = var_idx.iter().map(|&i| header[i].to_string()).collect();
    let mut columns = vec![Vec::new(); names.len()];
    let mut labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let row = r + 2;
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::ParseError {
                row,
                col: record.len().min(header.len()) + 1,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        labels.push(parse_label(&record[label_idx], row, label_idx + 1)?);
        for (j, &i) in var_idx.iter().enumerate() {
            let value = parse_cell(&record[i]).ok_or_else(|| Error::ParseError {
                row,
                col: i + 1,
                message: format!("non-numeric value `{}`", &record[i]),
            })?;
            columns[j].push(value);
        }
    }
    Ok((names, columns, labels))
}

fn read_long(path: &Path, label_path: &Path) -> Result<RawColumns> {
    let mut sample_pos: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut lrdr = open_csv(label_path)?;
    for (r, record) in lrdr.records().enumerate() {
        let row = r + 2;
        let record = record?;
        if record.len() < 2 {
            return Err(Error::ParseError {
                row,
                col: record.len() + 1,
                message: "expected sample_id,label".into(),
            });
        }
        if sample_pos.insert(record[0].to_string(), labels.len()).is_some() {
            return Err(Error::LabelMismatch(format!("duplicate sample_id `{}`", &record[0])));
        }
        labels.push(parse_label(&record[1], row, 2)?);
    }

    let mut rdr = open_csv(path)?;
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut columns: Vec<Vec<Option<f64>>> = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let row = r + 2;
        let record = record?;
        if record.len() < 3 {
            return Err(Error::ParseError {
                row,
                col: record.len() + 1,
                message: "expected variable,sample_id,value".into(),
            });
        }
        let var = &record[0];
        let j = *index.entry(var.to_string()).or_insert_with(|| {
            names.push(var.to_string());
            columns.push(vec![None; labels.len()]);
            columns.len() - 1
        });
        let pos = *sample_pos.get(&record[1]).ok_or_else(|| {
            Error::LabelMismatch(format!("sample_id `{}` (row {row}) has no label", &record[1]))
        })?;
        let value = parse_cell(&record[2]).ok_or_else(|| Error::ParseError {
            row,
            col: 3,
            message: format!("non-numeric value `{}`", &record[2]),
        })?;
        if value.is_some() && columns[j][pos].is_some() {
            return Err(Error::ParseError {
                row,
                col: 2,
                message: format!("duplicate value for ({var}, {})", &record[1]),
            });
        }
        columns[j][pos] = value;
    }
    Ok((names, columns, labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjustment {
    None,
    BenjaminiHochberg,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableRecord {
    pub rank: usize,
    pub name: String,
    pub statistic: BigRational,
    pub fn_count: usize,
    pub fp_count: usize,
    pub direction: Direction,
    pub tie_adjusted: bool,
    pub p: BigRational,
    pub p_adjusted: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterReport {
    pub records: Vec<VariableRecord>,
    pub n0: usize,
    pub n1: usize,
    pub oc: OperatingCondition,
    /// Cache file name of the null distribution used.
    pub nd_identity: String,
}

impl FilterReport {
    pub fn truncate(&mut self, top: usize) {
        self.records.truncate(top);
    }

    pub fn count_at_most(&self, alpha: &BigRational, adjusted: bool) -> usize {
        self.records
            .iter()
            .filter(|r| if adjusted { &r.p_adjusted <= alpha } else { &r.p <= alpha })
            .count()
    }
}

/// Tests every variable and ranks by ascending p-value, then statistic, then
/// input order.
pub fn rank_variables(
    m: &VariableMatrix,
    oc: &OperatingCondition,
    nd: &NullDistribution,
    adjustment: Adjustment,
) -> Result<FilterReport> {
    let (n0, n1) = (m.n0(), m.n1());
    if !nd.matches(n0, n1, oc) {
        return Err(Error::NdMismatch {
            nd_n0: nd.n0(),
            nd_n1: nd.n1(),
            nd_oc: nd.oc().to_string(),
            n0,
            n1,
            oc: oc.to_string(),
        });
    }
    let estimates = m
        .columns
        .par_iter()
        .map(|col| {
            let sample = LabeledSample::new(col.clone(), m.labels.clone())?;
            let est = etc_hat_conservative(&sample, oc)?;
            let p = p_value(nd, &est.value);
            Ok((est, p))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..estimates.len()).collect();
    order.sort_by(|&a, &b| {
        let (ea, pa) = &estimates[a];
        let (eb, pb) = &estimates[b];
        pa.cmp(pb).then_with(|| ea.value.cmp(&eb.value)).then(a.cmp(&b))
    });
    assert!(
        order.windows(2).all(|w| estimates[w[0]].0.value <= estimates[w[1]].0.value),
        "ranking by p-value must agree with ranking by statistic"
    );

    let ps: Vec<BigRational> = estimates.iter().map(|(_, p)| p.clone()).collect();
    let adjusted = match adjustment {
        Adjustment::None => ps.clone(),
        Adjustment::BenjaminiHochberg => bh_adjust(&ps)?,
    };

    let records = order
        .iter()
        .enumerate()
        .map(|(r, &i)| {
            let (est, p) = &estimates[i];
            VariableRecord {
                rank: r + 1,
                name: m.names[i].clone(),
                statistic: est.value.clone(),
                fn_count: est.fn_count,
                fp_count: est.fp_count,
                direction: est.rule.direction,
                tie_adjusted: est.tie_adjusted,
                p: p.clone(),
                p_adjusted: adjusted[i].clone(),
            }
        })
        .collect();
    Ok(FilterReport {
        records,
        n0,
        n1,
        oc: oc.clone(),
        nd_identity: cache_file_name(n0, n1, oc),
    })
}

/// Benjamini-Hochberg step-up adjustment, exact, in input order.
pub fn bh_adjust(p: &[BigRational]) -> Result<Vec<BigRational>> {
    let one = BigRational::one();
    if let Some(bad) = p.iter().find(|v| v.is_negative() || *v > &one) {
        return Err(Error::ValueOutOfRange(format_exact(bad)));
    }
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].cmp(&p[b]).then(a.cmp(&b)));
    let mut adjusted = vec![BigRational::one(); m];
    let mut running = one.clone();
    for (rank, &i) in order.iter().enumerate().rev() {
        let scaled = &p[i] * BigRational::new(BigInt::from(m), BigInt::from(rank + 1));
        running = running.min(scaled);
        adjusted[i] = running.clone();
    }
    Ok(adjusted)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    JsonLines,
}

pub const REPORT_COLUMNS: [&str; 11] = [
    "rank",
    "name",
    "statistic_exact",
    "statistic",
    "fn",
    "fp",
    "direction",
    "tie_adjusted",
    "p_exact",
    "p",
    "p_bh",
];

#[derive(Serialize)]
struct JsonRecord<'a> {
    rank: usize,
    name: &'a str,
    statistic_exact: String,
    statistic: String,
    #[serde(rename = "fn")]
    fn_count: usize,
    #[serde(rename = "fp")]
    fp_count: usize,
    direction: &'static str,
    tie_adjusted: bool,
    p_exact: String,
    p: String,
    p_bh_exact: String,
    p_bh: String,
}

/// Deterministic serialization of a report.
pub fn write_report(r: &FilterReport, path: &Path, format: ReportFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_report_to(r, BufWriter::new(file), format).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// [`write_report`] into any writer.
pub fn write_report_to<W: Write>(r: &FilterReport, mut out: W, format: ReportFormat) -> Result<()> {
    let io_err = |e| Error::io("<report>", e);
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(REPORT_COLUMNS)?;
            for rec in &r.records {
                w.write_record([
                    rec.rank.to_string(),
                    rec.name.clone(),
                    format_exact(&rec.statistic),
                    format_decimal(&rec.statistic, 17),
                    rec.fn_count.to_string(),
                    rec.fp_count.to_string(),
                    rec.direction.as_str().to_string(),
                    rec.tie_adjusted.to_string(),
                    format_exact(&rec.p),
                    format_decimal(&rec.p, 17),
                    format_decimal(&rec.p_adjusted, 17),
                ])?;
            }
            w.flush().map_err(io_err)?;
        }
        ReportFormat::JsonLines => {
            for rec in &r.records {
                let line = JsonRecord {
                    rank: rec.rank,
                    name: &rec.name,
                    statistic_exact: format_exact(&rec.statistic),
                    statistic: format_decimal(&rec.statistic, 17),
                    fn_count: rec.fn_count,
                    fp_count: rec.fp_count,
                    direction: rec.direction.as_str(),
                    tie_adjusted: rec.tie_adjusted,
                    p_exact: format_exact(&rec.p),
                    p: format_decimal(&rec.p, 17),
                    p_bh_exact: format_exact(&rec.p_adjusted),
                    p_bh: format_decimal(&rec.p_adjusted, 17),
                };
                let s = serde_json::to_string(&line).expect("plain struct serializes");
                writeln!(out, "{s}").map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nulldist::null_distribution;
    use crate::permutation::nulldist_bruteforce;
    use crate::rational::{parse_rational, ratio};
    use rand::{Rng, SeedableRng};
    use std::fs;

    fn dec(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn bh_examples() {
        assert_eq!(bh_adjust(&[dec("0.04")]).unwrap(), vec![dec("0.04")]);
        assert_eq!(
            bh_adjust(&[dec("0.01"), dec("0.02"), dec("0.04")]).unwrap(),
            vec![dec("0.03"), dec("0.03"), dec("0.04")]
        );
        assert_eq!(bh_adjust(&[dec("1"), dec("1"), dec("1")]).unwrap(), vec![dec("1"); 3]);
        // input order is restored
        assert_eq!(
            bh_adjust(&[dec("0.04"), dec("0.01"), dec("0.02")]).unwrap(),
            vec![dec("0.04"), dec("0.03"), dec("0.03")]
        );
        assert!(matches!(bh_adjust(&[dec("1.5")]), Err(Error::ValueOutOfRange(_))));
        assert!(bh_adjust(&[]).unwrap().is_empty());
    }

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn load_wide() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "m.csv",
            "a,label,b,c\n1,0,2,3\n2,0,3,1\n3,0,1,2\n4,1,5,9\n5,1,4,8\n6,1,6,7\n",
        );
        let m = load_matrix(&p, MatrixFormat::CsvWide, LabelSource::Column("label")).unwrap();
        assert_eq!(m.names(), &["a", "b", "c"]);
        assert_eq!((m.n0(), m.n1()), (3, 3));
        assert_eq!(m.columns()[2], vec![3.0, 1.0, 2.0, 9.0, 8.0, 7.0]);
    }

    #[test]
    fn load_wide_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "m.csv", "a,label\n1,0\nx,1\n");
        match load_matrix(&p, MatrixFormat::CsvWide, LabelSource::Column("label")) {
            Err(Error::ParseError { row, col, .. }) => assert_eq!((row, col), (3, 1)),
            other => panic!("unexpected {other:?}"),
        }
        let p = write(dir.path(), "m2.csv", "a,label\n1,0\n2,0\n");
        assert!(matches!(
            load_matrix(&p, MatrixFormat::CsvWide, LabelSource::Column("label")),
            Err(Error::SingleClassLabels)
        ));
        let p = write(dir.path(), "m3.csv", "a,label\n1,0\n2,1\n");
        assert!(matches!(
            load_matrix(&p, MatrixFormat::CsvWide, LabelSource::Column("y")),
            Err(Error::LabelMismatch(_))
        ));
    }

    #[test]
    fn missing_values_reject_the_variable() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "m.csv", "a,b,label\n1,,0\n2,3,1\n3,NA,0\n");
        let m = load_matrix(&p, MatrixFormat::CsvWide, LabelSource::Column("label")).unwrap();
        assert_eq!(m.names(), &["a"]);
        assert_eq!(m.rejected()[0].name, "b");
    }

    #[test]
    fn load_long() {
        let dir = tempfile::tempdir().unwrap();
        let labels = write(dir.path(), "l.csv", "sample_id,label\ns1,0\ns2,1\ns3,0\ns4,1\n");
        let data = write(
            dir.path(),
            "d.csv",
            "variable,sample_id,value\nx,s2,2\nx,s1,1\nx,s4,4\nx,s3,3\ny,s1,9\ny,s2,8\ny,s3,7\n",
        );
        let m = load_matrix(&data, MatrixFormat::CsvLong, LabelSource::File(&labels)).unwrap();
        assert_eq!(m.names(), &["x"]);
        assert_eq!(m.columns()[0], vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.labels(), &[0, 1, 0, 1]);
        assert_eq!(m.rejected()[0].name, "y");
    }

    fn oc() -> OperatingCondition {
        OperatingCondition::from_ints(1, 1, 1, 2)
    }

    #[test]
    fn extremes_rank_as_expected() {
        let labels = vec![0, 0, 0, 1, 1, 1];
        let m = VariableMatrix::new(
            vec!["const".into(), "sep".into()],
            vec![vec![2.0; 6], vec![0.1, 0.2, 0.3, 1.1, 1.2, 1.3]],
            labels,
        )
        .unwrap();
        let nd = null_distribution(3, 3, &oc()).unwrap();
        let r = rank_variables(&m, &oc(), &nd, Adjustment::BenjaminiHochberg).unwrap();
        assert_eq!(r.records[0].name, "sep");
        assert_eq!(r.records[0].p, ratio(2, 20));
        assert_eq!(r.records[1].name, "const");
        assert_eq!(r.records[1].statistic, oc().max_statistic());
        assert_eq!(r.records[1].p, ratio(1, 1));
        assert!(r.records.iter().all(|rec| rec.p_adjusted >= rec.p));
    }

    #[test]
    fn identical_statistics_keep_input_order() {
        let labels = vec![0, 1, 0, 1];
        let m = VariableMatrix::new(
            vec!["first".into(), "second".into()],
            vec![vec![1.0, 2.0, 3.0, 4.0], vec![10.0, 20.0, 30.0, 40.0]],
            labels,
        )
        .unwrap();
        let nd = null_distribution(2, 2, &oc()).unwrap();
        let r = rank_variables(&m, &oc(), &nd, Adjustment::None).unwrap();
        assert_eq!(r.records[0].name, "first");
        assert_eq!(r.records[0].p, r.records[1].p);
    }

    #[test]
    fn ranking_agrees_with_oracle_p_values() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let labels = vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let names: Vec<String> = (0..10).map(|i| format!("v{i}")).collect();
        let columns: Vec<Vec<f64>> = (0..10)
            .map(|j| {
                labels
                    .iter()
                    .map(|&l| rng.random::<f64>() + 0.15 * j as f64 * l as f64)
                    .collect()
            })
            .collect();
        let m = VariableMatrix::new(names, columns, labels.clone()).unwrap();
        let nd = null_distribution(5, 5, &oc()).unwrap();
        let oracle = nulldist_bruteforce(5, 5, &oc()).unwrap();
        let r = rank_variables(&m, &oc(), &nd, Adjustment::None).unwrap();
        let r_oracle = rank_variables(&m, &oc(), &oracle, Adjustment::None).unwrap();
        assert_eq!(r, r_oracle);
    }

    #[test]
    fn nd_mismatch() {
        let m = VariableMatrix::new(vec!["a".into()], vec![vec![1.0, 2.0, 3.0]], vec![0, 1, 1]).unwrap();
        let nd = null_distribution(2, 2, &oc()).unwrap();
        assert!(matches!(
            rank_variables(&m, &oc(), &nd, Adjustment::None),
            Err(Error::NdMismatch { .. })
        ));
    }

    #[test]
    fn report_files() {
        let dir = tempfile::tempdir().unwrap();
        let labels = vec![0, 0, 0, 1, 1, 1];
        let m = VariableMatrix::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                vec![1.0, 4.0, 3.0, 2.0, 5.0, 6.0],
                vec![6.0, 5.0, 1.0, 4.0, 3.0, 2.0],
            ],
            labels,
        )
        .unwrap();
        let nd = null_distribution(3, 3, &oc()).unwrap();
        let r = rank_variables(&m, &oc(), &nd, Adjustment::BenjaminiHochberg).unwrap();
        let csv_path = dir.path().join("r.csv");
        write_report(&r, &csv_path, ReportFormat::Csv).unwrap();
        let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
        assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), REPORT_COLUMNS.to_vec());
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 3);
        for (row, rec) in rows.iter().zip(&r.records) {
            assert_eq!(row[0].parse::<usize>().unwrap(), rec.rank);
            assert_eq!(parse_rational(&row[8]).unwrap(), rec.p);
        }

        let json_path = dir.path().join("r.jsonl");
        write_report(&r, &json_path, ReportFormat::JsonLines).unwrap();
        let text = fs::read_to_string(&json_path).unwrap();
        assert_eq!(text.lines().count(), 3);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["rank"], 1);

        let mut empty = r.clone();
        empty.truncate(0);
        write_report(&empty, &csv_path, ReportFormat::Csv).unwrap();
        assert_eq!(fs::read_to_string(&csv_path).unwrap().lines().count(), 1);
    }
}
