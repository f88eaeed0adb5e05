use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use etc_core::estimator::{etc_hat_conservative, LabeledSample, OperatingCondition};
use etc_core::filter::{
    bh_adjust, load_matrix, rank_variables, write_report, write_report_to, Adjustment, LabelSource, MatrixFormat, ReportFormat,
};
use etc_core::nulldist::{null_distribution, null_distribution_with, p_value, Memoization, NdCache, NullDistribution};
use etc_core::rational::{format_decimal, format_exact, parse_rational};
use etc_core::simbench::{run_study_with, Study, StudyConfig};
use etc_core::Error;

use crate::{AdjustArg, CacheArgs, InputLayout, LabelSpec, MemoArg, OcArgs, OutputFormat};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Io(PathBuf, io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::DegenerateOperatingCondition => 3,
                Error::PartitionSumMismatch { .. } | Error::ChecksumMismatch(_) | Error::NdMismatch { .. } => 4,
                _ => 2,
            },
            CliError::Usage(_) | CliError::Io(..) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn parse_oc(args: &OcArgs) -> Result<OperatingCondition> {
    Ok(OperatingCondition::parse(&args.c0, &args.c1, &args.pi1)?)
}

fn obtain_nd(n0: usize, n1: usize, oc: &OperatingCondition, cache: &CacheArgs) -> Result<NullDistribution> {
    Ok(match &cache.cache_dir {
        Some(dir) => NdCache::new(dir)?.get_or_compute(n0, n1, oc)?,
        None => null_distribution(n0, n1, oc)?,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn finish<W: Write>(mut w: W, path: &Path) -> Result<()> {
    w.flush().map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn print_json(value: &serde_json::Value) {
    println!("{value}");
}

/// Reads `(values, labels)` for a single-variable test.
fn read_single(data: &Path, labels: &LabelSpec, value_column: Option<&str>) -> Result<(String, Vec<f64>, Vec<u8>)> {
    if let Some(col) = &labels.label_column {
        let m = load_matrix(data, MatrixFormat::CsvWide, LabelSource::Column(col))?;
        for r in m.rejected() {
            if value_column.is_none_or(|v| v == r.name) {
                return Err(CliError::Usage(format!("variable `{}` rejected: {}", r.name, r.reason)));
            }
        }
        let idx = match value_column {
            Some(v) => m
                .names()
                .iter()
                .position(|n| n == v)
                .ok_or_else(|| CliError::Usage(format!("no column `{v}` in {}", data.display())))?,
            None if m.len() == 1 => 0,
            None => {
                return Err(CliError::Usage(format!(
                    "{} has {} value columns; pick one with --value-column",
                    data.display(),
                    m.len()
                )))
            }
        };
        return Ok((m.names()[idx].clone(), m.columns()[idx].clone(), m.labels().to_vec()));
    }

    let label_path = labels.labels.as_ref().expect("clap requires one label flag");
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(data)
        .map_err(Error::from)?;
    let header = rdr.headers().map_err(Error::from)?.clone();
    let col = match value_column {
        Some(v) => header
            .iter()
            .position(|h| h == v)
            .ok_or_else(|| CliError::Usage(format!("no column `{v}` in {}", data.display())))?,
        None => 0,
    };
    let mut values = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(Error::from)?;
        let cell = rec.get(col).unwrap_or("");
        let v = cell.parse::<f64>().ok().filter(|v| !v.is_nan()).ok_or_else(|| Error::ParseError {
            row: r + 2,
            col: col + 1,
            message: format!("non-numeric value `{cell}`"),
        })?;
        values.push(v);
    }
    let mut lrdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(label_path)
        .map_err(Error::from)?;
    let mut labs = Vec::new();
    for (r, rec) in lrdr.records().enumerate() {
        let rec = rec.map_err(Error::from)?;
        let cell = rec.iter().last().unwrap_or("");
        let l = match cell {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::ParseError {
                    row: r + 2,
                    col: rec.len(),
                    message: format!("label `{other}` is not 0 or 1"),
                }
                .into())
            }
        };
        labs.push(l);
    }
    if labs.len() != values.len() {
        return Err(Error::LabelMismatch(format!("{} values but {} labels", values.len(), labs.len())).into());
    }
    Ok((header.get(col).unwrap_or("value").to_string(), values, labs))
}

pub fn test(
    data: &Path,
    labels: &LabelSpec,
    value_column: Option<&str>,
    oc: &OcArgs,
    cache: &CacheArgs,
) -> Result<()> {
    let oc = parse_oc(oc)?;
    let (name, values, labs) = read_single(data, labels, value_column)?;
    if !labs.contains(&0) || !labs.contains(&1) {
        return Err(Error::SingleClassLabels.into());
    }
    let sample = LabeledSample::new(values, labs)?;
    let est = etc_hat_conservative(&sample, &oc)?;
    let nd = obtain_nd(sample.n0(), sample.n1(), &oc, cache)?;
    let p = p_value(&nd, &est.value);
    let threshold = sample.order_statistic(est.rule.threshold_index)?;
    print_json(&json!({
        "name": name,
        "n0": sample.n0(),
        "n1": sample.n1(),
        "statistic_exact": format_exact(&est.value),
        "statistic": format_decimal(&est.value, 17),
        "direction": est.rule.direction.as_str(),
        "threshold": threshold,
        "fn": est.fn_count,
        "fp": est.fp_count,
        "tie_adjusted": est.tie_adjusted,
        "p_exact": format_exact(&p),
        "p": format_decimal(&p, 17),
    }));
    Ok(())
}

pub fn nulldist(n0: usize, n1: usize, oc: &OcArgs, cache: &CacheArgs, out: Option<&Path>) -> Result<()> {
    let oc = parse_oc(oc)?;
    let nd = obtain_nd(n0, n1, &oc, cache)?;
    match out {
        Some(path) => {
            let mut w = create(path)?;
            nd.write_csv(&mut w)?;
            finish(w, path)?;
            print_json(&json!({
                "n0": n0,
                "n1": n1,
                "oc": oc.to_string(),
                "support_points": nd.support().len(),
                "total": nd.total().to_string(),
                "out": path.display().to_string(),
            }));
        }
        None => nd.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

pub struct FilterArgs<'a> {
    pub data: &'a Path,
    pub layout: InputLayout,
    pub labels: &'a LabelSpec,
    pub oc: &'a OcArgs,
    pub cache: &'a CacheArgs,
    pub adjust: AdjustArg,
    pub top: Option<usize>,
    pub format: OutputFormat,
    pub out: Option<&'a Path>,
}

pub fn filter(a: FilterArgs<'_>) -> Result<()> {
    let oc = parse_oc(a.oc)?;
    let (format, source) = match (a.layout, &a.labels.label_column, &a.labels.labels) {
        (InputLayout::Wide, Some(col), _) => (MatrixFormat::CsvWide, LabelSource::Column(col)),
        (InputLayout::Long, _, Some(path)) => (MatrixFormat::CsvLong, LabelSource::File(path)),
        (InputLayout::Wide, None, _) => return Err(CliError::Usage("wide layout takes --label-column".into())),
        (InputLayout::Long, _, None) => return Err(CliError::Usage("long layout takes --labels".into())),
    };
    let m = load_matrix(a.data, format, source)?;
    for r in m.rejected() {
        eprintln!("rejected variable `{}`: {}", r.name, r.reason);
    }
    let nd = obtain_nd(m.n0(), m.n1(), &oc, a.cache)?;
    let adjustment = match a.adjust {
        AdjustArg::None => Adjustment::None,
        AdjustArg::Bh => Adjustment::BenjaminiHochberg,
    };
    let mut report = rank_variables(&m, &oc, &nd, adjustment)?;

    let alpha = parse_rational("0.05")?;
    let ps: Vec<_> = report.records.iter().map(|r| r.p.clone()).collect();
    let significant_raw = ps.iter().filter(|p| **p <= alpha).count();
    let significant_bh = bh_adjust(&ps)?.iter().filter(|p| **p <= alpha).count();
    let tested = report.records.len();
    if let Some(k) = a.top {
        report.truncate(k);
    }

    let report_format = match a.format {
        OutputFormat::Csv => ReportFormat::Csv,
        OutputFormat::Jsonl => ReportFormat::JsonLines,
    };
    let summary = json!({
        "tested": tested,
        "rejected_variables": m.rejected().len(),
        "reported": report.records.len(),
        "significant_raw": significant_raw,
        "significant_bh": significant_bh,
        "alpha": "0.05",
        "nd": report.nd_identity,
    });
    match a.out {
        Some(path) => {
            write_report(&report, path, report_format)?;
            print_json(&summary);
        }
        None => {
            write_report_to(&report, io::stdout().lock(), report_format)?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

pub struct SimulateArgs<'a> {
    pub study: Option<Study>,
    pub seed: u64,
    pub out: &'a Path,
    pub replications: Option<usize>,
    pub signal: Option<usize>,
    pub noise: Option<usize>,
    pub n0: Option<usize>,
    pub n1: Option<usize>,
    pub full_scale: bool,
    pub oc: &'a OcArgs,
    pub cache: &'a CacheArgs,
}

pub fn simulate(a: SimulateArgs<'_>) -> Result<()> {
    let oc = parse_oc(a.oc)?;
    let studies = match a.study {
        Some(s) => vec![s],
        None => Study::ALL.to_vec(),
    };
    let configs = studies
        .into_iter()
        .map(|study| {
            let mut cfg = if a.full_scale {
                StudyConfig::full_scale(study)
            } else {
                StudyConfig::desk(study)
            };
            cfg.seed = a.seed;
            cfg.oc = oc.clone();
            cfg.replications = a.replications.unwrap_or(cfg.replications);
            cfg.signal_count = a.signal.unwrap_or(cfg.signal_count);
            cfg.noise_count = a.noise.unwrap_or(cfg.noise_count);
            cfg.n0 = a.n0.unwrap_or(cfg.n0);
            cfg.n1 = a.n1.unwrap_or(cfg.n1);
            cfg.validate()?;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(a.out).map_err(|e| CliError::Io(a.out.to_path_buf(), e))?;
    for cfg in configs {
        let nd = obtain_nd(cfg.n0, cfg.n1, &cfg.oc, a.cache)?;
        let grid = run_study_with(&cfg, &nd)?;
        let path = a.out.join(format!("study_{}.csv", cfg.study));
        let mut w = create(&path)?;
        grid.write_csv(&mut w)?;
        finish(w, &path)?;
        print_json(&json!({
            "study": cfg.study.to_string(),
            "grid_points": cfg.grid_len(),
            "replications": cfg.replications,
            "signal": cfg.signal_count,
            "noise": cfg.noise_count,
            "n0": cfg.n0,
            "n1": cfg.n1,
            "seed": cfg.seed,
            "out": path.display().to_string(),
        }));
    }
    Ok(())
}

pub fn bench(min_n: usize, max_n: usize, memo: MemoArg, oc: &OcArgs, out: Option<&Path>) -> Result<()> {
    let oc = parse_oc(oc)?;
    if min_n == 0 || min_n > max_n {
        return Err(CliError::Usage(format!("invalid range {min_n}..={max_n}")));
    }
    let modes: &[Memoization] = match memo {
        MemoArg::On => &[Memoization::Enabled],
        MemoArg::Off => &[Memoization::Disabled],
        MemoArg::Both => &[Memoization::Enabled, Memoization::Disabled],
    };
    let mut rows = vec!["n0,n1,memo,seconds,support_points".to_string()];
    for n in min_n..=max_n {
        for &mode in modes {
            let start = Instant::now();
            let nd = null_distribution_with(n, n, &oc, mode, false)?;
            let secs = start.elapsed().as_secs_f64();
            let label = if mode == Memoization::Enabled { "on" } else { "off" };
            rows.push(format!("{n},{n},{label},{secs:.6},{}", nd.support().len()));
        }
    }
    let text = rows.join("\n") + "\n";
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
            print_json(&json!({ "out": path.display().to_string(), "rows": rows.len() - 1 }));
        }
        None => print!("{text}"),
    }
    Ok(())
}
