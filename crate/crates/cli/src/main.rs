mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use etc_core::simbench::Study;

#[derive(Parser, Debug)]
#[command(name = "etc", version, about = "Exact threshold-separability test and variable filter")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OcArgs {
    /// Cost of a false positive (decimal or num/den).
    #[arg(long, default_value = "1")]
    pub c0: String,
    /// Cost of a false negative.
    #[arg(long, default_value = "1")]
    pub c1: String,
    /// Prevalence of the positive class.
    #[arg(long, default_value = "1/2")]
    pub pi1: String,
}

#[derive(Args, Debug, Clone)]
pub struct CacheArgs {
    /// Directory for cached null distributions.
    #[arg(long, env = "ETC_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct LabelSpec {
    /// Label file (header row; labels in the last column).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Name of the 0/1 label column inside the data file.
    #[arg(long)]
    pub label_column: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputLayout {
    Wide,
    Long,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AdjustArg {
    None,
    Bh,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MemoArg {
    On,
    Off,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test one variable.
    Test {
        /// CSV with a header row.
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        labels: LabelSpec,
        /// Value column (default: the only non-label column).
        #[arg(long)]
        value_column: Option<String>,
        #[command(flatten)]
        oc: OcArgs,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Compute a null distribution and write it as CSV.
    Nulldist {
        #[arg(long)]
        n0: usize,
        #[arg(long)]
        n1: usize,
        #[command(flatten)]
        oc: OcArgs,
        #[command(flatten)]
        cache: CacheArgs,
        /// Output CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test and rank every variable of a matrix.
    Filter {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = InputLayout::Wide)]
        layout: InputLayout,
        #[command(flatten)]
        labels: LabelSpec,
        #[command(flatten)]
        oc: OcArgs,
        #[command(flatten)]
        cache: CacheArgs,
        #[arg(long, value_enum, default_value_t = AdjustArg::Bh)]
        adjust: AdjustArg,
        /// Keep only the best ranked variables.
        #[arg(long)]
        top: Option<usize>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Report file (default: stdout, summary on stderr).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run simulation studies and write one CSV per study.
    Simulate {
        /// Study to run (default: all).
        #[arg(long)]
        study: Option<Study>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        signal: Option<usize>,
        #[arg(long)]
        noise: Option<usize>,
        #[arg(long)]
        n0: Option<usize>,
        #[arg(long)]
        n1: Option<usize>,
        /// 1000 signal / 99000 noise variables, n0 = n1 = 50.
        #[arg(long)]
        full_scale: bool,
        #[command(flatten)]
        oc: OcArgs,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Time null-distribution computation for n0 = n1 = n.
    Bench {
        #[arg(long, default_value_t = 6)]
        min_n: usize,
        #[arg(long, default_value_t = 12)]
        max_n: usize,
        #[arg(long, value_enum, default_value_t = MemoArg::Both)]
        memo: MemoArg,
        #[command(flatten)]
        oc: OcArgs,
        /// Output CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .expect("thread pool is configured once");
    }
    let result = match cli.command {
        Command::Test {
            data,
            labels,
            value_column,
            oc,
            cache,
        } => commands::test(&data, &labels, value_column.as_deref(), &oc, &cache),
        Command::Nulldist { n0, n1, oc, cache, out } => commands::nulldist(n0, n1, &oc, &cache, out.as_deref()),
        Command::Filter {
            data,
            layout,
            labels,
            oc,
            cache,
            adjust,
            top,
            format,
            out,
        } => commands::filter(commands::FilterArgs {
            data: &data,
            layout,
            labels: &labels,
            oc: &oc,
            cache: &cache,
            adjust,
            top,
            format,
            out: out.as_deref(),
        }),
        Command::Simulate {
            study,
            seed,
            out,
            replications,
            signal,
            noise,
            n0,
            n1,
            full_scale,
            oc,
            cache,
        } => commands::simulate(commands::SimulateArgs {
            study,
            seed,
            out: &out,
            replications,
            signal,
            noise,
            n0,
            n1,
            full_scale,
            oc: &oc,
            cache: &cache,
        }),
        Command::Bench {
            min_n,
            max_n,
            memo,
            oc,
            out,
        } => commands::bench(min_n, max_n, memo, &oc, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
