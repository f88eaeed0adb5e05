use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("misclassification costs must be non-negative")]
    NegativeCost,

    #[error("prevalence pi1 must lie in [0, 1]")]
    PrevalenceOutOfRange,

    #[error("degenerate operating condition: both c0*pi0 and c1*pi1 must be positive")]
    DegenerateOperatingCondition,

    #[error("invalid number `{0}`")]
    InvalidNumber(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("sample contains a single class")]
    SingleClassSample,

    #[error("sample has tied values across classes; use the conservative estimator")]
    TiedAcrossClasses,

    #[error("threshold index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid cell (fn={fn_count}, fp={fp_count}) for n0={n0}, n1={n1}")]
    InvalidCell {
        fn_count: usize,
        fp_count: usize,
        n0: usize,
        n1: usize,
    },

    #[error("enumeration of C({n}, {n0}) permutations exceeds the limit n <= {limit}")]
    EnumerationTooLarge { n: usize, n0: usize, limit: usize },

    #[error("cell counts sum to {got}, expected C(n, n0) = {expected}")]
    PartitionSumMismatch { got: String, expected: String },

    #[error("null distribution was built for (n0={nd_n0}, n1={nd_n1}, {nd_oc}) but data has (n0={n0}, n1={n1}, {oc})")]
    NdMismatch {
        nd_n0: usize,
        nd_n1: usize,
        nd_oc: String,
        n0: usize,
        n1: usize,
        oc: String,
    },

    #[error("unsupported file format: {0}")]
    FormatVersionMismatch(String),

    #[error("checksum mismatch: {0}")]
    ChecksumMismatch(String),

    #[error("malformed file {path}: {message}")]
    Malformed { path: PathBuf, message: String },

    #[error("parse error at row {row}, column {col}: {message}")]
    ParseError {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("labels contain a single class")]
    SingleClassLabels,

    #[error("p-value {0} outside [0, 1]")]
    ValueOutOfRange(String),

    #[error("signal set is empty")]
    EmptySignalSet,

    #[error("invalid grid point: {0}")]
    InvalidGridPoint(String),

    #[error("invalid study configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
