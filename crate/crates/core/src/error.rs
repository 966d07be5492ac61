use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("invalid quarter label {0:?} (expected YYYY-Qn)")]
    QuarterLabel(String),

    #[error("quarter {quarter} outside declared range {range}")]
    QuarterOutOfRange { quarter: String, range: String },

    #[error("alias table line {line}: {message}")]
    Alias { line: usize, message: String },

    #[error("merge-safety violation: {0}")]
    MergeConflict(String),

    #[error("duplicate record for {name} in {quarter} (lines {first_line} and {second_line})")]
    DuplicateRecord {
        name: String,
        quarter: String,
        first_line: u64,
        second_line: u64,
    },

    #[error("quarter {quarter} has {count} ranked records (limit {limit})")]
    TooManyRanked {
        quarter: String,
        count: usize,
        limit: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Degenerate(String),

    #[error("institution sets differ: {0}")]
    MismatchedSets(String),

    #[error("weight matrix must come from binary co-occurrence links")]
    WeightModeMismatch,

    #[error("config error: {0}")]
    Config(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the failure stems from user input rather than an internal fault.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Json(_) | Error::Degenerate(_))
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Schema(_) => "schema",
            Error::Row { .. } => "row",
            Error::QuarterLabel(_) => "quarter_label",
            Error::QuarterOutOfRange { .. } => "quarter_range",
            Error::Alias { .. } => "alias",
            Error::MergeConflict(_) => "merge_conflict",
            Error::DuplicateRecord { .. } => "duplicate_record",
            Error::TooManyRanked { .. } => "too_many_ranked",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Degenerate(_) => "degenerate",
            Error::MismatchedSets(_) => "mismatched_sets",
            Error::WeightModeMismatch => "weight_mode",
            Error::Config(_) => "config",
            Error::Json(_) => "json",
        }
    }
}
