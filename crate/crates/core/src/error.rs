use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, DsiError>;

/// Broad category of a failure, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Ingestion,
    Validation,
    Numeric,
}

#[derive(Debug, Error)]
pub enum DsiError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    Unparsable {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("row {row}, column {column}: non-finite value {value:?}")]
    NonFinite {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("label column {0} not found")]
    LabelColumnMissing(String),
    #[error("dataset has no feature columns")]
    NoFeatures,
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("record {record}: label byte {label} out of range 0..=9")]
    BadLabel { record: usize, label: u8 },
    #[error("no input files given")]
    NoInputs,

    #[error("need at least 2 classes, found {0}")]
    TooFewClasses(usize),
    #[error("expected exactly 2 classes, found {0}")]
    NotTwoClasses(usize),
    #[error("class {0} not present in dataset")]
    ClassAbsent(u32),
    #[error("ICD undefined for singleton class {0}")]
    SingletonClass(u32),
    #[error("class {0} has an empty complement")]
    EmptyComplement(u32),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cosine distance undefined for a zero-norm vector")]
    ZeroNorm,
    #[error("correlation distance undefined for a zero-variance vector")]
    ZeroVariance,
    #[error("mahalanobis metric needs an inverse covariance matrix")]
    MissingCovariance,
    #[error("empty distance sample")]
    EmptySample,
    #[error("invalid subsample: {0}")]
    InvalidSubsample(String),
    #[error("invalid generator spec: {0}")]
    InvalidGenerator(String),
    #[error("unknown {what} {name:?}")]
    Unknown { what: &'static str, name: String },
    #[error("empty parameter list")]
    EmptyParams,

    #[error("covariance matrix is singular or ill-conditioned (condition number {0:.3e})")]
    SingularCovariance(f64),
    #[error("inverse covariance is not symmetric positive definite")]
    NotPositiveDefinite,
}

impl DsiError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DsiError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        use DsiError::*;
        match self {
            Io { .. }
            | Csv(_)
            | Unparsable { .. }
            | NonFinite { .. }
            | RaggedRow { .. }
            | EmptyDataset
            | LabelColumnMissing(_)
            | NoFeatures
            | MalformedRecord(_)
            | BadLabel { .. }
            | NoInputs => ErrorKind::Ingestion,
            SingularCovariance(_) | NotPositiveDefinite => ErrorKind::Numeric,
            _ => ErrorKind::Validation,
        }
    }
}
