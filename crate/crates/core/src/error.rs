use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad input data: non-finite values, empty overlaps, unusable files.
    #[error("data error: {0}")]
    Data(String),

    /// Caller passed arguments outside an operation's preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("frequency mismatch: {0} vs {1} samples/year (resample first)")]
    FrequencyMismatch(u32, u32),

    #[error("series do not overlap")]
    EmptyOverlap,

    #[error("unsupported conversion from {from} to {to} samples/year")]
    UnsupportedConversion { from: u32, to: u32 },

    #[error("row {row}: {msg}")]
    Row { row: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by how an operation was invoked rather than by the data.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Usage(_) | Error::FrequencyMismatch(..) | Error::UnsupportedConversion { .. }
        )
    }
}
