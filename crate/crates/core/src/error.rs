use thiserror::Error;

/// Errors raised by the inference engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("record {id}: survival time must be > 0")]
    NonPositiveTime { id: String },
    #[error("record {id}: entry time must be >= 0 and strictly before the exit time")]
    EntryAfterExit { id: String },
    #[error("record {id}: continuous exposure {index} must be > 0 when present")]
    NegativeContinuousExposure { id: String, index: usize },
    #[error("record {id}: category {value} of variable {index} exceeds its modality count")]
    BadCategoryIndex {
        id: String,
        index: usize,
        value: usize,
    },
    #[error("record {id}: expected {expected_cont} continuous and {expected_cat} categorical values")]
    ShapeMismatch {
        id: String,
        expected_cont: usize,
        expected_cat: usize,
    },
    #[error("record {id} appears more than once")]
    DuplicateId { id: String },
    #[error("dataset has no individuals")]
    EmptyDataset,

    #[error("degenerate range: max ({max}) must exceed min ({min})")]
    DegenerateRange { min: f64, max: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("cluster cap of {cap} exceeded while extending the stick-breaking representation")]
    CapExceeded { cap: usize },
    #[error("individual {index} has no cluster above its slice variable")]
    EmptySliceSet { index: usize },

    #[error("posterior sample is empty")]
    EmptySample,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("trace too short: need at least {min} values, got {len}")]
    TooShort { len: usize, min: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by invalid input records.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::NonPositiveTime { .. }
                | Error::EntryAfterExit { .. }
                | Error::NegativeContinuousExposure { .. }
                | Error::BadCategoryIndex { .. }
                | Error::ShapeMismatch { .. }
                | Error::DuplicateId { .. }
                | Error::EmptyDataset
                | Error::Parse(_)
                | Error::Csv(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
