use thiserror::Error;

/// Errors raised by the key algebra, layouts, matchers and stores.
#[derive(Debug, Error)]
pub enum Error {
    #[error("key width {0} is outside 1..=128")]
    WidthOutOfRange(u32),

    #[error("width mismatch: expected {expected} bits, found {found}")]
    WidthMismatch { expected: u32, found: u32 },

    #[error("bit position {position} is outside 1..={width}")]
    PositionOutOfRange { position: u32, width: u32 },

    #[error("value has bits outside its mask")]
    StrayBits,

    #[error("masks overlap")]
    OverlappingMasks,

    #[error("mask is empty")]
    EmptyMask,

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("value {value} out of range for dimension `{dimension}` (cardinality {cardinality})")]
    ValueOutOfRange {
        dimension: String,
        value: u64,
        cardinality: u128,
    },

    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("range is factorizable; reduce the filter list first")]
    Factorizable,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
