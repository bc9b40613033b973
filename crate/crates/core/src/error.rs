// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::ingest::SiteId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Contract and I/O failures surfaced by the analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("embedding dimension must be in 3..=7, got {0}")]
    InvalidDimension(usize),

    #[error("time delay must be at least 1, got {0}")]
    InvalidDelay(usize),

    #[error("vector has {got} elements, embedding dimension is {expected}")]
    VectorLength { expected: usize, got: usize },

    #[error("window of {len} samples is shorter than the {min} required for d={d}, tau={tau}")]
    WindowTooShort {
        len: usize,
        min: usize,
        d: usize,
        tau: usize,
    },

    #[error("window width {width} is below the minimum {min} for d={d}, tau={tau}")]
    WindowWidthTooSmall {
        width: usize,
        min: usize,
        d: usize,
        tau: usize,
    },

    #[error("window stride must be at least 1")]
    InvalidStride,

    #[error("window width must be at least 1")]
    InvalidWidth,

    #[error("parameter grid is empty")]
    EmptyGrid,

    #[error("no series provided")]
    EmptySeriesSet,

    #[error("at least {min} profiles are required, got {got}")]
    TooFewProfiles { min: usize, got: usize },

    #[error("profile for site {site} does not share the region's window grid")]
    GridMismatch { site: SiteId },

    #[error("{rule} needs at least {min} sites with a defined correlation, got {got}; consider {suggestion}")]
    TooFewSites {
        rule: String,
        min: usize,
        got: usize,
        suggestion: String,
    },

    #[error("divergence band must be positive, got {0}")]
    InvalidBand(f64),

    #[error("{path}:{line}: {msg}")]
    CsvParse {
        path: String,
        line: u64,
        msg: String,
    },

    #[error("{path}:{line}: duplicated timestamp {timestamp} for site {site}")]
    DuplicateTimestamp {
        path: String,
        line: u64,
        site: SiteId,
        timestamp: String,
    },

    #[error("{path}:{line}: non-uniform sampling for site {site} (expected {expected}s step, got {got}s)")]
    NonUniformSampling {
        path: String,
        line: u64,
        site: SiteId,
        expected: i64,
        got: i64,
    },

    #[error("postcode ranges {a} and {b} overlap")]
    OverlappingRanges { a: String, b: String },

    #[error("invalid postcode range {0:?}")]
    InvalidRange(String),

    #[error("site sets are inconsistent: {0}")]
    SiteSetMismatch(String),

    #[error("invalid fleet spec: {0}")]
    InvalidFleetSpec(String),

    #[error("fault interval for site {site} lies outside the fleet span")]
    FaultOutOfSpan { site: SiteId },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
