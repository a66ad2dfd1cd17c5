//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by dataset handling, models, measures and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input in {origin} (record {record}): {message}")]
    Parse {
        origin: String,
        record: usize,
        message: String,
    },

    #[error("invalid dataset descriptor: {0}")]
    Descriptor(String),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("class column has {found} distinct value(s); at least 2 are required")]
    TooFewClasses { found: usize },

    #[error("dataset has {size} instance(s), fewer than required {required}")]
    DatasetTooSmall { size: usize, required: usize },

    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("feature {feature} value {value} exceeds cardinality {cardinality}")]
    FeatureValueOutOfRange {
        feature: usize,
        value: usize,
        cardinality: usize,
    },

    #[error("class {class} exceeds class count {class_count}")]
    ClassOutOfRange { class: usize, class_count: usize },

    #[error("feature vector has length {found}, schema expects {expected}")]
    FeatureLengthMismatch { found: usize, expected: usize },

    #[error("all classes have zero joint probability for this instance (degenerate evidence)")]
    DegenerateEvidence,

    #[error("ensemble member {index}: {source}")]
    EnsembleMember {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("candidate grid is empty")]
    EmptyGrid,

    #[error("score at index {index} is not finite")]
    NonFiniteScore { index: usize },

    #[error("instance scores must cover indices 0..{expected} exactly once")]
    NotAPermutation { expected: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("orderings cover different index sets")]
    OrderingMismatch,

    #[error("measure {measure} requires an ensemble, but none was supplied")]
    MissingEnsemble { measure: &'static str },

    #[error("vertex enumeration would visit {combinations} combinations (limit {limit})")]
    EnumerationTooLarge { combinations: u128, limit: u128 },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
