//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("array must have at least 2 elements, got {0}")]
    TooFewElements(usize),

    #[error("angle {angle_rad} rad lies outside the open interval (-pi/2, pi/2)")]
    AngleOutOfRange { angle_rad: f64 },

    #[error("directions are unidentifiable: duplicate angle {angle_rad} rad")]
    DuplicateAngles { angle_rad: f64 },

    #[error("{what} must be positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("non-finite input to {what}")]
    NonFinite { what: &'static str },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("need strictly more sensors than sources, got K = {num_sources}, M = {num_elements}")]
    TooManySources {
        num_sources: usize,
        num_elements: usize,
    },

    #[error(
        "Fisher information matrix is unidentifiable: smallest eigenvalue {smallest_eigenvalue:e} \
         (condition cap {condition_cap:e})"
    )]
    Unidentifiable {
        smallest_eigenvalue: f64,
        condition_cap: f64,
    },

    #[error("enumeration budget exceeded: {required} candidates, budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("weight at position {index} must lie in (0, 1], got {value}")]
    WeightOutOfRange { index: usize, value: f64 },

    #[error("two-level arrangement required: {context}")]
    TwoLevelRequired { context: String },

    #[error("invalid {what}: {context}")]
    Invalid { what: &'static str, context: String },

    #[error("scenario file {path}: {source}")]
    SpecParse {
        path: String,
        #[source]
        source: Box<toml::de::Error>,
    },

    #[error(
        "grid point {context}: {excluded} of {trials} threshold trials had singular Fisher \
         matrices, above the 10% exclusion limit"
    )]
    ExcessiveExclusions {
        context: String,
        excluded: usize,
        trials: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
