//! Cramér-Rao bounds for direction-of-arrival estimation on uniform linear
//! arrays whose front end mixes high-precision and one-bit ADCs with known
//! time-varying thresholds.
//!
//! The crate covers four pieces:
//!
//! * [`array_model`] — steering vectors, deterministic source scenes, noisy
//!   observation, and the complex one-bit / mixed quantizers;
//! * [`fisher_crb`] — Fisher information under general and optimal
//!   thresholds, block-wise bound extraction, the projected-dispersion
//!   closed form, and the large-array diagonal bound;
//! * [`arrangement`] — the positional dispersion score and the ADC placement
//!   problem it induces: the edge-even optimum, exhaustive certification,
//!   swap gains, and a greedy rule for general precision multisets;
//! * [`scenario`] — a declarative sweep runner with seeded, reproducible
//!   trials and CSV output.
//!
//! All numerics are generic over the scalar type through [`Scalar`]
//! (`f32` or `f64`); the aliases below pin the common double-precision
//! instantiations.

pub mod array_model;
pub mod arrangement;
pub mod error;
pub mod fisher_crb;
pub mod scalar;
pub mod scenario;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use array_model::ArrayConfig;

/// Double-precision instantiations of the core generic types.
pub type SourceScene64 = array_model::SourceScene<f64>;
pub type ThresholdScheme64 = array_model::ThresholdScheme<f64>;
pub type Snapshots64 = array_model::Snapshots<f64>;
pub type Arrangement64 = arrangement::Arrangement<f64>;
pub type FimResult64 = fisher_crb::FimResult<f64>;
pub type CrbResult64 = fisher_crb::CrbResult<f64>;

/// Single-precision instantiations.
pub type SourceScene32 = array_model::SourceScene<f32>;
pub type Arrangement32 = arrangement::Arrangement<f32>;
pub type CrbResult32 = fisher_crb::CrbResult<f32>;
