//! b-bit minwise hashing for set-resemblance estimation.
//!
//! The crate has three layers that check each other:
//!
//! - **Sketches** ([`sketch`], [`estimate`]): keyed bijective permutations over a
//!   universe `{0..2^m}`, minwise value extraction, bit-packed `b`-bit truncation,
//!   the XOR half-bit combination, and the matching unbiased estimators.
//! - **Closed-form theory** ([`theory`]): the correction factors that make the
//!   truncated estimator unbiased, its variance, storage factors, and the
//!   space-improvement ratios they imply.
//! - **Exact oracle** ([`oracle`]): the finite-universe joint distribution of two
//!   minima in exact rational arithmetic, plus brute-force permutation
//!   enumeration for tiny universes. Ground truth for everything above.
//!
//! Text ingestion ([`shingle`]) turns documents into shingle sets over the
//! universe so whole pipelines can be driven end to end.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature only widens error-trait integration and dependency features.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

pub mod error;
pub mod estimate;
mod fmath;
pub mod oracle;
pub mod permute;
pub mod shingle;
pub mod sketch;
pub mod theory;
pub mod wire;

pub use error::{Error, ParseError};
pub use estimate::{estimate_bbit, estimate_half, estimate_minwise, match_fraction, Estimate, EstimatorKind};
pub use oracle::SetPairConfig;
pub use permute::PermutationFamily;
pub use shingle::{exact_resemblance, shingle, Document, ShingleConfig};
pub use sketch::{BbitSketch, HalfBitSketch, MinwiseSketch, Sketch};
pub use theory::{CFactors, TheoryParams};
