//! Numerical core for developing and validating Likert-type attitude scales.
//!
//! Covers the whole analysis chain: scoring and screening of survey
//! responses, principal axis factoring with varimax/promax rotation,
//! internal consistency, construct validity, multidimensional scaling,
//! single-linkage clustering and the group-comparison statistics used to
//! report the results.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, plotting and
//! the command line live in the `latentkit` crate.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cluster;
pub mod dataset;
pub mod dist;
pub mod efa;
mod error;
pub mod inference;
pub mod isotonic;
pub mod linalg;
pub mod mds;
pub mod reliability;
pub mod screening;
pub mod stats;
pub mod synth;
pub mod validity;

pub use error::{Error, Result};
pub use linalg::Matrix;
