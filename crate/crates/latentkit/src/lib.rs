//! Command line, file formats and stage orchestration for `latentkit-core`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;
pub mod stages;
pub mod svg;

pub use error::{Error, Result};
