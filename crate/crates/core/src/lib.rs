//! Monte-Carlo simulation and closed-form prediction of fourth-order
//! (intensity–intensity) interference in unbalanced two-detector setups.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod error;
pub mod exec;
pub mod fields;
pub mod harness;
pub mod interferometer;
pub mod oracle;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
