// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod identify;
pub mod cli;
pub mod neural;
pub mod nnap;
pub mod optimize;
pub mod physics;
pub mod scalar;
pub mod simulate;
pub mod tape;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
