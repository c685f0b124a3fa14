// Negated float comparisons are how NaN inputs get rejected; constants keep
// their full published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod error;
pub mod extension;
pub mod format;
pub mod logseries;
pub mod method;
pub mod quad;
pub mod renorm;
pub mod specfun;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
