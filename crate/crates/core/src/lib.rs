// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod effective;
pub mod error;
pub mod linear;
pub mod lp;
pub mod ns;
pub mod paradiff;
pub mod report;
pub mod rng;
pub mod series;
pub mod spectral;
pub mod suites;

pub use error::{Error, Result};
